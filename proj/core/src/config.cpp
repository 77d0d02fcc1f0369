#include "melast/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "melast/errors.hpp"

namespace melast {

namespace {

struct KeyValue {
    std::map<std::string, std::string> kv;
    std::map<std::string, int> line_of;
};

KeyValue tokenize(const std::string& text) {
    KeyValue out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const size_t eq = line.find('=');
        auto trim = [](std::string s) {
            const char* ws = " \t\r\n";
            const size_t b = s.find_first_not_of(ws);
            if (b == std::string::npos) return std::string();
            const size_t e = s.find_last_not_of(ws);
            return s.substr(b, e - b + 1);
        };
        if (eq == std::string::npos) {
            if (!trim(line).empty())
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + trim(line) + "'");
            continue;
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("line " + std::to_string(lineno) + ": empty key");
        if (out.kv.count(key))
            throw ConfigError("line " + std::to_string(lineno) + ": duplicate key '" +
                              key + "'");
        out.kv[key] = value;
        out.line_of[key] = lineno;
    }
    return out;
}

class Reader {
public:
    explicit Reader(KeyValue kv) : kv_(std::move(kv)) {}

    bool has(const std::string& key) {
        used_.insert(key);
        return kv_.kv.count(key) > 0;
    }
    std::string str(const std::string& key, const std::string& def) {
        used_.insert(key);
        auto it = kv_.kv.find(key);
        return it == kv_.kv.end() ? def : it->second;
    }
    double num(const std::string& key, double def) {
        used_.insert(key);
        auto it = kv_.kv.find(key);
        if (it == kv_.kv.end()) return def;
        try {
            size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            violations_.push_back("key '" + key + "': not a number: '" + it->second + "'");
            return def;
        }
    }
    int integer(const std::string& key, int def) {
        const double v = num(key, def);
        if (v != static_cast<long long>(v))
            violations_.push_back("key '" + key + "': expected an integer");
        return static_cast<int>(v);
    }
    bool boolean(const std::string& key, bool def) {
        const std::string v = str(key, def ? "true" : "false");
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        violations_.push_back("key '" + key + "': expected true/false, got '" + v + "'");
        return def;
    }
    std::vector<double> num_list(const std::string& key) {
        used_.insert(key);
        auto it = kv_.kv.find(key);
        std::vector<double> out;
        if (it == kv_.kv.end()) return out;
        std::stringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            try {
                out.push_back(std::stod(tok));
            } catch (const std::exception&) {
                violations_.push_back("key '" + key + "': bad number '" + tok + "'");
            }
        }
        return out;
    }

    void require(const std::string& key, bool ok, const std::string& why) {
        if (!ok) violations_.push_back("key '" + key + "': " + why);
    }
    void add_violation(const std::string& msg) { violations_.push_back(msg); }

    void finish() {
        std::vector<std::string> unknown;
        for (const auto& [key, value] : kv_.kv)
            if (!used_.count(key))
                unknown.push_back("unknown key '" + key + "' (line " +
                                  std::to_string(kv_.line_of[key]) + ")");
        for (const auto& u : unknown) violations_.push_back(u);
        if (!violations_.empty()) {
            std::string msg = "configuration invalid:";
            for (const auto& v : violations_) msg += "\n  - " + v;
            throw ConfigError(msg);
        }
    }

private:
    KeyValue kv_;
    std::set<std::string> used_;
    std::vector<std::string> violations_;
};

Expr checked_expr(Reader& r, const std::string& key, const std::string& text) {
    try {
        return Expr::parse(text);
    } catch (const ConfigError& e) {
        r.add_violation("key '" + key + "': " + e.what());
        return Expr::constant(0.0);
    }
}

}  // namespace

RunConfig parse_config(const std::string& text) {
    Reader r(tokenize(text));
    RunConfig c;

    c.nx = r.integer("grid.nx", c.nx);
    c.ny = r.integer("grid.ny", c.ny);
    c.origin.x = r.num("grid.origin_x", c.origin.x);
    c.origin.y = r.num("grid.origin_y", c.origin.y);
    c.extent.x = r.num("grid.extent_x", c.extent.x);
    c.extent.y = r.num("grid.extent_y", c.extent.y);
    r.require("grid.nx", c.nx >= 2, "nx too small (need >= 2)");
    r.require("grid.ny", c.ny >= 2, "ny too small (need >= 2)");
    r.require("grid.extent_x", c.extent.x > 0.0, "must be positive");
    r.require("grid.extent_y", c.extent.y > 0.0, "must be positive");
    {
        const std::string q = r.str("grid.quadrature", "gauss2");
        try {
            c.quadrature = quadrature_rule_from_string(q);
        } catch (const ConfigError& e) {
            r.add_violation(e.what());
        }
    }

    c.material.alpha = r.num("material.alpha", c.material.alpha);
    c.material.beta = r.num("material.beta", c.material.beta);
    c.material.p = r.num("material.p", c.material.p);
    c.material.a = r.num("material.a", c.material.a);
    c.material.eps_d = r.num("material.eps_d", c.material.eps_d);
    r.require("material.alpha", c.material.alpha > 0.0, "must be positive");
    r.require("material.beta", c.material.beta > 0.0, "must be positive");
    r.require("material.p", c.material.p > 1.0, "elastic exponent must exceed 1");
    r.require("material.a", c.material.a > 1.0, "barrier exponent must exceed 1");
    r.require("material.eps_d", c.material.eps_d >= 0.0, "must be nonnegative");

    c.mx = r.integer("eulerian.mx", c.mx);
    c.my = r.integer("eulerian.my", c.my);
    c.padding = r.num("eulerian.padding", c.padding);
    r.require("eulerian.mx", c.mx >= 2, "too small");
    r.require("eulerian.my", c.my >= 2, "too small");
    r.require("eulerian.padding", c.padding > 0.0, "must be positive");
    c.maxwell.tol = r.num("maxwell.tol", c.maxwell.tol);
    c.maxwell.max_iter = r.integer("maxwell.maxiter", c.maxwell.max_iter);
    r.require("maxwell.tol", c.maxwell.tol > 0.0, "tolerance must be positive");
    r.require("maxwell.maxiter", c.maxwell.max_iter > 0, "must be positive");
    {
        const std::string s = r.str("maxwell.solver", "cg");
        if (s == "cg") c.maxwell.solver = StraySolver::CG;
        else if (s == "dst") c.maxwell.solver = StraySolver::DST;
        else r.add_violation("key 'maxwell.solver': expected cg or dst, got '" + s + "'");
    }
    c.maxwell_enabled = r.boolean("maxwell.enabled", c.maxwell_enabled);

    c.f_x = r.str("loads.f_x", c.f_x);
    c.f_y = r.str("loads.f_y", c.f_y);
    c.g_x = r.str("loads.g_x", c.g_x);
    c.g_y = r.str("loads.g_y", c.g_y);
    c.h_x = r.str("loads.h_x", c.h_x);
    c.h_y = r.str("loads.h_y", c.h_y);
    c.d_x = r.str("loads.d_x", c.d_x);
    c.d_y = r.str("loads.d_y", c.d_y);
    for (const auto& [key, text] :
         {std::pair<std::string, std::string>{"loads.f_x", c.f_x},
          {"loads.f_y", c.f_y}, {"loads.g_x", c.g_x}, {"loads.g_y", c.g_y},
          {"loads.h_x", c.h_x}, {"loads.h_y", c.h_y}, {"loads.d_x", c.d_x},
          {"loads.d_y", c.d_y}})
        checked_expr(r, key, text);
    c.sigma_sides = r.str("loads.sigma", c.sigma_sides);
    c.gamma_sides = r.str("loads.gamma", c.gamma_sides);
    try {
        sides_from_names(c.sigma_sides);
    } catch (const ConfigError& e) {
        r.add_violation(e.what());
    }
    try {
        const auto gamma = sides_from_names(c.gamma_sides);
        r.require("loads.gamma", !gamma.empty(),
                  "the penalty boundary Gamma must not be empty");
    } catch (const ConfigError& e) {
        r.add_violation(e.what());
    }
    c.t_end = r.num("schedule.t_end", c.t_end);
    c.schedule_samples = r.integer("schedule.samples", c.schedule_samples);
    r.require("schedule.t_end", c.t_end > 0.0, "horizon must be positive");
    r.require("schedule.samples", c.schedule_samples >= 2, "need at least 2 samples");

    c.partition_steps = r.integer("partition.steps", c.partition_steps);
    c.partition_times = r.num_list("partition.times");
    r.require("partition.steps", c.partition_steps >= 1, "need at least one step");

    c.init_theta = r.str("init.theta", c.init_theta);
    c.init_y_x = r.str("init.y_x", c.init_y_x);
    c.init_y_y = r.str("init.y_y", c.init_y_y);
    checked_expr(r, "init.theta", c.init_theta);
    checked_expr(r, "init.y_x", c.init_y_x);
    checked_expr(r, "init.y_y", c.init_y_y);
    c.init_minimize = r.boolean("init.minimize", c.init_minimize);

    c.evolution.minimize.max_iters = r.integer("optimizer.max_iters", c.evolution.minimize.max_iters);
    c.evolution.minimize.grad_tol = r.num("optimizer.grad_tol", c.evolution.minimize.grad_tol);
    c.evolution.minimize.history = r.integer("optimizer.history", c.evolution.minimize.history);
    c.evolution.minimize.ls_max = r.integer("optimizer.ls_max", c.evolution.minimize.ls_max);
    c.evolution.det_floor = r.num("optimizer.det_floor", c.evolution.det_floor);
    c.evolution.block_fallback = r.boolean("optimizer.block_fallback", c.evolution.block_fallback);
    c.evolution.max_bisections = r.integer("optimizer.max_bisections", c.evolution.max_bisections);
    r.require("optimizer.max_iters", c.evolution.minimize.max_iters > 0, "must be positive");
    r.require("optimizer.grad_tol", c.evolution.minimize.grad_tol > 0.0, "tolerance must be positive");
    r.require("optimizer.det_floor", c.evolution.det_floor >= 0.0, "must be nonnegative");

    c.evolution.balance_tol_rel = r.num("diag.balance_tol_rel", c.evolution.balance_tol_rel);
    c.evolution.cn_tol_factor = r.num("diag.cn_factor", c.evolution.cn_tol_factor);
    c.evolution.work_subdivisions = r.integer("diag.work_subdivisions", c.evolution.work_subdivisions);
    r.require("diag.balance_tol_rel", c.evolution.balance_tol_rel > 0.0, "tolerance must be positive");
    r.require("diag.cn_factor", c.evolution.cn_tol_factor > 0.0, "must be positive");
    c.stability_enabled = r.boolean("diag.stability", c.stability_enabled);
    c.stability_competitors = r.integer("diag.stability_competitors", c.stability_competitors);
    c.stability_tol = r.num("diag.stability_tol", c.stability_tol);
    r.require("diag.stability_tol", c.stability_tol > 0.0, "tolerance must be positive");
    {
        const auto steps = r.num_list("diag.stability_steps");
        for (double s : steps) c.stability_steps.push_back(static_cast<int>(s));
    }
    c.apriori_enabled = r.boolean("diag.apriori", c.apriori_enabled);
    c.apriori_samples = r.integer("diag.apriori_samples", c.apriori_samples);

    const double seed = r.num("seed", static_cast<double>(c.seed));
    c.seed = static_cast<std::uint64_t>(seed);

    c.degree_snapshot = r.str("degree.snapshot", c.degree_snapshot);
    c.degree_fields = r.integer("degree.fields", c.degree_fields);
    c.degree_boundary_samples = r.integer("degree.samples", c.degree_boundary_samples);
    c.resume_dir = r.str("resume.dir", c.resume_dir);

    r.finish();

    if (!c.partition_times.empty()) {
        Partition p;
        p.times = c.partition_times;
        p.validate(c.t_end);
    }
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

RefGrid RunConfig::make_grid() const {
    return RefGrid(nx, ny, origin, extent, quadrature);
}

LoadSchedule RunConfig::make_loads() const {
    std::vector<double> times(schedule_samples);
    for (int k = 0; k < schedule_samples; ++k)
        times[k] = t_end * k / (schedule_samples - 1);
    return LoadSchedule(std::move(times), Expr2::parse(f_x, f_y), Expr2::parse(g_x, g_y),
                        Expr2::parse(h_x, h_y), Expr2::parse(d_x, d_y),
                        sides_from_names(sigma_sides), sides_from_names(gamma_sides));
}

Partition RunConfig::make_partition() const {
    if (!partition_times.empty()) {
        Partition p;
        p.times = partition_times;
        p.validate(t_end);
        return p;
    }
    return Partition::uniform(t_end, partition_steps);
}

State RunConfig::make_initial_state(const RefGrid& grid) const {
    const Expr2 y0 = Expr2::parse(init_y_x, init_y_y);
    const Expr th = Expr::parse(init_theta);
    DeformationField y = DeformationField::interpolate(
        grid, [&](Vec2 x) { return y0.eval(x, 0.0); });
    DirectorField z = DirectorField::interpolate(
        grid, [&](Vec2 x) { return th.eval(x, 0.0); });
    return {std::move(y), std::move(z)};
}

MaxwellContext RunConfig::make_maxwell(const DeformationField& y0) const {
    return MaxwellContext(EulerianGrid::around(y0, mx, my, padding), maxwell);
}

}  // namespace melast
