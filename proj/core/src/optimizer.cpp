#include "melast/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace melast {

namespace {

double max_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

}  // namespace

MinimizeReport minimize_lbfgs(const ObjectiveFn& objective, std::vector<double>& x,
                              const MinimizeOptions& opts, const AcceptFn& accept) {
    const size_t n = x.size();
    MinimizeReport rep;

    std::vector<double> grad(n, 0.0);
    double f = objective(x, &grad);
    ++rep.evaluations;
    rep.value = f;
    rep.grad_norm = max_norm(grad);
    if (!std::isfinite(f)) {
        rep.stagnated = true;
        return rep;
    }

    std::deque<std::vector<double>> s_hist, y_hist;
    std::deque<double> rho_hist;

    std::vector<double> dir(n), x_new(n), grad_new(n);

    for (int iter = 0; iter < opts.max_iters; ++iter) {
        rep.grad_norm = max_norm(grad);
        if (rep.grad_norm <= opts.grad_tol) {
            rep.converged = true;
            break;
        }

        // Two-loop recursion for d = -H g.
        dir = grad;
        std::vector<double> alpha(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            alpha[k] = rho_hist[k] * dot(s_hist[k], dir);
            for (size_t j = 0; j < n; ++j) dir[j] -= alpha[k] * y_hist[k][j];
        }
        if (!s_hist.empty()) {
            const double gamma = dot(s_hist.back(), y_hist.back()) /
                                 std::max(dot(y_hist.back(), y_hist.back()), 1e-300);
            for (double& v : dir) v *= gamma;
        }
        for (size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * dot(y_hist[k], dir);
            for (size_t j = 0; j < n; ++j) dir[j] += (alpha[k] - beta) * s_hist[k][j];
        }
        for (double& v : dir) v = -v;

        double gd = dot(grad, dir);
        if (gd >= 0.0) {
            // Not a descent direction: drop the memory and fall back to
            // steepest descent.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            for (size_t j = 0; j < n; ++j) dir[j] = -grad[j];
            gd = dot(grad, dir);
            if (gd >= 0.0) break;  // zero gradient
        }

        // Backtracking Armijo line search; infeasible (+inf) trials shrink.
        double step = 1.0;
        if (s_hist.empty() && iter == 0) {
            const double dn = max_norm(dir);
            if (dn > 1.0) step = 1.0 / dn;
        }
        bool accepted = false;
        for (int ls = 0; ls < opts.ls_max; ++ls) {
            for (size_t j = 0; j < n; ++j) x_new[j] = x[j] + step * dir[j];
            std::fill(grad_new.begin(), grad_new.end(), 0.0);
            const double f_new = objective(x_new, &grad_new);
            ++rep.evaluations;
            const bool armijo =
                std::isfinite(f_new) && f_new <= f + opts.armijo_c * step * gd;
            if (armijo && (!accept || accept(x_new))) {
                // Curvature pair from the accepted move.
                std::vector<double> s_vec(n), y_vec(n);
                for (size_t j = 0; j < n; ++j) {
                    s_vec[j] = x_new[j] - x[j];
                    y_vec[j] = grad_new[j] - grad[j];
                }
                const double sy = dot(s_vec, y_vec);
                if (sy > 1e-12 * std::sqrt(dot(s_vec, s_vec)) *
                              std::sqrt(dot(y_vec, y_vec))) {
                    s_hist.push_back(std::move(s_vec));
                    y_hist.push_back(std::move(y_vec));
                    rho_hist.push_back(1.0 / sy);
                    if (static_cast<int>(s_hist.size()) > opts.history) {
                        s_hist.pop_front();
                        y_hist.pop_front();
                        rho_hist.pop_front();
                    }
                }
                x.swap(x_new);
                grad.swap(grad_new);
                f = f_new;
                accepted = true;
                break;
            }
            step *= opts.ls_shrink;
            if (step < opts.min_step) break;
        }
        ++rep.iterations;
        if (!accepted) {
            rep.stagnated = true;
            break;
        }
    }

    rep.value = f;
    rep.grad_norm = max_norm(grad);
    rep.converged = rep.grad_norm <= opts.grad_tol;
    return rep;
}

MinimizeReport minimize_block_sweep(const ObjectiveFn& objective,
                                    std::vector<double>& x,
                                    const std::vector<std::vector<int>>& blocks,
                                    int sweeps, const MinimizeOptions& opts,
                                    const AcceptFn& accept) {
    MinimizeReport total;
    for (int sweep = 0; sweep < sweeps; ++sweep) {
        for (const auto& block : blocks) {
            std::vector<double> xb(block.size());
            for (size_t k = 0; k < block.size(); ++k) xb[k] = x[block[k]];
            std::vector<double> base = x;
            auto sub_objective = [&](const std::vector<double>& xs,
                                     std::vector<double>* gs) {
                std::vector<double> full = base;
                for (size_t k = 0; k < block.size(); ++k) full[block[k]] = xs[k];
                if (!gs) return objective(full, nullptr);
                std::vector<double> gfull(full.size(), 0.0);
                const double v = objective(full, &gfull);
                for (size_t k = 0; k < block.size(); ++k) (*gs)[k] = gfull[block[k]];
                return v;
            };
            AcceptFn sub_accept;
            if (accept) {
                sub_accept = [&](const std::vector<double>& xs) {
                    std::vector<double> full = base;
                    for (size_t k = 0; k < block.size(); ++k) full[block[k]] = xs[k];
                    return accept(full);
                };
            }
            MinimizeOptions sub_opts = opts;
            sub_opts.max_iters = std::max(1, opts.max_iters / (2 * sweeps));
            const MinimizeReport rep =
                minimize_lbfgs(sub_objective, xb, sub_opts, sub_accept);
            for (size_t k = 0; k < block.size(); ++k) x[block[k]] = xb[k];
            total.iterations += rep.iterations;
            total.evaluations += rep.evaluations;
            total.value = rep.value;
        }
    }
    // Final full-space report values.
    std::vector<double> g(x.size(), 0.0);
    total.value = objective(x, &g);
    ++total.evaluations;
    total.grad_norm = max_norm(g);
    total.converged = total.grad_norm <= opts.grad_tol;
    return total;
}

}  // namespace melast
