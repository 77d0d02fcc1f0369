#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "melast/errors.hpp"
#include "melast/snapshot.hpp"
#include "melast/testing.hpp"

using namespace melast;

namespace {
std::string tmp_path(const char* name) {
    return (std::filesystem::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("deformation snapshot round-trips bit-exactly") {
    RefGrid g(6, 6, {0, 0}, {1, 1});
    std::uint64_t rng = 99;
    const DeformationField y = random_admissible_field(g, rng, 0.2);
    const std::string path = tmp_path("melast_snap_y.grid");
    write_deformation(path, y);
    const DeformationField back = read_deformation(path, g);
    for (int n = 0; n < g.num_nodes(); ++n) {
        CHECK(back.node(n).x == y.node(n).x);  // bit-exact
        CHECK(back.node(n).y == y.node(n).y);
    }
    std::remove(path.c_str());
}

TEST_CASE("director snapshot round-trips bit-exactly") {
    RefGrid gs(5, 7, {0, 0}, {5, 7});  // square cells need extent ratio nx:ny
    std::uint64_t rng = 3;
    DirectorField z = DirectorField::interpolate(
        gs, [&](Vec2) { return uniform(rng, -4.0, 4.0); });
    const std::string path = tmp_path("melast_snap_theta.grid");
    write_director(path, z);
    const DirectorField back = read_director(path, gs);
    for (int c = 0; c < gs.num_cells(); ++c) CHECK(back.angle(c) == z.angle(c));
    std::remove(path.c_str());
}

TEST_CASE("snapshot header and shape validation") {
    RefGrid g(4, 4, {0, 0}, {1, 1});
    RefGrid other(5, 5, {0, 0}, {1, 1});
    const DeformationField y = DeformationField::identity(g);
    const std::string path = tmp_path("melast_snap_hdr.grid");
    write_deformation(path, y);
    CHECK_THROWS_AS(read_deformation(path, other), InputError);
    CHECK_THROWS_AS(read_deformation(tmp_path("melast_missing.grid"), g), InputError);
    std::remove(path.c_str());

    // Non-square cells are not representable in the snapshot format.
    RefGrid rect(4, 4, {0, 0}, {2, 1});
    CHECK_THROWS_AS(write_deformation(path, DeformationField::identity(rect)),
                    InputError);
}

TEST_CASE("format_g17 round-trips doubles") {
    std::uint64_t rng = 1234;
    for (int k = 0; k < 200; ++k) {
        const double v = (uniform01(rng) - 0.5) * std::pow(10.0, uniform(rng, -12, 12));
        CHECK(std::stod(format_g17(v)) == v);
    }
}
