#include "rom/benchmarks.hpp"
#include "rom/error.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace rom;
using namespace rom::bench;

namespace {

// Value of the field at the cell whose center is closest to (x, z) on a 2D xz grid.
double at(const Snapshot& s, const GridSpec& g, double x, double z)
{
    const auto i = static_cast<std::size_t>(std::floor((x - g.x0) / g.dx));
    const auto k = static_cast<std::size_t>(std::floor((z - g.z0) / g.dz));
    return s.values[g.index(i, 0, k)];
}

} // namespace

TEST_CASE("warm bubble perturbation")
{
    // Grid with a cell center exactly at (1000, 1000) and at 1000 m from it.
    const GridSpec g{40, 1, 40, 50.0, 1.0, 50.0, -25.0, 0.0, -25.0};
    WarmBubbleConfig cfg;
    cfg.center = {1000.0, 0.0, 1000.0};
    cfg.r0 = 2000.0;
    const auto s = warm_bubble_theta_prime(cfg, g);
    CHECK(at(s, g, 1000.0, 1000.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(at(s, g, 1000.0, 0.0) == doctest::Approx(1.0).epsilon(1e-14));

    cfg.r0 = 1000.0;
    const auto t = warm_bubble_theta_prime(cfg, g);
    CHECK(at(t, g, 1500.0, 1000.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(at(t, g, 1000.0, 0.0) == 0.0);
    CHECK(at(t, g, 0.0, 0.0) == 0.0);

    cfg.r0 = 2000.0;
    cfg.center = {2000.0, 0.0, 1000.0};
    CHECK(at(warm_bubble_theta_prime(cfg, g), g, 1000.0, 1000.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("3D warm bubble uses all three offsets")
{
    const GridSpec g{8, 8, 8, 100.0, 100.0, 100.0, -50.0, -50.0, -50.0};
    WarmBubbleConfig cfg;
    cfg.center = {300.0, 300.0, 300.0};
    cfg.r0 = 500.0;
    const auto s = warm_bubble_theta_prime(cfg, g);
    CHECK(s.values[g.index(3, 3, 3)] == doctest::Approx(2.0));
    CHECK(s.values[g.index(3, 6, 3)] == doctest::Approx(2.0 * (1.0 - 300.0 / 500.0)));
    CHECK(s.values[g.index(3, 3, 0)] == doctest::Approx(2.0 * (1.0 - 300.0 / 500.0)));
    CHECK(s.values[g.index(7, 7, 7)] == 0.0);
}

TEST_CASE("density current perturbation")
{
    const GridSpec g{40, 1, 40, 100.0, 1.0, 100.0, -2050.0, 0.0, 1050.0};
    const DensityCurrentConfig cfg; // centre (0, 3000), radii (4000, 2000)
    const auto s = density_current_theta_prime(cfg, g);
    CHECK(at(s, g, 0.0, 3000.0) == doctest::Approx(-15.0).epsilon(1e-15));
    // Normalised radius 0.5 along x: -7.5 (1 + cos(pi/2)).
    CHECK(at(s, g, -2000.0, 3000.0) == doctest::Approx(-7.5).epsilon(1e-12));
    // r = 1 along z, then beyond the bubble.
    CHECK(std::abs(at(s, g, 0.0, 5000.0)) <= 1e-14);
    CHECK(at(s, g, 1900.0, 5000.0) == 0.0);
    CHECK(at(s, g, -2000.0, 1100.0) == 0.0);
}

TEST_CASE("default bubble sits inside the grid")
{
    for (const auto& g : {rtb2d_grid(), rtb3d_grid()}) {
        const auto cfg = default_warm_bubble(g);
        const auto s = warm_bubble_theta_prime(cfg, g);
        CHECK(*std::max_element(s.values.begin(), s.values.end()) > 1.5);
        CHECK(*std::min_element(s.values.begin(), s.values.end()) == 0.0);
    }
    const auto paper = default_warm_bubble(rtb2d_grid(), true);
    CHECK(paper.center[0] == 5000.0);
    CHECK(paper.center[2] == 2000.0);
    CHECK(paper.r0 == 2000.0);
    const auto paper3 = default_warm_bubble(rtb3d_grid(), true);
    CHECK(paper3.center == std::array<double, 3>{1600.0, 1600.0, 500.0});
    CHECK(paper3.r0 == 500.0);
}

TEST_CASE("benchmark meshes")
{
    CHECK(rtb2d_grid().cell_count() == 80 * 160);
    CHECK(dc2d_grid().cell_count() == 256 * 64);
    CHECK(rtb3d_grid().cell_count() == 40 * 40 * 100);
    CHECK(dc2d_grid().nx * dc2d_grid().dx == 25600.0);
    CHECK(dc2d_grid().nz * dc2d_grid().dz == 6400.0);
}

TEST_CASE("thermodynamic relations")
{
    const PhysicalConstants c;
    CHECK(c.c_p == 1002.5);
    CHECK(exner_pressure(1e5) == 1.0);
    CHECK(exner_pressure(0.5e5) == doctest::Approx(std::pow(0.5, 287.0 / 1002.5)).epsilon(1e-15));
    CHECK(exner_pressure(0.5e5) == doctest::Approx(0.8199).epsilon(2e-4));
    CHECK(potential_temperature(250.0, 1e5) == 250.0);
    CHECK(potential_temperature(0.0, 0.5e5) == 0.0);
    CHECK(potential_temperature(250.0, 0.5e5) == doctest::Approx(304.8738443055126).epsilon(1e-13));
}

TEST_CASE("hydrostatic background")
{
    CHECK(hydrostatic_pressure(0.0, 300.0) == 1e5);
    CHECK(hydrostatic_pressure(2000.0, 300.0) == doctest::Approx(79012.49426233042).epsilon(1e-13));
    CHECK_THROWS_AS(hydrostatic_pressure(1002.5 * 300.0 / 9.80665, 300.0), DomainError);
    CHECK_THROWS_AS(hydrostatic_pressure(1e6, 300.0), DomainError);

    const double rho0 = hydrostatic_density(0.0, 300.0);
    CHECK(std::abs(rho0 - 1e5 / (287.0 * 300.0)) <= 1e-12 * rho0);
    CHECK(rho0 == doctest::Approx(1.161440).epsilon(1e-6));
    CHECK(hydrostatic_density(2000.0, 300.0) == doctest::Approx(0.9817043459713466).epsilon(1e-13));

    CHECK(initial_enthalpy(0.0, 300.0) == doctest::Approx(300750.0).epsilon(1e-15));
    // c_p theta0 (p/p_g)^(R/c_p) = c_p theta0 - g z.
    CHECK(initial_enthalpy(2000.0, 300.0) == doctest::Approx(281136.7).epsilon(1e-13));
}

TEST_CASE("synthetic dynamics: identity, exact shift and conservation")
{
    const GridSpec g{16, 1, 8, 10.0, 1.0, 10.0};
    WarmBubbleConfig b;
    b.center = {60.0, 0.0, 40.0};
    b.r0 = 35.0;
    const auto init = warm_bubble_theta_prime(b, g);

    SyntheticDynamicsConfig still;
    still.n_steps = 5;
    const auto same = synthetic_evolve(init, g, still);
    REQUIRE(same.size() == 6);
    for (const auto& s : same) CHECK(s.values == init.values);

    SyntheticDynamicsConfig shift;
    shift.velocity = {10.0, 0.0, 0.0};
    shift.dt = 1.0;
    shift.n_steps = 20;
    const auto moved = synthetic_evolve(init, g, shift);
    for (std::size_t n = 0; n < moved.size(); ++n) {
        CHECK(moved[n].time == doctest::Approx(static_cast<double>(n)));
        bool ok = true;
        for (std::size_t k = 0; k < g.nz; ++k) {
            for (std::size_t i = 0; i < g.nx; ++i) {
                const std::size_t src = (i + g.nx * 4 - n % g.nx) % g.nx;
                ok = ok && moved[n].values[g.index(i, 0, k)] == init.values[g.index(src, 0, k)];
            }
        }
        CHECK(ok);
    }

    SyntheticDynamicsConfig diffuse;
    diffuse.kappa = 20.0;
    diffuse.dt = 1.0;
    diffuse.n_steps = 200;
    const auto spread = synthetic_evolve(init, g, diffuse);
    const double total0 = std::accumulate(init.values.begin(), init.values.end(), 0.0);
    const auto& last = spread[spread.size() - 1].values;
    const double total1 = std::accumulate(last.begin(), last.end(), 0.0);
    CHECK(std::abs(total1 - total0) <= 1e-10 * std::abs(total0));
    CHECK(*std::max_element(last.begin(), last.end()) < *std::max_element(init.values.begin(), init.values.end()));
}

TEST_CASE("unstable steps are rejected")
{
    const GridSpec g{16, 1, 8, 10.0, 1.0, 10.0};
    SyntheticDynamicsConfig fast;
    fast.velocity = {11.0, 0.0, 0.0};
    fast.n_steps = 1;
    CHECK_THROWS_AS(check_stability(fast, g), ConfigError);
    SyntheticDynamicsConfig hot;
    hot.kappa = 60.0;
    hot.n_steps = 1;
    CHECK_THROWS_AS(check_stability(hot, g), ConfigError);
    SyntheticDynamicsConfig both;
    both.velocity = {6.0, 0.0, 6.0};
    both.n_steps = 1;
    CHECK_THROWS_AS(check_stability(both, g), ConfigError);
    SyntheticDynamicsConfig sheared;
    sheared.velocity = {5.0, 0.0, 0.0};
    sheared.shear = 0.2;
    sheared.n_steps = 1;
    CHECK_THROWS_AS(check_stability(sheared, g), ConfigError);
}
