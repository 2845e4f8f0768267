#include "rom/benchmarks.hpp"

#include "rom/error.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rom::bench {

void PhysicalConstants::validate() const
{
    if (!(R > 0 && c_v > 0 && c_p > 0 && p_g > 0 && g > 0 && theta_ref > 0)) {
        throw ConfigError("physical constants must be positive");
    }
    if (c_p != R + c_v) {
        throw ConfigError("c_p must equal R + c_v");
    }
}

GridSpec rtb2d_grid()
{
    // [0, 5000] x [0, 10000] m at 62.5 m
    return GridSpec{80, 1, 160, 62.5, 62.5, 62.5, 0.0, 0.0, 0.0};
}

GridSpec dc2d_grid()
{
    // [0, 25600] x [0, 6400] m at 100 m
    return GridSpec{256, 1, 64, 100.0, 100.0, 100.0, 0.0, 0.0, 0.0};
}

GridSpec rtb3d_grid()
{
    // [0, 1600] x [0, 1600] x [0, 4000] m at 40 m
    return GridSpec{40, 40, 100, 40.0, 40.0, 40.0, 0.0, 0.0, 0.0};
}

WarmBubbleConfig default_warm_bubble(const GridSpec& grid, bool paper_center)
{
    WarmBubbleConfig cfg;
    const bool is3d = grid.ny > 1 && grid.nz > 1;
    const double mid_x = grid.x0 + 0.5 * static_cast<double>(grid.nx) * grid.dx;
    const double mid_y = grid.y0 + 0.5 * static_cast<double>(grid.ny) * grid.dy;
    if (is3d) {
        cfg.r0 = 500.0;
        cfg.center = paper_center ? std::array{1600.0, 1600.0, 500.0} : std::array{mid_x, mid_y, 500.0};
    } else {
        cfg.r0 = 2000.0;
        cfg.center = paper_center ? std::array{5000.0, 0.0, 2000.0} : std::array{mid_x, 0.0, 2000.0};
    }
    return cfg;
}

Snapshot warm_bubble_theta_prime(const WarmBubbleConfig& cfg, const GridSpec& grid)
{
    grid.validate();
    if (!(cfg.r0 > 0.0)) throw ConfigError("warm bubble radius r0 must be positive");

    Snapshot s;
    s.values.resize(grid.cell_count());
    const bool use_y = grid.ny > 1;
    for (std::size_t k = 0; k < grid.nz; ++k) {
        for (std::size_t j = 0; j < grid.ny; ++j) {
            for (std::size_t i = 0; i < grid.nx; ++i) {
                const auto c = grid.cell_center(i, j, k);
                const double ex = c[0] - cfg.center[0];
                const double ey = use_y ? c[1] - cfg.center[1] : 0.0;
                const double ez = c[2] - cfg.center[2];
                const double r = std::sqrt(ex * ex + ey * ey + ez * ez);
                s.values[grid.index(i, j, k)] = r <= cfg.r0 ? cfg.amplitude * (1.0 - r / cfg.r0) : 0.0;
            }
        }
    }
    return s;
}

Snapshot density_current_theta_prime(const DensityCurrentConfig& cfg, const GridSpec& grid)
{
    grid.validate();
    if (!(cfg.radii[0] > 0.0 && cfg.radii[1] > 0.0)) {
        throw ConfigError("density current radii must be positive");
    }

    Snapshot s;
    s.values.resize(grid.cell_count());
    for (std::size_t k = 0; k < grid.nz; ++k) {
        for (std::size_t j = 0; j < grid.ny; ++j) {
            for (std::size_t i = 0; i < grid.nx; ++i) {
                const auto c = grid.cell_center(i, j, k);
                const double ex = (c[0] - cfg.center[0]) / cfg.radii[0];
                const double ez = (c[2] - cfg.center[1]) / cfg.radii[1];
                const double r = std::sqrt(ex * ex + ez * ez);
                s.values[grid.index(i, j, k)] =
                    r <= 1.0 ? -cfg.theta_s * (1.0 + std::cos(std::numbers::pi * r)) : 0.0;
            }
        }
    }
    return s;
}

double exner_pressure(double p, const PhysicalConstants& c)
{
    if (!(p > 0.0)) throw DomainError("Exner pressure requires p > 0");
    return std::pow(p / c.p_g, c.R / c.c_p);
}

double potential_temperature(double T, double p, const PhysicalConstants& c)
{
    return T / exner_pressure(p, c);
}

double hydrostatic_pressure(double z, double theta0, const PhysicalConstants& c)
{
    const double base = 1.0 - c.g * z / (c.c_p * theta0);
    if (!(base > 0.0)) {
        throw DomainError("hydrostatic pressure undefined at z = " + std::to_string(z) +
                          " m (above c_p theta0 / g)");
    }
    return c.p_g * std::pow(base, c.c_p / c.R);
}

double hydrostatic_density(double z, double theta0, const PhysicalConstants& c)
{
    const double p = hydrostatic_pressure(z, theta0, c);
    return c.p_g / (c.R * theta0) * std::pow(p / c.p_g, c.c_v / c.c_p);
}

double initial_enthalpy(double z, double theta0, const PhysicalConstants& c)
{
    const double p = hydrostatic_pressure(z, theta0, c);
    return c.c_p * theta0 * std::pow(p / c.p_g, c.R / c.c_p);
}

namespace {

// Axis used for the shear profile: z when the grid has vertical extent, else y.
int shear_axis(const GridSpec& grid) { return grid.nz > 1 ? 2 : 1; }

double axis_coord(const GridSpec& grid, int axis, std::size_t idx)
{
    const double h = axis == 1 ? grid.dy : grid.dz;
    const double o = axis == 1 ? grid.y0 : grid.z0;
    return o + (static_cast<double>(idx) + 0.5) * h;
}

double axis_mid(const GridSpec& grid, int axis)
{
    return axis == 1 ? grid.y0 + 0.5 * static_cast<double>(grid.ny) * grid.dy
                     : grid.z0 + 0.5 * static_cast<double>(grid.nz) * grid.dz;
}

} // namespace

void check_stability(const SyntheticDynamicsConfig& cfg, const GridSpec& grid)
{
    grid.validate();
    if (!(cfg.dt > 0.0)) throw ConfigError("synthetic dynamics dt must be positive");
    if (!(cfg.kappa >= 0.0)) throw ConfigError("diffusivity must be nonnegative");

    const std::array<std::size_t, 3> n{grid.nx, grid.ny, grid.nz};
    const std::array<double, 3> h{grid.dx, grid.dy, grid.dz};
    // Largest |u| over the sheared profile.
    double umax = std::abs(cfg.velocity[0]);
    if (cfg.shear != 0.0) {
        const int ax = shear_axis(grid);
        const std::size_t last = ax == 1 ? grid.ny - 1 : grid.nz - 1;
        const double mid = axis_mid(grid, ax);
        umax = std::max(std::abs(cfg.velocity[0] + cfg.shear * (axis_coord(grid, ax, 0) - mid)),
                        std::abs(cfg.velocity[0] + cfg.shear * (axis_coord(grid, ax, last) - mid)));
    }

    double total = 0.0;
    for (int d = 0; d < 3; ++d) {
        if (n[d] == 1) continue;
        const double courant = (d == 0 ? umax : std::abs(cfg.velocity[d])) * cfg.dt / h[d];
        const double diffusion = cfg.kappa * cfg.dt / (h[d] * h[d]);
        if (courant > 1.0) {
            throw ConfigError("CFL violation: Courant number " + std::to_string(courant) + " on axis " +
                              std::to_string(d) + " exceeds 1");
        }
        if (diffusion > 0.5) {
            throw ConfigError("CFL violation: diffusion number " + std::to_string(diffusion) + " on axis " +
                              std::to_string(d) + " exceeds 0.5");
        }
        total += courant + 2.0 * diffusion;
    }
    if (total > 1.0 + 1e-12) {
        throw ConfigError("CFL violation: combined advection-diffusion number " + std::to_string(total) +
                          " exceeds 1");
    }
}

SnapshotSet synthetic_evolve(const Snapshot& initial, const GridSpec& grid, const SyntheticDynamicsConfig& cfg)
{
    check_stability(cfg, grid);
    if (initial.values.size() != grid.cell_count()) {
        throw ShapeError("initial field does not match the grid");
    }

    const std::size_t nx = grid.nx, ny = grid.ny, nz = grid.nz;
    const std::array<double, 3> h{grid.dx, grid.dy, grid.dz};
    const std::array<std::size_t, 3> n{nx, ny, nz};
    const std::array<std::size_t, 3> stride{1, nx, nx * ny};
    const int sax = shear_axis(grid);
    const double mid = axis_mid(grid, sax);

    std::vector<Snapshot> out;
    out.reserve(cfg.n_steps + 1);
    out.push_back(initial);

    std::vector<double> cur = initial.values;
    std::vector<double> next(cur.size());
    for (std::size_t step = 1; step <= cfg.n_steps; ++step) {
        for (std::size_t k = 0; k < nz; ++k) {
            for (std::size_t j = 0; j < ny; ++j) {
                const double u = cfg.velocity[0] +
                                 (cfg.shear != 0.0 ? cfg.shear * (axis_coord(grid, sax, sax == 1 ? j : k) - mid) : 0.0);
                const std::array<double, 3> vel{u, cfg.velocity[1], cfg.velocity[2]};
                for (std::size_t i = 0; i < nx; ++i) {
                    const std::array<std::size_t, 3> pos{i, j, k};
                    const std::size_t c = grid.index(i, j, k);
                    // Convex-combination form of the upwind/centred update.
                    double self = 1.0;
                    double acc = 0.0;
                    for (int d = 0; d < 3; ++d) {
                        if (n[d] == 1) continue;
                        const std::size_t lo = pos[d] == 0 ? c + (n[d] - 1) * stride[d] : c - stride[d];
                        const std::size_t hi = pos[d] == n[d] - 1 ? c - (n[d] - 1) * stride[d] : c + stride[d];
                        const double courant = vel[d] * cfg.dt / h[d];
                        const double diffusion = cfg.kappa * cfg.dt / (h[d] * h[d]);
                        if (courant > 0.0) {
                            acc += courant * cur[lo];
                        } else if (courant < 0.0) {
                            acc -= courant * cur[hi];
                        }
                        if (diffusion > 0.0) {
                            acc += diffusion * (cur[lo] + cur[hi]);
                        }
                        self -= std::abs(courant) + 2.0 * diffusion;
                    }
                    next[c] = self * cur[c] + acc;
                }
            }
        }
        std::swap(cur, next);
        out.push_back(Snapshot{cur, initial.time + static_cast<double>(step) * cfg.dt});
    }
    return SnapshotSet(grid, cfg.dt, std::move(out));
}

} // namespace rom::bench
