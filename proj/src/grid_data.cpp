#include "rom/grid_data.hpp"

#include "rom/binary_io.hpp"
#include "rom/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace rom {

namespace {

constexpr std::uint32_t kSnapshotVersion = 1;

} // namespace

void GridSpec::validate() const
{
    if (nx == 0 || ny == 0 || nz == 0) {
        throw ConfigError("grid extents must be positive");
    }
    if (!(dx > 0.0) || !(dy > 0.0) || !(dz > 0.0)) {
        throw ConfigError("grid cell sizes must be positive");
    }
    if (!std::isfinite(x0) || !std::isfinite(y0) || !std::isfinite(z0)) {
        throw ConfigError("grid origin must be finite");
    }
}

SnapshotSet::SnapshotSet(GridSpec grid, double dt, std::vector<Snapshot> snapshots)
    : grid_{grid}, dt_{dt}, snapshots_{std::move(snapshots)}
{
    grid_.validate();
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
        throw ConfigError("snapshot spacing dt must be positive and finite");
    }
    const auto n = grid_.cell_count();
    for (std::size_t i = 0; i < snapshots_.size(); ++i) {
        const auto& s = snapshots_[i];
        if (s.values.size() != n) {
            throw ShapeError("snapshot " + std::to_string(i) + " has " + std::to_string(s.values.size()) +
                             " values, grid has " + std::to_string(n) + " cells");
        }
        if (!std::isfinite(s.time)) {
            throw DomainError("snapshot " + std::to_string(i) + " has a non-finite time");
        }
        if (!std::all_of(s.values.begin(), s.values.end(), [](double v) { return std::isfinite(v); })) {
            throw DomainError("snapshot " + std::to_string(i) + " contains non-finite values");
        }
        if (i > 0) {
            const double step = s.time - snapshots_[i - 1].time;
            if (!(step > 0.0) || std::abs(step - dt_) > 1e-9 * dt_) {
                throw DomainError("snapshot times are not uniformly spaced by dt at index " + std::to_string(i));
            }
        }
    }
}

SnapshotSet SnapshotSet::slice(std::size_t first, std::size_t count) const
{
    if (first + count > snapshots_.size()) {
        throw ShapeError("slice out of range");
    }
    std::vector<Snapshot> part(snapshots_.begin() + static_cast<std::ptrdiff_t>(first),
                               snapshots_.begin() + static_cast<std::ptrdiff_t>(first + count));
    return SnapshotSet(grid_, dt_, std::move(part));
}

NormStats compute_norm_stats(const SnapshotSet& set)
{
    if (set.empty()) {
        throw DomainError("cannot compute normalisation statistics of an empty set");
    }
    NormStats stats{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto& s : set) {
        auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
        stats.vmin = std::min(stats.vmin, *lo);
        stats.vmax = std::max(stats.vmax, *hi);
    }
    return stats;
}

std::size_t split_count(std::size_t total, double train_fraction)
{
    if (total == 0) {
        throw DomainError("cannot split an empty snapshot set");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw DomainError("train fraction must lie in (0, 1)");
    }
    // The small offset absorbs representation error in fractions like 0.6.
    const auto n_train =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(total) + 1e-9));
    if (n_train < 1 || n_train >= total) {
        throw DomainError("split of " + std::to_string(total) + " snapshots at fraction " +
                          std::to_string(train_fraction) + " leaves an empty side");
    }
    return n_train;
}

std::pair<SnapshotSet, SnapshotSet> split(const SnapshotSet& set, double train_fraction)
{
    const auto n_train = split_count(set.size(), train_fraction);
    return {set.slice(0, n_train), set.slice(n_train, set.size() - n_train)};
}

namespace {

void check_stats(const NormStats& stats)
{
    if (!std::isfinite(stats.vmin) || !std::isfinite(stats.vmax)) {
        throw DomainError("normalisation statistics must be finite");
    }
    if (stats.vmin > stats.vmax) {
        throw DomainError("normalisation statistics have vmin > vmax");
    }
}

} // namespace

double normalize_value(double v, const NormStats& stats)
{
    if (stats.vmax == stats.vmin) return 0.0;
    return 2.0 * (v - stats.vmin) / (stats.vmax - stats.vmin) - 1.0;
}

double denormalize_value(double v, const NormStats& stats)
{
    if (stats.vmax == stats.vmin) return stats.vmin;
    return stats.vmin + 0.5 * (v + 1.0) * (stats.vmax - stats.vmin);
}

Snapshot normalize(const Snapshot& s, const NormStats& stats)
{
    check_stats(stats);
    Snapshot out{s.values, s.time};
    for (double& v : out.values) v = normalize_value(v, stats);
    return out;
}

Snapshot denormalize(const Snapshot& s, const NormStats& stats)
{
    check_stats(stats);
    Snapshot out{s.values, s.time};
    for (double& v : out.values) v = denormalize_value(v, stats);
    return out;
}

SnapshotSet normalize(const SnapshotSet& set, const NormStats& stats)
{
    std::vector<Snapshot> out;
    out.reserve(set.size());
    for (const auto& s : set) out.push_back(normalize(s, stats));
    return SnapshotSet(set.grid(), set.dt(), std::move(out));
}

SnapshotSet denormalize(const SnapshotSet& set, const NormStats& stats)
{
    std::vector<Snapshot> out;
    out.reserve(set.size());
    for (const auto& s : set) out.push_back(denormalize(s, stats));
    return SnapshotSet(set.grid(), set.dt(), std::move(out));
}

void save_snapshots(const SnapshotSet& set, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");

    const auto& g = set.grid();
    io::Writer w(os);
    w.magic("ROMS");
    w.u32(kSnapshotVersion);
    w.u32(static_cast<std::uint32_t>(g.nx));
    w.u32(static_cast<std::uint32_t>(g.ny));
    w.u32(static_cast<std::uint32_t>(g.nz));
    w.u32(static_cast<std::uint32_t>(set.size()));
    for (double v : {g.dx, g.dy, g.dz, g.x0, g.y0, g.z0, set.dt()}) w.f64(v);
    w.f64(set.empty() ? 0.0 : set[0].time);
    for (const auto& s : set) w.f64s(s.values);
    w.check(path.string());
}

SnapshotSet load_snapshots(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());

    io::Reader r(is, path.string());
    r.expect_magic("ROMS");
    const auto version = r.u32("version");
    if (version != kSnapshotVersion) {
        throw FormatError(path.string() + ": unsupported snapshot version " + std::to_string(version));
    }
    GridSpec g;
    g.nx = r.u32("nx");
    g.ny = r.u32("ny");
    g.nz = r.u32("nz");
    const std::size_t nt = r.u32("nt");
    g.dx = r.f64("dx");
    g.dy = r.f64("dy");
    g.dz = r.f64("dz");
    g.x0 = r.f64("x0");
    g.y0 = r.f64("y0");
    g.z0 = r.f64("z0");
    const double dt = r.f64("dt");
    const double t_start = r.f64("t_start");
    try {
        g.validate();
    } catch (const ConfigError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }

    std::vector<Snapshot> snaps(nt);
    for (std::size_t i = 0; i < nt; ++i) {
        snaps[i].time = t_start + static_cast<double>(i) * dt;
        snaps[i].values.resize(g.cell_count());
        r.f64s(snaps[i].values, "snapshot values");
    }
    r.expect_end();
    return SnapshotSet(g, dt, std::move(snaps));
}

void export_csv(const SnapshotSet& set, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << std::setprecision(17);
    os << "t,x,y,z,value\n";
    const auto& g = set.grid();
    for (const auto& s : set) {
        for (std::size_t k = 0; k < g.nz; ++k) {
            for (std::size_t j = 0; j < g.ny; ++j) {
                for (std::size_t i = 0; i < g.nx; ++i) {
                    auto c = g.cell_center(i, j, k);
                    os << s.time << ',' << c[0] << ',' << c[1] << ',' << c[2] << ',' << s.values[g.index(i, j, k)]
                       << '\n';
                }
            }
        }
    }
    if (!os) throw IoError("write failed: " + path.string());
}

double relative_l2_error(const Snapshot& truth, const Snapshot& approx)
{
    if (truth.values.size() != approx.values.size()) {
        throw ShapeError("relative L2 error: fields have " + std::to_string(truth.values.size()) + " and " +
                         std::to_string(approx.values.size()) + " cells");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < truth.values.size(); ++i) {
        const double d = truth.values[i] - approx.values[i];
        num += d * d;
        den += truth.values[i] * truth.values[i];
    }
    if (den == 0.0) {
        throw DomainError("relative L2 error undefined: reference field has zero norm");
    }
    return 100.0 * std::sqrt(num) / std::sqrt(den);
}

} // namespace rom
