#pragma once

// Structured-grid scalar snapshots, normalisation, splitting and file I/O.

#include <array>
#include <cstddef>
#include <filesystem>
#include <utility>
#include <vector>

namespace rom {

/// Uniform structured grid. Cell (i, j, k) has its center at
/// (x0 + (i + 1/2) dx, y0 + (j + 1/2) dy, z0 + (k + 1/2) dz).
struct GridSpec {
    std::size_t nx = 1, ny = 1, nz = 1;
    double dx = 1.0, dy = 1.0, dz = 1.0;
    double x0 = 0.0, y0 = 0.0, z0 = 0.0;

    std::size_t cell_count() const { return nx * ny * nz; }

    /// Flat index, x fastest then y then z.
    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const { return i + nx * (j + ny * k); }

    std::array<double, 3> cell_center(std::size_t i, std::size_t j, std::size_t k) const
    {
        return {x0 + (static_cast<double>(i) + 0.5) * dx,
                y0 + (static_cast<double>(j) + 0.5) * dy,
                z0 + (static_cast<double>(k) + 0.5) * dz};
    }

    /// Throws ConfigError on zero extents or nonpositive cell sizes.
    void validate() const;

    bool operator==(const GridSpec&) const = default;
};

struct Snapshot {
    std::vector<double> values;
    double time = 0.0;
};

/// Time-ordered snapshots on one grid with uniform spacing dt.
class SnapshotSet {
public:
    SnapshotSet() = default;

    /// Validates cell counts, finiteness and the uniform spacing
    /// |t[i+1] - t[i] - dt| <= 1e-9 dt.
    SnapshotSet(GridSpec grid, double dt, std::vector<Snapshot> snapshots);

    const GridSpec& grid() const { return grid_; }
    double dt() const { return dt_; }
    std::size_t size() const { return snapshots_.size(); }
    bool empty() const { return snapshots_.empty(); }
    const Snapshot& operator[](std::size_t i) const { return snapshots_[i]; }
    const std::vector<Snapshot>& snapshots() const { return snapshots_; }

    auto begin() const { return snapshots_.begin(); }
    auto end() const { return snapshots_.end(); }

    /// Snapshots [first, first + count) as a new set.
    SnapshotSet slice(std::size_t first, std::size_t count) const;

private:
    GridSpec grid_{};
    double dt_ = 1.0;
    std::vector<Snapshot> snapshots_;
};

struct NormStats {
    double vmin = 0.0;
    double vmax = 0.0;
};

/// Field-wide min/max over every value of every snapshot.
NormStats compute_norm_stats(const SnapshotSet& set);

/// Number of training snapshots for a chronological split: floor(fraction * total).
std::size_t split_count(std::size_t total, double train_fraction);

/// Earliest floor(fraction * N) snapshots for training, the rest for validation.
std::pair<SnapshotSet, SnapshotSet> split(const SnapshotSet& set, double train_fraction);

/// Maps values to [-1, 1]; a degenerate range maps everything to 0.
double normalize_value(double v, const NormStats& stats);
double denormalize_value(double v, const NormStats& stats);

Snapshot normalize(const Snapshot& s, const NormStats& stats);
Snapshot denormalize(const Snapshot& s, const NormStats& stats);
SnapshotSet normalize(const SnapshotSet& set, const NormStats& stats);
SnapshotSet denormalize(const SnapshotSet& set, const NormStats& stats);

/// Binary "ROMS" v1 format, little endian.
void save_snapshots(const SnapshotSet& set, const std::filesystem::path& path);
SnapshotSet load_snapshots(const std::filesystem::path& path);

/// One row per cell per time: t,x,y,z,value.
void export_csv(const SnapshotSet& set, const std::filesystem::path& path);

/// 100 * ||truth - approx||_2 / ||truth||_2.
double relative_l2_error(const Snapshot& truth, const Snapshot& approx);

} // namespace rom
