#pragma once

// Flat key = value configuration with section prefixes, e.g.
//
//   preset = rtb2d
//   cae.filters = 256,128,64,32   # per-level filter counts
//   esn.alpha = 0.0095
//
// A `preset` line (or the --preset flag) selects the base configuration; all
// other lines are applied on top of it in file order.

#include "rom/autoencoder.hpp"
#include "rom/benchmarks.hpp"
#include "rom/grid_data.hpp"
#include "rom/reservoir.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rom {

enum class Benchmark { warm_bubble, density_current, constant };

struct DataConfig {
    bool from_file = false;
    std::filesystem::path path;
    Benchmark benchmark = Benchmark::warm_bubble;
    GridSpec grid = bench::rtb2d_grid();
    bool paper_center = false;
    double constant_value = 1.0;
    // Unset values fall back to the benchmark defaults for the configured grid.
    std::optional<double> center_x, center_y, center_z, radius, amplitude;
    bench::DensityCurrentConfig density_current;
    bench::SyntheticDynamicsConfig dynamics;
};

struct PipelineConfig {
    std::string preset;
    DataConfig data;
    CaeConfig cae;
    EsnConfig esn;
    double train_fraction = 0.8;
    std::filesystem::path out_dir = "rom_out";
    std::uint64_t seed = 0;
    /// Map each latent component to [-1, 1] (training range) before the reservoir.
    bool scale_latents = true;

    bool cae_seed_set = false;
    bool esn_seed_set = false;

    /// Sets the global seed; component seeds that were not given explicitly
    /// follow as cae.seed = seed and esn.seed = seed + 1.
    void set_seed(std::uint64_t s);

    void validate() const;
};

/// Names accepted by preset_config.
const std::vector<std::string>& preset_names();

/// Benchmark meshes and network/reservoir hyperparameters of the three
/// reference cases: rtb2d, dc2d, rtb3d.
PipelineConfig preset_config(std::string_view name);

/// Applies one key = value setting. Throws ConfigError on unknown keys or
/// malformed values.
void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value);

PipelineConfig parse_config(std::string_view text, const std::optional<std::string>& preset_override = {});
PipelineConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& preset_override = {});

/// Generates the configured synthetic series or loads the configured file.
SnapshotSet acquire_snapshots(const DataConfig& data);

} // namespace rom
