#pragma once

// Convolutional autoencoder (CAE) and its extended variant (E-CAE): L
// resolution levels, each a stride-s convolution followed by n_f - 1
// same-size convolutions, a dense chain down to the latent vector, and a
// mirrored decoder built from transposed convolutions.

#include "rom/grid_data.hpp"
#include "rom/latent_io.hpp"
#include "rom/nn/activation.hpp"
#include "rom/nn/network.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace rom {

struct CaeConfig {
    std::size_t levels = 3;                 // L
    std::vector<std::size_t> filters{8, 8, 8}; // N_f^l, one per level
    std::size_t blocks_per_level = 1;       // n_f; 1 is the plain CAE
    std::size_t latent_dim = 4;             // N_d
    std::vector<std::size_t> dense_widths;  // hidden dense widths before the latent layer
    nn::Activation activation = nn::Activation::elu;
    std::size_t kernel = 3;
    std::size_t stride = 2;
    std::uint64_t seed = 0;
    std::size_t epochs = 100;
    std::size_t batch_size = 16;
    double lr = 1e-3;
    double lr_final = 0.0;  // geometric decay target for the last epoch; 0 keeps lr constant

    void validate() const;
};

/// Hidden dense widths used by the E-CAE when none are configured.
inline const std::vector<std::size_t> kDefaultDenseWidths{128, 32};

struct TrainingLog {
    std::vector<double> epoch_loss;
    double final_relative_l2 = 0.0; // mean percent over the training set
};

class CaeModel {
public:
    /// Throws ConfigError if any grid axis is too small for `levels` halvings.
    static CaeModel build(const CaeConfig& config, const GridSpec& grid);

    const CaeConfig& config() const { return config_; }
    const GridSpec& grid() const { return grid_; }
    const NormStats& norm() const { return norm_; }
    void set_norm(const NormStats& norm) { norm_ = norm; }
    double training_error() const { return training_error_; }

    /// Tensor sample shape [1, D?, H, W] the grid is mapped to.
    const nn::Shape& image_shape() const { return image_shape_; }
    /// Spatial extents per level, level 0 being the input image.
    const std::vector<nn::Shape>& level_shapes() const { return level_shapes_; }

    const nn::Network& encoder() const { return encoder_; }
    const nn::Network& decoder() const { return decoder_; }
    std::size_t parameter_count() const { return encoder_.parameter_count() + decoder_.parameter_count(); }

    /// Physical-units snapshot -> latent vector of length N_d.
    std::vector<double> encode(const Snapshot& snapshot) const;
    /// Latent vector -> physical-units snapshot on the model grid.
    Snapshot decode(std::span<const double> z, double time = 0.0) const;

    LatentTrajectory encode_set(const SnapshotSet& set) const;
    SnapshotSet decode_set(const LatentTrajectory& traj) const;

    /// Fits NormStats to `train_set`, then minimises the mean squared
    /// reconstruction error with mini-batch Adam for config.epochs epochs.
    TrainingLog train(const SnapshotSet& train_set);

    /// Mean relative L2 error (percent) of decode(encode(s)) over a set.
    double mean_reconstruction_error(const SnapshotSet& set) const;

    void save(const std::filesystem::path& path) const;
    static CaeModel load(const std::filesystem::path& path);

private:
    void check_grid(const GridSpec& grid) const;
    nn::Tensor to_batch(const SnapshotSet& set, std::span<const std::size_t> indices) const;
    std::string manifest() const;

    CaeConfig config_;
    GridSpec grid_;
    NormStats norm_{-1.0, 1.0};
    double training_error_ = 0.0;
    nn::Shape image_shape_;
    std::vector<nn::Shape> level_shapes_;
    nn::Network encoder_;
    nn::Network decoder_;
};

/// Image layout of a grid: [D, H, W] = [nz, ny, nx] in 3D, otherwise the two
/// non-singleton axes as [H, W] with x along W.
nn::Shape grid_image_shape(const GridSpec& grid);

} // namespace rom
