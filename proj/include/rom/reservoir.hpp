#pragma once

// Leaky echo-state network over latent trajectories.
//
//   h(t_n)   = (1 - alpha) h(t_{n-1}) + alpha tanh(W_in z(t_n) + W_res h(t_{n-1}))
//   z(t_n+1) = W_out [z(t_n); h(t_n)]
//
// W_in and W_res are random and fixed; only W_out is fitted, by ridge
// regression on teacher-forced states.

#include "rom/latent_io.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>

namespace rom {

struct EsnConfig {
    std::size_t reservoir_size = 100; // N_h
    double alpha = 0.5;               // leak rate
    double lambda = 1e-6;             // ridge regulariser
    double spectral_radius = 0.9;
    double connectivity = 0.1;        // fraction of nonzero W_res entries
    double input_scale = 1.0;
    std::size_t washout = 0;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Columns n = washout .. T-2 of [z_n; h_n] and the matching targets z_{n+1}.
struct DesignMatrices {
    Eigen::MatrixXd X; // (N_d + N_h) x N
    Eigen::MatrixXd Y; // N_d x N
};

struct HarvestResult {
    std::vector<Eigen::VectorXd> states; // h(t_n) for every input n
    DesignMatrices design;
};

struct SpectralEstimate {
    double radius = 0.0;
    std::size_t iterations = 0;
};

/// Largest eigenvalue modulus by block power iteration with Rayleigh-Ritz
/// extraction, so complex-conjugate dominant pairs converge as well. Throws
/// NumericalError if the estimate has not settled after max_iterations.
SpectralEstimate spectral_radius(const Eigen::MatrixXd& m, std::size_t max_iterations = 10000, double tol = 1e-12);

/// Scales m so its spectral radius equals target.
Eigen::MatrixXd rescale_spectral_radius(const Eigen::MatrixXd& m, double target);

/// Solves W_out (X X^T + lambda I) = Y X^T through an LDL^T factorisation of
/// the symmetric Gram system. Throws NumericalError when lambda = 0 and X X^T
/// is rank deficient.
Eigen::MatrixXd train_readout(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lambda);

class EsnModel {
public:
    EsnModel() = default;

    /// Random W_in (uniform +-input_scale) and sparse W_res (uniform +-1,
    /// rescaled to the configured spectral radius). Deterministic in config.seed.
    static EsnModel init(const EsnConfig& config, std::size_t latent_dim);

    /// Adopts explicit matrices, e.g. for tests or checkpoint loading.
    EsnModel(EsnConfig config, Eigen::MatrixXd w_in, Eigen::MatrixXd w_res,
             std::optional<Eigen::MatrixXd> w_out = std::nullopt);

    const EsnConfig& config() const { return config_; }
    std::size_t latent_dim() const { return static_cast<std::size_t>(w_in_.cols()); }
    std::size_t reservoir_size() const { return static_cast<std::size_t>(w_in_.rows()); }
    const Eigen::MatrixXd& w_in() const { return w_in_; }
    const Eigen::MatrixXd& w_res() const { return w_res_; }
    const std::optional<Eigen::MatrixXd>& w_out() const { return w_out_; }
    bool trained() const { return w_out_.has_value(); }

    Eigen::VectorXd zero_state() const { return Eigen::VectorXd::Zero(w_in_.rows()); }

    /// One step of the leaky state recursion.
    Eigen::VectorXd update_state(const Eigen::VectorXd& h, const Eigen::VectorXd& z, double alpha) const;

    /// Teacher-forced pass over the trajectory starting from prior state h0.
    HarvestResult collect_states(const LatentTrajectory& latents, double alpha, const Eigen::VectorXd& h0) const;
    HarvestResult collect_states(const LatentTrajectory& latents) const;

    /// Harvests states from a zero prior and fits W_out with config.lambda.
    void train(const LatentTrajectory& latents);
    void set_readout(Eigen::MatrixXd w_out);

    struct Step {
        Eigen::VectorXd z_next;
        Eigen::VectorXd state;
    };

    /// Updates the state with z, then applies W_out to [z; new state].
    Step predict_next(const Eigen::VectorXd& h, const Eigen::VectorXd& z) const;

    /// One-step predictions under teacher forcing: entry n predicts z_{n+1}
    /// from the true z_n. Times are shifted forward by one step.
    LatentTrajectory teacher_forced(const LatentTrajectory& latents) const;

    /// Drives the reservoir through the warmup, then feeds predictions back for
    /// n_steps. Returns the predicted points only, at times after the warmup.
    LatentTrajectory forecast(const LatentTrajectory& warmup, std::size_t n_steps) const;

    /// "ROME" binary checkpoint.
    void save(const std::filesystem::path& path) const;
    static EsnModel load(const std::filesystem::path& path);

private:
    void require_trained(const char* what) const;

    EsnConfig config_;
    Eigen::MatrixXd w_in_;
    Eigen::MatrixXd w_res_;
    std::optional<Eigen::MatrixXd> w_out_;
};

} // namespace rom
