#include "rom/reservoir.hpp"

#include "rom/binary_io.hpp"
#include "rom/error.hpp"
#include "rom/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <fstream>

namespace rom {

void EsnConfig::validate() const
{
    if (reservoir_size < 1) throw ConfigError("esn.reservoir_size must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("esn.alpha must lie in [0, 1]");
    if (!(lambda >= 0.0)) throw ConfigError("esn.lambda must be >= 0");
    if (!(spectral_radius > 0.0)) throw ConfigError("esn.spectral_radius must be positive");
    if (!(connectivity > 0.0 && connectivity <= 1.0)) throw ConfigError("esn.connectivity must lie in (0, 1]");
    if (!(input_scale > 0.0)) throw ConfigError("esn.input_scale must be positive");
}

SpectralEstimate spectral_radius(const Eigen::MatrixXd& m, std::size_t max_iterations, double tol)
{
    if (m.rows() != m.cols() || m.rows() == 0) throw ShapeError("spectral radius needs a nonempty square matrix");
    const Eigen::Index n = m.rows();
    const Eigen::Index p = std::min<Eigen::Index>(n, 12);

    Rng rng(0x5eed);
    Eigen::MatrixXd q(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) q(i, j) = rng.symmetric(1.0);
    }
    auto orthonormalize = [&](const Eigen::MatrixXd& z) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(z);
        return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(n, p));
    };
    q = orthonormalize(q);

    double previous = -1.0;
    int settled = 0;
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        const Eigen::MatrixXd z = m * q;
        if (z.norm() == 0.0) return {0.0, it};
        // Ritz values of the projection onto the current subspace.
        const Eigen::MatrixXd h = q.transpose() * z;
        Eigen::EigenSolver<Eigen::MatrixXd> es(h, false);
        const double estimate = es.eigenvalues().cwiseAbs().maxCoeff();
        if (previous >= 0.0 && std::abs(estimate - previous) <= tol * estimate) {
            if (++settled >= 3) return {estimate, it};
        } else {
            settled = 0;
        }
        previous = estimate;
        q = orthonormalize(z);
    }
    throw NumericalError("spectral radius power iteration did not converge in " + std::to_string(max_iterations) +
                         " iterations");
}

Eigen::MatrixXd rescale_spectral_radius(const Eigen::MatrixXd& m, double target)
{
    const auto est = spectral_radius(m);
    if (!(est.radius > 0.0)) throw NumericalError("cannot rescale a matrix with zero spectral radius");
    return m * (target / est.radius);
}

Eigen::MatrixXd train_readout(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, double lambda)
{
    if (X.cols() != Y.cols()) {
        throw ShapeError("design and target matrices have " + std::to_string(X.cols()) + " and " +
                         std::to_string(Y.cols()) + " columns");
    }
    if (X.cols() == 0) throw ShapeError("readout training needs at least one column");
    if (!(lambda >= 0.0)) throw DomainError("ridge parameter must be >= 0");

    const Eigen::Index n = X.rows();
    Eigen::MatrixXd gram = X * X.transpose();
    gram.diagonal().array() += lambda;
    const Eigen::MatrixXd rhs = X * Y.transpose();

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd d = ldlt.vectorD();
    const double dmax = d.cwiseAbs().maxCoeff();
    const double cutoff = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * dmax;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < d.size(); ++i) rank += std::abs(d(i)) > cutoff ? 1 : 0;
    if (ldlt.info() != Eigen::Success || rank < n || dmax == 0.0) {
        throw NumericalError("ridge system X X^T + lambda I is singular: numerical rank " + std::to_string(rank) +
                             " of " + std::to_string(n) + " (lambda = " + std::to_string(lambda) + ")");
    }

    Eigen::MatrixXd wt = ldlt.solve(rhs);
    // One step of iterative refinement.
    wt += ldlt.solve(rhs - gram * wt);
    return wt.transpose();
}

EsnModel::EsnModel(EsnConfig config, Eigen::MatrixXd w_in, Eigen::MatrixXd w_res, std::optional<Eigen::MatrixXd> w_out)
    : config_{config}, w_in_{std::move(w_in)}, w_res_{std::move(w_res)}, w_out_{std::move(w_out)}
{
    if (w_in_.rows() == 0 || w_in_.cols() == 0) throw ShapeError("W_in must be nonempty");
    if (w_res_.rows() != w_in_.rows() || w_res_.cols() != w_in_.rows()) {
        throw ShapeError("W_res must be N_h x N_h with N_h = rows of W_in");
    }
    if (w_out_ && (w_out_->rows() != w_in_.cols() || w_out_->cols() != w_in_.cols() + w_in_.rows())) {
        throw ShapeError("W_out must be N_d x (N_d + N_h)");
    }
    config_.reservoir_size = static_cast<std::size_t>(w_in_.rows());
}

EsnModel EsnModel::init(const EsnConfig& config, std::size_t latent_dim)
{
    config.validate();
    if (latent_dim < 1) throw ConfigError("latent dimension must be >= 1");
    const auto nh = static_cast<Eigen::Index>(config.reservoir_size);
    const auto nd = static_cast<Eigen::Index>(latent_dim);

    Rng rng(config.seed);
    Eigen::MatrixXd w_in(nh, nd);
    for (Eigen::Index i = 0; i < nh; ++i) {
        for (Eigen::Index j = 0; j < nd; ++j) w_in(i, j) = rng.symmetric(config.input_scale);
    }
    Eigen::MatrixXd w_res = Eigen::MatrixXd::Zero(nh, nh);
    for (Eigen::Index i = 0; i < nh; ++i) {
        for (Eigen::Index j = 0; j < nh; ++j) {
            const double keep = rng.uniform();
            const double value = rng.symmetric(1.0);
            if (keep < config.connectivity) w_res(i, j) = value;
        }
    }
    return EsnModel(config, std::move(w_in), rescale_spectral_radius(w_res, config.spectral_radius));
}

Eigen::VectorXd EsnModel::update_state(const Eigen::VectorXd& h, const Eigen::VectorXd& z, double alpha) const
{
    if (h.size() != w_res_.rows() || z.size() != w_in_.cols()) {
        throw ShapeError("update_state: state has length " + std::to_string(h.size()) + " (expected " +
                         std::to_string(w_res_.rows()) + "), input " + std::to_string(z.size()) + " (expected " +
                         std::to_string(w_in_.cols()) + ")");
    }
    const Eigen::VectorXd pre = w_in_ * z + w_res_ * h;
    return (1.0 - alpha) * h + alpha * pre.array().tanh().matrix();
}

HarvestResult EsnModel::collect_states(const LatentTrajectory& latents, double alpha, const Eigen::VectorXd& h0) const
{
    latents.validate();
    if (latents.size() < 2) throw DomainError("state harvesting needs a trajectory of length >= 2");
    if (latents.dim() != latent_dim()) {
        throw ShapeError("trajectory latent dimension " + std::to_string(latents.dim()) + " does not match model " +
                         std::to_string(latent_dim()));
    }
    const std::size_t washout = config_.washout;
    if (washout + 1 >= latents.size()) throw DomainError("washout leaves no training columns");

    const auto nd = static_cast<Eigen::Index>(latent_dim());
    const auto nh = static_cast<Eigen::Index>(reservoir_size());
    const auto cols = static_cast<Eigen::Index>(latents.size() - 1 - washout);

    HarvestResult r;
    r.design.X.resize(nd + nh, cols);
    r.design.Y.resize(nd, cols);
    Eigen::VectorXd h = h0;
    for (std::size_t n = 0; n < latents.size(); ++n) {
        const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(latents.vectors[n].data(), nd);
        h = update_state(h, z, alpha);
        r.states.push_back(h);
        if (n >= washout && n + 1 < latents.size()) {
            const auto c = static_cast<Eigen::Index>(n - washout);
            r.design.X.col(c).head(nd) = z;
            r.design.X.col(c).tail(nh) = h;
            r.design.Y.col(c) = Eigen::Map<const Eigen::VectorXd>(latents.vectors[n + 1].data(), nd);
        }
    }
    return r;
}

HarvestResult EsnModel::collect_states(const LatentTrajectory& latents) const
{
    return collect_states(latents, config_.alpha, zero_state());
}

void EsnModel::train(const LatentTrajectory& latents)
{
    const auto harvest = collect_states(latents);
    w_out_ = train_readout(harvest.design.X, harvest.design.Y, config_.lambda);
}

void EsnModel::set_readout(Eigen::MatrixXd w_out)
{
    if (w_out.rows() != w_in_.cols() || w_out.cols() != w_in_.cols() + w_in_.rows()) {
        throw ShapeError("W_out must be N_d x (N_d + N_h)");
    }
    w_out_ = std::move(w_out);
}

void EsnModel::require_trained(const char* what) const
{
    if (!w_out_) throw DomainError(std::string(what) + ": the reservoir readout has not been trained");
}

EsnModel::Step EsnModel::predict_next(const Eigen::VectorXd& h, const Eigen::VectorXd& z) const
{
    require_trained("predict_next");
    Step s;
    s.state = update_state(h, z, config_.alpha);
    const auto nd = static_cast<Eigen::Index>(latent_dim());
    s.z_next = w_out_->leftCols(nd) * z + w_out_->rightCols(w_out_->cols() - nd) * s.state;
    return s;
}

namespace {

double step_of(const LatentTrajectory& t) { return t.size() >= 2 ? t.times[1] - t.times[0] : 1.0; }

} // namespace

LatentTrajectory EsnModel::teacher_forced(const LatentTrajectory& latents) const
{
    require_trained("teacher_forced");
    latents.validate();
    const double dt = step_of(latents);
    const auto nd = static_cast<Eigen::Index>(latent_dim());
    LatentTrajectory out;
    Eigen::VectorXd h = zero_state();
    for (std::size_t n = 0; n < latents.size(); ++n) {
        const Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(latents.vectors[n].data(), nd);
        auto step = predict_next(h, z);
        h = step.state;
        out.times.push_back(latents.times[n] + dt);
        out.vectors.emplace_back(step.z_next.data(), step.z_next.data() + nd);
    }
    return out;
}

LatentTrajectory EsnModel::forecast(const LatentTrajectory& warmup, std::size_t n_steps) const
{
    require_trained("forecast");
    if (warmup.empty()) throw DomainError("forecast needs a nonempty warmup trajectory");
    warmup.validate();
    if (warmup.dim() != latent_dim()) throw ShapeError("warmup latent dimension does not match the model");

    LatentTrajectory out;
    if (n_steps == 0) return out;

    const auto nd = static_cast<Eigen::Index>(latent_dim());
    const double dt = step_of(warmup);
    Eigen::VectorXd h = zero_state();
    for (std::size_t n = 0; n + 1 < warmup.size(); ++n) {
        h = update_state(h, Eigen::Map<const Eigen::VectorXd>(warmup.vectors[n].data(), nd), config_.alpha);
    }
    Eigen::VectorXd z = Eigen::Map<const Eigen::VectorXd>(warmup.vectors.back().data(), nd);
    const double t_last = warmup.times.back();
    for (std::size_t s = 1; s <= n_steps; ++s) {
        auto step = predict_next(h, z);
        if (!step.z_next.allFinite()) {
            throw DivergenceError("forecast diverged at step " + std::to_string(s));
        }
        h = std::move(step.state);
        z = std::move(step.z_next);
        out.times.push_back(t_last + static_cast<double>(s) * dt);
        out.vectors.emplace_back(z.data(), z.data() + nd);
    }
    return out;
}

namespace {

constexpr std::uint32_t kEsnVersion = 1;

void write_matrix(io::Writer& w, const Eigen::MatrixXd& m)
{
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMat rm = m;
    w.f64s(std::span<const double>(rm.data(), static_cast<std::size_t>(rm.size())));
}

Eigen::MatrixXd read_matrix(io::Reader& r, Eigen::Index rows, Eigen::Index cols, const char* what)
{
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMat rm(rows, cols);
    r.f64s(std::span<double>(rm.data(), static_cast<std::size_t>(rm.size())), what);
    return rm;
}

} // namespace

void EsnModel::save(const std::filesystem::path& path) const
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    io::Writer w(os);
    w.magic("ROME");
    w.u32(kEsnVersion);
    w.u32(static_cast<std::uint32_t>(latent_dim()));
    w.u32(static_cast<std::uint32_t>(reservoir_size()));
    w.f64(config_.alpha);
    w.f64(config_.lambda);
    w.f64(config_.spectral_radius);
    w.f64(config_.connectivity);
    w.f64(config_.input_scale);
    w.u32(static_cast<std::uint32_t>(config_.washout));
    w.u32(static_cast<std::uint32_t>(config_.seed & 0xffffffffu));
    w.u32(static_cast<std::uint32_t>(config_.seed >> 32));
    write_matrix(w, w_in_);
    write_matrix(w, w_res_);
    w.u32(w_out_ ? 1u : 0u);
    if (w_out_) write_matrix(w, *w_out_);
    w.check(path.string());
}

EsnModel EsnModel::load(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    io::Reader r(is, path.string());
    r.expect_magic("ROME");
    const auto version = r.u32("version");
    if (version != kEsnVersion) {
        throw FormatError(path.string() + ": unsupported reservoir checkpoint version " + std::to_string(version));
    }
    const Eigen::Index nd = r.u32("N_d");
    const Eigen::Index nh = r.u32("N_h");
    if (nd == 0 || nh == 0 || nh > 100000 || nd > 100000) throw FormatError(path.string() + ": implausible dimensions");
    EsnConfig c;
    c.reservoir_size = static_cast<std::size_t>(nh);
    c.alpha = r.f64("alpha");
    c.lambda = r.f64("lambda");
    c.spectral_radius = r.f64("spectral radius");
    c.connectivity = r.f64("connectivity");
    c.input_scale = r.f64("input scale");
    c.washout = r.u32("washout");
    const std::uint64_t lo = r.u32("seed");
    const std::uint64_t hi = r.u32("seed");
    c.seed = lo | (hi << 32);
    auto w_in = read_matrix(r, nh, nd, "W_in");
    auto w_res = read_matrix(r, nh, nh, "W_res");
    std::optional<Eigen::MatrixXd> w_out;
    const auto has_out = r.u32("readout flag");
    if (has_out > 1) throw FormatError(path.string() + ": bad readout flag");
    if (has_out) w_out = read_matrix(r, nd, nd + nh, "W_out");
    r.expect_end();
    return EsnModel(c, std::move(w_in), std::move(w_res), std::move(w_out));
}

} // namespace rom
