#include "rom/autoencoder.hpp"

#include "rom/error.hpp"
#include "rom/nn/adam.hpp"
#include "rom/nn/loss.hpp"
#include "rom/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace rom {

namespace {

std::string join(const std::vector<std::size_t>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(v[i]);
    }
    return s;
}

std::vector<std::size_t> parse_list(const std::string& s)
{
    std::vector<std::size_t> out;
    if (s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoull(item));
    return out;
}

std::string exact(double v)
{
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<std::size_t> dense_chain(const CaeConfig& c) { return c.dense_widths; }

} // namespace

void CaeConfig::validate() const
{
    if (levels < 1) throw ConfigError("cae.levels must be >= 1");
    if (filters.size() != levels) {
        throw ConfigError("cae.filters has " + std::to_string(filters.size()) + " entries but cae.levels = " +
                          std::to_string(levels));
    }
    for (auto f : filters) {
        if (f < 1) throw ConfigError("cae.filters entries must be >= 1");
    }
    for (auto w : dense_widths) {
        if (w < 1) throw ConfigError("cae.dense widths must be >= 1");
    }
    if (blocks_per_level < 1) throw ConfigError("cae.nf must be >= 1");
    if (latent_dim < 1) throw ConfigError("cae.latent_dim must be >= 1");
    if (kernel < 1 || kernel % 2 == 0) throw ConfigError("cae.kernel must be odd");
    if (stride < 1) throw ConfigError("cae.stride must be >= 1");
    if (batch_size < 1) throw ConfigError("cae.batch_size must be >= 1");
    if (!(lr > 0.0)) throw ConfigError("cae.lr must be positive");
    if (!(lr_final >= 0.0)) throw ConfigError("cae.lr_final must be non-negative");
}

nn::Shape grid_image_shape(const GridSpec& grid)
{
    if (grid.ny > 1 && grid.nz > 1) return {1, grid.nz, grid.ny, grid.nx};
    if (grid.nz > 1) return {1, grid.nz, grid.nx};
    return {1, grid.ny, grid.nx};
}

void CaeModel::check_grid(const GridSpec& grid) const
{
    if (grid.cell_count() != grid_.cell_count() || grid_image_shape(grid) != image_shape_) {
        throw ShapeError("snapshot grid " + std::to_string(grid.nx) + "x" + std::to_string(grid.ny) + "x" +
                         std::to_string(grid.nz) + " does not match the model grid " + std::to_string(grid_.nx) +
                         "x" + std::to_string(grid_.ny) + "x" + std::to_string(grid_.nz));
    }
}

CaeModel CaeModel::build(const CaeConfig& config, const GridSpec& grid)
{
    config.validate();
    grid.validate();

    CaeModel m;
    m.config_ = config;
    m.grid_ = grid;
    m.image_shape_ = grid_image_shape(grid);
    const std::size_t rank = m.image_shape_.size() - 1;
    const std::size_t k = config.kernel, s = config.stride, pad = k / 2;

    std::size_t min_extent = 1;
    for (std::size_t l = 0; l < config.levels; ++l) min_extent *= s;
    for (std::size_t a = 1; a < m.image_shape_.size(); ++a) {
        if (m.image_shape_[a] < min_extent) {
            throw ConfigError("grid extent " + std::to_string(m.image_shape_[a]) + " is too small for " +
                              std::to_string(config.levels) + " stride-" + std::to_string(s) + " levels");
        }
    }
    if (config.latent_dim >= grid.cell_count()) {
        throw ConfigError("latent dimension must be smaller than the number of grid cells");
    }

    // Spatial extents per level (without the channel axis).
    nn::Shape spatial(m.image_shape_.begin() + 1, m.image_shape_.end());
    m.level_shapes_.push_back(spatial);
    for (std::size_t l = 0; l < config.levels; ++l) {
        for (auto& e : spatial) e = (e + 2 * pad - k) / s + 1;
        m.level_shapes_.push_back(spatial);
    }

    Rng rng(config.seed);
    const auto act = nn::ActivationLayer{config.activation};

    // Encoder.
    std::size_t channels = 1;
    for (std::size_t l = 0; l < config.levels; ++l) {
        const std::size_t f = config.filters[l];
        m.encoder_.add(nn::make_conv(channels, f, rank, k, s, pad, rng));
        m.encoder_.add(act);
        for (std::size_t b = 1; b < config.blocks_per_level; ++b) {
            m.encoder_.add(nn::make_conv(f, f, rank, k, 1, pad, rng));
            m.encoder_.add(act);
        }
        channels = f;
    }
    const std::size_t flat = channels * nn::shape_size(m.level_shapes_.back());
    m.encoder_.add(nn::ReshapeLayer{{flat}});
    std::size_t width = flat;
    for (auto w : dense_chain(config)) {
        m.encoder_.add(nn::make_dense(width, w, rng));
        m.encoder_.add(act);
        width = w;
    }
    m.encoder_.add(nn::make_dense(width, config.latent_dim, rng));

    // Decoder, mirrored.
    width = config.latent_dim;
    const auto widths = dense_chain(config);
    for (auto it = widths.rbegin(); it != widths.rend(); ++it) {
        m.decoder_.add(nn::make_dense(width, *it, rng));
        m.decoder_.add(act);
        width = *it;
    }
    m.decoder_.add(nn::make_dense(width, flat, rng));
    m.decoder_.add(act);
    nn::Shape top{channels};
    top.insert(top.end(), m.level_shapes_.back().begin(), m.level_shapes_.back().end());
    m.decoder_.add(nn::ReshapeLayer{top});
    for (std::size_t l = config.levels; l-- > 0;) {
        const std::size_t f = config.filters[l];
        const std::size_t below = l == 0 ? 1 : config.filters[l - 1];
        for (std::size_t b = 1; b < config.blocks_per_level; ++b) {
            m.decoder_.add(nn::make_deconv(f, f, rank, k, 1, pad, {0, 0, 0}, rng));
            m.decoder_.add(act);
        }
        // Output padding restores the exact extent of the level below.
        std::array<std::size_t, 3> op{0, 0, 0};
        const auto& small = m.level_shapes_[l + 1];
        const auto& big = m.level_shapes_[l];
        for (std::size_t a = 0; a < rank; ++a) {
            const std::size_t produced = (small[a] - 1) * s + k - 2 * pad;
            if (big[a] < produced || big[a] - produced >= s) {
                throw ConfigError("cannot invert the downsampling of extent " + std::to_string(big[a]));
            }
            op[3 - rank + a] = big[a] - produced;
        }
        m.decoder_.add(nn::make_deconv(f, below, rank, k, s, pad, op, rng));
        if (l != 0) m.decoder_.add(act);
    }
    return m;
}

nn::Tensor CaeModel::to_batch(const SnapshotSet& set, std::span<const std::size_t> indices) const
{
    nn::Shape shape{indices.size()};
    shape.insert(shape.end(), image_shape_.begin(), image_shape_.end());
    nn::Tensor batch(shape);
    const std::size_t n = grid_.cell_count();
    for (std::size_t b = 0; b < indices.size(); ++b) {
        const auto& values = set[indices[b]].values;
        std::copy(values.begin(), values.end(), batch.data() + b * n);
    }
    return batch;
}

std::vector<double> CaeModel::encode(const Snapshot& snapshot) const
{
    if (snapshot.values.size() != grid_.cell_count()) {
        throw ShapeError("encode: snapshot has " + std::to_string(snapshot.values.size()) + " values, model grid has " +
                         std::to_string(grid_.cell_count()) + " cells");
    }
    nn::Shape shape{1};
    shape.insert(shape.end(), image_shape_.begin(), image_shape_.end());
    nn::Tensor x(shape, normalize(snapshot, norm_).values);
    const auto z = encoder_.forward(x);
    return z.to_vector();
}

Snapshot CaeModel::decode(std::span<const double> z, double time) const
{
    if (z.size() != config_.latent_dim) {
        throw ShapeError("decode: latent vector has length " + std::to_string(z.size()) + ", model expects " +
                         std::to_string(config_.latent_dim));
    }
    nn::Tensor in({1, z.size()}, z);
    const auto out = decoder_.forward(in);
    return denormalize(Snapshot{out.to_vector(), time}, norm_);
}

LatentTrajectory CaeModel::encode_set(const SnapshotSet& set) const
{
    check_grid(set.grid());
    LatentTrajectory traj;
    for (const auto& s : set) {
        traj.times.push_back(s.time);
        traj.vectors.push_back(encode(s));
    }
    return traj;
}

SnapshotSet CaeModel::decode_set(const LatentTrajectory& traj) const
{
    traj.validate();
    std::vector<Snapshot> out;
    out.reserve(traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) out.push_back(decode(traj.vectors[i], traj.times[i]));
    const double dt = traj.size() >= 2 ? traj.times[1] - traj.times[0] : 1.0;
    return SnapshotSet(grid_, dt, std::move(out));
}

double CaeModel::mean_reconstruction_error(const SnapshotSet& set) const
{
    check_grid(set.grid());
    if (set.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& s : set) sum += relative_l2_error(s, decode(encode(s), s.time));
    return sum / static_cast<double>(set.size());
}

TrainingLog CaeModel::train(const SnapshotSet& train_set)
{
    if (train_set.empty()) throw DomainError("cannot train the autoencoder on an empty set");
    check_grid(train_set.grid());

    TrainingLog log;
    if (config_.epochs == 0) return log;

    norm_ = compute_norm_stats(train_set);
    const SnapshotSet normalized = normalize(train_set, norm_);

    nn::AdamState adam;
    adam.lr = config_.lr;
    Rng shuffler(config_.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(normalized.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<nn::Tensor> enc_trace, dec_trace;
    for (std::size_t epoch = 0; epoch < config_.epochs; ++epoch) {
        if (config_.lr_final > 0.0 && config_.epochs > 1) {
            const double frac = static_cast<double>(epoch) / static_cast<double>(config_.epochs - 1);
            adam.lr = config_.lr * std::pow(config_.lr_final / config_.lr, frac);
        }
        shuffler.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t first = 0; first < order.size(); first += config_.batch_size) {
            const std::size_t count = std::min(config_.batch_size, order.size() - first);
            const auto batch = to_batch(normalized, std::span<const std::size_t>(order).subspan(first, count));

            const auto z = encoder_.forward(batch, enc_trace);
            const auto recon = decoder_.forward(z, dec_trace);
            auto loss = nn::mse_loss(recon, batch);
            if (!std::isfinite(loss.value)) {
                throw DivergenceError("autoencoder training diverged: non-finite loss in epoch " +
                                      std::to_string(epoch + 1));
            }
            epoch_loss += loss.value * static_cast<double>(count);

            std::vector<nn::Tensor> enc_grads, dec_grads;
            const auto gz = decoder_.backward(dec_trace, loss.grad, dec_grads);
            encoder_.backward(enc_trace, gz, enc_grads);

            auto params = encoder_.parameters();
            auto dec_params = decoder_.parameters();
            params.insert(params.end(), dec_params.begin(), dec_params.end());
            enc_grads.insert(enc_grads.end(), std::make_move_iterator(dec_grads.begin()),
                             std::make_move_iterator(dec_grads.end()));
            nn::adam_step(params, enc_grads, adam);
        }
        log.epoch_loss.push_back(epoch_loss / static_cast<double>(order.size()));
    }

    training_error_ = mean_reconstruction_error(train_set);
    log.final_relative_l2 = training_error_;
    return log;
}

std::string CaeModel::manifest() const
{
    std::ostringstream os;
    os << "kind=cae\n";
    os << "cae.levels=" << config_.levels << '\n';
    os << "cae.filters=" << join(config_.filters) << '\n';
    os << "cae.nf=" << config_.blocks_per_level << '\n';
    os << "cae.latent_dim=" << config_.latent_dim << '\n';
    os << "cae.dense=" << join(config_.dense_widths) << '\n';
    os << "cae.activation=" << nn::to_string(config_.activation) << '\n';
    os << "cae.kernel=" << config_.kernel << '\n';
    os << "cae.stride=" << config_.stride << '\n';
    os << "cae.seed=" << config_.seed << '\n';
    os << "cae.epochs=" << config_.epochs << '\n';
    os << "cae.batch_size=" << config_.batch_size << '\n';
    os << "cae.lr=" << exact(config_.lr) << '\n';
    os << "cae.lr_final=" << exact(config_.lr_final) << '\n';
    os << "grid.nx=" << grid_.nx << "\ngrid.ny=" << grid_.ny << "\ngrid.nz=" << grid_.nz << '\n';
    os << "grid.dx=" << exact(grid_.dx) << "\ngrid.dy=" << exact(grid_.dy) << "\ngrid.dz=" << exact(grid_.dz) << '\n';
    os << "grid.x0=" << exact(grid_.x0) << "\ngrid.y0=" << exact(grid_.y0) << "\ngrid.z0=" << exact(grid_.z0) << '\n';
    os << "norm.vmin=" << exact(norm_.vmin) << "\nnorm.vmax=" << exact(norm_.vmax) << '\n';
    os << "training_error=" << exact(training_error_) << '\n';
    return os.str();
}

void CaeModel::save(const std::filesystem::path& path) const
{
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    nn::save_checkpoint(os, {&encoder_, &decoder_}, manifest());
}

CaeModel CaeModel::load(const std::filesystem::path& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    auto ck = nn::load_checkpoint(is, path.string());

    std::map<std::string, std::string> kv;
    std::istringstream ms(ck.manifest);
    std::string line;
    while (std::getline(ms, line)) {
        const auto eq = line.find('=');
        if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
    }
    auto get = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw FormatError(path.string() + ": model manifest lacks '" + key + "'");
        return it->second;
    };
    if (get("kind") != "cae") throw FormatError(path.string() + ": not an autoencoder checkpoint");

    CaeConfig c;
    GridSpec g;
    NormStats norm;
    double training_error = 0.0;
    try {
        c.levels = std::stoull(get("cae.levels"));
        c.filters = parse_list(get("cae.filters"));
        c.blocks_per_level = std::stoull(get("cae.nf"));
        c.latent_dim = std::stoull(get("cae.latent_dim"));
        c.dense_widths = parse_list(get("cae.dense"));
        c.activation = nn::parse_activation(get("cae.activation"));
        c.kernel = std::stoull(get("cae.kernel"));
        c.stride = std::stoull(get("cae.stride"));
        c.seed = std::stoull(get("cae.seed"));
        c.epochs = std::stoull(get("cae.epochs"));
        c.batch_size = std::stoull(get("cae.batch_size"));
        c.lr = std::stod(get("cae.lr"));
        c.lr_final = std::stod(get("cae.lr_final"));
        g.nx = std::stoull(get("grid.nx"));
        g.ny = std::stoull(get("grid.ny"));
        g.nz = std::stoull(get("grid.nz"));
        g.dx = std::stod(get("grid.dx"));
        g.dy = std::stod(get("grid.dy"));
        g.dz = std::stod(get("grid.dz"));
        g.x0 = std::stod(get("grid.x0"));
        g.y0 = std::stod(get("grid.y0"));
        g.z0 = std::stod(get("grid.z0"));
        norm.vmin = std::stod(get("norm.vmin"));
        norm.vmax = std::stod(get("norm.vmax"));
        training_error = std::stod(get("training_error"));
    } catch (const std::logic_error& e) {
        throw FormatError(path.string() + ": malformed model manifest (" + e.what() + ")");
    }

    // Rebuild the architecture, then adopt the stored parameters.
    CaeModel m = build(c, g);
    if (ck.networks.size() != 2 || ck.networks[0].parameter_count() != m.encoder_.parameter_count() ||
        ck.networks[1].parameter_count() != m.decoder_.parameter_count() ||
        ck.networks[0].layers().size() != m.encoder_.layers().size() ||
        ck.networks[1].layers().size() != m.decoder_.layers().size()) {
        throw FormatError(path.string() + ": layer manifest does not match the model configuration");
    }
    m.encoder_ = std::move(ck.networks[0]);
    m.decoder_ = std::move(ck.networks[1]);
    m.norm_ = norm;
    m.training_error_ = training_error;
    return m;
}

} // namespace rom
