#include "rom/config.hpp"

#include "rom/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace rom {

void PipelineConfig::set_seed(std::uint64_t s)
{
    seed = s;
    if (!cae_seed_set) cae.seed = s;
    if (!esn_seed_set) esn.seed = s + 1;
}

void PipelineConfig::validate() const
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ConfigError("train_fraction must lie in (0, 1)");
    if (data.from_file && data.path.empty()) throw ConfigError("data.source = file requires data.path");
    cae.validate();
    esn.validate();
    if (!data.from_file) {
        data.grid.validate();
        bench::check_stability(data.dynamics, data.grid);
    }
}

const std::vector<std::string>& preset_names()
{
    static const std::vector<std::string> names{"rtb2d", "dc2d", "rtb3d"};
    return names;
}

PipelineConfig preset_config(std::string_view name)
{
    PipelineConfig c;
    c.preset = std::string(name);
    c.train_fraction = 0.8;
    c.cae.latent_dim = 4;
    c.cae.levels = 4;
    c.esn.spectral_radius = 0.9;
    c.esn.connectivity = 0.1;
    if (name == "rtb2d") {
        c.data.benchmark = Benchmark::warm_bubble;
        c.data.grid = bench::rtb2d_grid();
        c.data.dynamics = {{0.0, 0.0, 5.0}, 0.0, 5.0, 1019, 1.0};
        c.cae.filters = {256, 128, 64, 32};
        c.cae.blocks_per_level = 1;
        c.cae.dense_widths = {};
        c.esn.reservoir_size = 400;
        c.esn.alpha = 0.0095;
        c.esn.lambda = 0.004;
    } else if (name == "dc2d") {
        c.data.benchmark = Benchmark::density_current;
        c.data.grid = bench::dc2d_grid();
        c.data.dynamics = {{10.0, 0.0, -2.0}, 0.004, 5.0, 899, 1.0};
        c.cae.filters = {512, 256, 128, 64};
        c.cae.blocks_per_level = 3;
        c.cae.dense_widths = kDefaultDenseWidths;
        c.esn.reservoir_size = 1000;
        c.esn.alpha = 0.0022;
        c.esn.lambda = 0.0022;
    } else if (name == "rtb3d") {
        c.data.benchmark = Benchmark::warm_bubble;
        c.data.grid = bench::rtb3d_grid();
        c.data.dynamics = {{0.0, 0.0, 2.0}, 0.0, 2.0, 499, 1.0};
        c.cae.filters = {512, 256, 128, 64};
        c.cae.blocks_per_level = 3;
        c.cae.dense_widths = kDefaultDenseWidths;
        c.esn.reservoir_size = 1200;
        c.esn.alpha = 0.015;
        c.esn.lambda = 0.00055;
    } else {
        throw ConfigError("unknown preset '" + std::string(name) + "' (expected rtb2d, dc2d or rtb3d)");
    }
    c.set_seed(0);
    return c;
}

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

double to_double(std::string_view key, std::string_view v)
{
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
    }
    return out;
}

std::uint64_t to_uint(std::string_view key, std::string_view v)
{
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) {
        throw ConfigError("'" + std::string(key) + "' expects a nonnegative integer, got '" + std::string(v) + "'");
    }
    return out;
}

bool to_bool(std::string_view key, std::string_view v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("'" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'");
}

std::vector<std::size_t> to_list(std::string_view key, std::string_view v)
{
    std::vector<std::size_t> out;
    if (v.empty() || v == "none") return out;
    std::size_t start = 0;
    while (start <= v.size()) {
        auto end = v.find(',', start);
        if (end == std::string_view::npos) end = v.size();
        out.push_back(to_uint(key, trim(v.substr(start, end - start))));
        start = end + 1;
    }
    return out;
}

} // namespace

void apply_setting(PipelineConfig& cfg, std::string_view key, std::string_view value)
{
    const std::string k(key);
    const std::string v = trim(value);
    auto& d = cfg.data;
    auto& g = d.grid;
    auto& dyn = d.dynamics;

    if (k == "preset") {
        throw ConfigError("'preset' must be the first setting");
    } else if (k == "seed") {
        cfg.set_seed(to_uint(k, v));
    } else if (k == "out") {
        cfg.out_dir = v;
    } else if (k == "train_fraction" || k == "split.train_fraction") {
        cfg.train_fraction = to_double(k, v);
    } else if (k == "pipeline.scale_latents") {
        cfg.scale_latents = to_bool(k, v);
    } else if (k == "data.source") {
        if (v == "file") {
            d.from_file = true;
        } else if (v == "synthetic") {
            d.from_file = false;
        } else {
            throw ConfigError("data.source must be 'synthetic' or 'file'");
        }
    } else if (k == "data.path") {
        d.path = v;
        d.from_file = true;
    } else if (k == "data.benchmark") {
        if (v == "warm_bubble") {
            d.benchmark = Benchmark::warm_bubble;
        } else if (v == "density_current") {
            d.benchmark = Benchmark::density_current;
        } else if (v == "constant") {
            d.benchmark = Benchmark::constant;
        } else {
            throw ConfigError("data.benchmark must be warm_bubble, density_current or constant");
        }
    } else if (k == "data.paper_center") {
        d.paper_center = to_bool(k, v);
    } else if (k == "data.constant_value") {
        d.constant_value = to_double(k, v);
    } else if (k == "grid.nx") {
        g.nx = to_uint(k, v);
    } else if (k == "grid.ny") {
        g.ny = to_uint(k, v);
    } else if (k == "grid.nz") {
        g.nz = to_uint(k, v);
    } else if (k == "grid.dx") {
        g.dx = to_double(k, v);
    } else if (k == "grid.dy") {
        g.dy = to_double(k, v);
    } else if (k == "grid.dz") {
        g.dz = to_double(k, v);
    } else if (k == "grid.x0") {
        g.x0 = to_double(k, v);
    } else if (k == "grid.y0") {
        g.y0 = to_double(k, v);
    } else if (k == "grid.z0") {
        g.z0 = to_double(k, v);
    } else if (k == "bubble.xc") {
        d.center_x = to_double(k, v);
    } else if (k == "bubble.yc") {
        d.center_y = to_double(k, v);
    } else if (k == "bubble.zc") {
        d.center_z = to_double(k, v);
    } else if (k == "bubble.r0") {
        d.radius = to_double(k, v);
    } else if (k == "bubble.amplitude") {
        d.amplitude = to_double(k, v);
    } else if (k == "dc.xc") {
        d.density_current.center[0] = to_double(k, v);
    } else if (k == "dc.zc") {
        d.density_current.center[1] = to_double(k, v);
    } else if (k == "dc.xr") {
        d.density_current.radii[0] = to_double(k, v);
    } else if (k == "dc.zr") {
        d.density_current.radii[1] = to_double(k, v);
    } else if (k == "dc.theta_s") {
        d.density_current.theta_s = to_double(k, v);
    } else if (k == "dynamics.u") {
        dyn.velocity[0] = to_double(k, v);
    } else if (k == "dynamics.v") {
        dyn.velocity[1] = to_double(k, v);
    } else if (k == "dynamics.w") {
        dyn.velocity[2] = to_double(k, v);
    } else if (k == "dynamics.shear") {
        dyn.shear = to_double(k, v);
    } else if (k == "dynamics.kappa") {
        dyn.kappa = to_double(k, v);
    } else if (k == "dynamics.steps") {
        dyn.n_steps = to_uint(k, v);
    } else if (k == "dynamics.dt") {
        dyn.dt = to_double(k, v);
    } else if (k == "cae.levels") {
        cfg.cae.levels = to_uint(k, v);
    } else if (k == "cae.filters") {
        cfg.cae.filters = to_list(k, v);
    } else if (k == "cae.nf") {
        cfg.cae.blocks_per_level = to_uint(k, v);
    } else if (k == "cae.latent_dim") {
        cfg.cae.latent_dim = to_uint(k, v);
    } else if (k == "cae.dense") {
        cfg.cae.dense_widths = to_list(k, v);
    } else if (k == "cae.activation") {
        cfg.cae.activation = nn::parse_activation(v);
    } else if (k == "cae.kernel") {
        cfg.cae.kernel = to_uint(k, v);
    } else if (k == "cae.stride") {
        cfg.cae.stride = to_uint(k, v);
    } else if (k == "cae.seed") {
        cfg.cae.seed = to_uint(k, v);
        cfg.cae_seed_set = true;
    } else if (k == "cae.epochs") {
        cfg.cae.epochs = to_uint(k, v);
    } else if (k == "cae.batch_size") {
        cfg.cae.batch_size = to_uint(k, v);
    } else if (k == "cae.lr") {
        cfg.cae.lr = to_double(k, v);
    } else if (k == "cae.lr_final") {
        cfg.cae.lr_final = to_double(k, v);
    } else if (k == "esn.reservoir_size") {
        cfg.esn.reservoir_size = to_uint(k, v);
    } else if (k == "esn.alpha") {
        cfg.esn.alpha = to_double(k, v);
    } else if (k == "esn.lambda") {
        cfg.esn.lambda = to_double(k, v);
    } else if (k == "esn.spectral_radius") {
        cfg.esn.spectral_radius = to_double(k, v);
    } else if (k == "esn.connectivity") {
        cfg.esn.connectivity = to_double(k, v);
    } else if (k == "esn.input_scale") {
        cfg.esn.input_scale = to_double(k, v);
    } else if (k == "esn.washout") {
        cfg.esn.washout = to_uint(k, v);
    } else if (k == "esn.seed") {
        cfg.esn.seed = to_uint(k, v);
        cfg.esn_seed_set = true;
    } else {
        throw ConfigError("unknown configuration key '" + k + "'");
    }
}

PipelineConfig parse_config(std::string_view text, const std::optional<std::string>& preset_override)
{
    std::vector<std::pair<std::string, std::string>> settings;
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    std::optional<std::string> preset = preset_override;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        auto key = trim(std::string_view(body).substr(0, eq));
        auto value = trim(std::string_view(body).substr(eq + 1));
        if (key == "preset") {
            if (!preset_override) preset = value;
            continue;
        }
        settings.emplace_back(std::move(key), std::move(value));
    }

    PipelineConfig cfg = preset ? preset_config(*preset) : PipelineConfig{};
    if (!preset) cfg.set_seed(0);
    for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path, const std::optional<std::string>& preset_override)
{
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());
    std::stringstream ss;
    ss << is.rdbuf();
    try {
        return parse_config(ss.str(), preset_override);
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

SnapshotSet acquire_snapshots(const DataConfig& data)
{
    if (data.from_file) return load_snapshots(data.path);

    Snapshot initial;
    switch (data.benchmark) {
    case Benchmark::warm_bubble: {
        auto bubble = bench::default_warm_bubble(data.grid, data.paper_center);
        if (data.center_x) bubble.center[0] = *data.center_x;
        if (data.center_y) bubble.center[1] = *data.center_y;
        if (data.center_z) bubble.center[2] = *data.center_z;
        if (data.radius) bubble.r0 = *data.radius;
        if (data.amplitude) bubble.amplitude = *data.amplitude;
        initial = bench::warm_bubble_theta_prime(bubble, data.grid);
        break;
    }
    case Benchmark::density_current:
        initial = bench::density_current_theta_prime(data.density_current, data.grid);
        break;
    case Benchmark::constant:
        data.grid.validate();
        initial.values.assign(data.grid.cell_count(), data.constant_value);
        break;
    }
    initial.time = 0.0;
    return bench::synthetic_evolve(initial, data.grid, data.dynamics);
}

} // namespace rom
