#include "rom/autoencoder.hpp"
#include "rom/benchmarks.hpp"
#include "rom/config.hpp"
#include "rom/error.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

using namespace rom;
namespace fs = std::filesystem;

namespace {

// Closed-form parameter count of the symmetric conv/dense stack.
std::size_t expected_parameters(const CaeConfig& c, const GridSpec& g)
{
    const std::size_t rank = (g.nx > 1) + (g.ny > 1) + (g.nz > 1);
    std::size_t kvol = 1;
    for (std::size_t a = 0; a < rank; ++a) kvol *= c.kernel;
    std::vector<std::size_t> ext;
    if (g.nx > 1) ext.push_back(g.nx);
    if (g.ny > 1) ext.push_back(g.ny);
    if (g.nz > 1) ext.push_back(g.nz);

    std::size_t total = 0, in = 1;
    for (std::size_t l = 0; l < c.levels; ++l) {
        const std::size_t f = c.filters[l];
        // One strided conv plus nf - 1 unit-stride convs, in encoder and decoder.
        total += 2 * (in * f * kvol) + f + in;
        total += 2 * (c.blocks_per_level - 1) * (f * f * kvol + f);
        in = f;
        for (auto& e : ext) e = (e + 1) / 2;
    }
    std::size_t width = in;
    for (auto e : ext) width *= e;
    for (auto w : c.dense_widths) {
        total += width * w + w + w * width + width;
        width = w;
    }
    total += width * c.latent_dim + c.latent_dim + c.latent_dim * width + width;
    return total;
}

SnapshotSet bubble_set(const GridSpec& g, std::size_t steps)
{
    bench::WarmBubbleConfig b;
    b.center = {g.nx * g.dx / 2, 0.0, g.nz * g.dz / 2};
    b.r0 = 0.3 * g.nx * g.dx;
    bench::SyntheticDynamicsConfig d;
    d.velocity = {0.5 * g.dx, 0.0, 0.0};
    d.kappa = 0.05 * g.dx * g.dx;
    d.n_steps = steps;
    return bench::synthetic_evolve(bench::warm_bubble_theta_prime(b, g), g, d);
}

CaeConfig tiny_config()
{
    CaeConfig c;
    c.levels = 2;
    c.filters = {4, 2};
    c.blocks_per_level = 2;
    c.latent_dim = 3;
    c.dense_widths = {8};
    c.epochs = 3;
    c.batch_size = 4;
    c.seed = 5;
    return c;
}

std::string read_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path temp_file(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "rom_test_autoencoder";
    fs::create_directories(dir);
    return dir / name;
}

} // namespace

TEST_CASE("minimal model parameter count")
{
    CaeConfig c;
    c.levels = 1;
    c.filters = {1};
    c.blocks_per_level = 1;
    c.latent_dim = 1;
    const GridSpec g{4, 1, 4};
    const auto m = CaeModel::build(c, g);
    // conv 9+1, dense 4->1 4+1, dense 1->4 4+4, deconv 9+1.
    CHECK(m.parameter_count() == 33);
    CHECK(expected_parameters(c, g) == 33);
}

TEST_CASE("parameter counts follow the closed form")
{
    const GridSpec g2{13, 1, 10};
    CHECK(CaeModel::build(tiny_config(), g2).parameter_count() == expected_parameters(tiny_config(), g2));
    auto c = tiny_config();
    c.blocks_per_level = 3;
    c.dense_widths = kDefaultDenseWidths;
    const GridSpec g3{8, 6, 5};
    CHECK(CaeModel::build(c, g3).parameter_count() == expected_parameters(c, g3));
}

TEST_CASE("preset architectures build with consistent level shapes")
{
    for (const char* name : {"rtb2d", "dc2d"}) {
        const auto cfg = preset_config(name);
        const auto m = CaeModel::build(cfg.cae, cfg.data.grid);
        CHECK(m.level_shapes().size() == cfg.cae.levels + 1);
        CHECK(m.parameter_count() == expected_parameters(cfg.cae, cfg.data.grid));
    }
    const auto rtb = preset_config("rtb2d");
    const auto m = CaeModel::build(rtb.cae, rtb.data.grid);
    CHECK(m.image_shape() == nn::Shape{1, 160, 80});
    CHECK(m.level_shapes().back() == nn::Shape{10, 5});
}

TEST_CASE("odd extents are restored by the decoder")
{
    const GridSpec g{13, 1, 10};
    const auto m = CaeModel::build(tiny_config(), g);
    CHECK(m.level_shapes()[1] == nn::Shape{5, 7});
    CHECK(m.level_shapes()[2] == nn::Shape{3, 4});
    const auto set = bubble_set(g, 3);
    const auto z = m.encode(set[0]);
    CHECK(z.size() == 3);
    CHECK(m.decode(z).values.size() == g.cell_count());
}

TEST_CASE("invalid configurations are rejected")
{
    auto c = tiny_config();
    c.filters = {4};
    CHECK_THROWS_AS(CaeModel::build(c, {16, 1, 16}), ConfigError);
    CHECK_THROWS_AS(CaeModel::build(tiny_config(), {3, 1, 16}), ConfigError);
    c = tiny_config();
    c.latent_dim = 64;
    CHECK_THROWS_AS(CaeModel::build(c, {8, 1, 8}), ConfigError);
    c = tiny_config();
    c.kernel = 2;
    CHECK_THROWS_AS(CaeModel::build(c, {8, 1, 8}), ConfigError);
}

TEST_CASE("encode is deterministic and checkpoints are bit-exact")
{
    const GridSpec g{12, 1, 8};
    const auto set = bubble_set(g, 12);
    auto m = CaeModel::build(tiny_config(), g);
    m.train(set);
    CHECK(m.encode(set[3]) == m.encode(set[3]));

    const auto p = temp_file("cae.romw");
    m.save(p);
    const auto back = CaeModel::load(p);
    CHECK(back.config().filters == m.config().filters);
    CHECK(back.grid() == g);
    CHECK(back.norm().vmin == m.norm().vmin);
    CHECK(back.norm().vmax == m.norm().vmax);
    for (const auto& s : set) CHECK(back.encode(s) == m.encode(s));
    CHECK(back.decode(m.encode(set[5])).values == m.decode(m.encode(set[5])).values);

    const auto p2 = temp_file("cae2.romw");
    back.save(p2);
    CHECK(read_bytes(p) == read_bytes(p2));

    const std::string bytes = read_bytes(p);
    {
        std::ofstream out(p2, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 16));
    }
    CHECK_THROWS_AS(CaeModel::load(p2), FormatError);
}

TEST_CASE("zero epochs leave the model untouched")
{
    const GridSpec g{8, 1, 8};
    auto c = tiny_config();
    c.epochs = 0;
    auto m = CaeModel::build(c, g);
    const auto before = CaeModel::build(c, g);
    const auto log = m.train(bubble_set(g, 5));
    CHECK(log.epoch_loss.empty());
    const Snapshot probe{std::vector<double>(64, 0.25), 0.0};
    CHECK(m.encode(probe) == before.encode(probe));
}

TEST_CASE("same seed gives identical loss curves")
{
    const GridSpec g{8, 1, 8};
    const auto set = bubble_set(g, 10);
    auto a = CaeModel::build(tiny_config(), g);
    auto b = CaeModel::build(tiny_config(), g);
    const auto la = a.train(set), lb = b.train(set);
    CHECK(la.epoch_loss.size() == 3);
    CHECK(la.epoch_loss == lb.epoch_loss);
    CHECK(la.final_relative_l2 == lb.final_relative_l2);

    auto c = tiny_config();
    c.seed = 6;
    auto d = CaeModel::build(c, g);
    CHECK(d.train(set).epoch_loss != la.epoch_loss);
}

TEST_CASE("training reduces the loss and learns a constant field")
{
    const GridSpec g{8, 1, 8};
    const auto set = bubble_set(g, 20);
    auto c = tiny_config();
    c.epochs = 30;
    c.lr = 3e-3;
    auto m = CaeModel::build(c, g);
    const auto log = m.train(set);
    CHECK(log.epoch_loss.back() < 0.5 * log.epoch_loss.front());
    CHECK(m.training_error() == log.final_relative_l2);

    std::vector<Snapshot> flat;
    for (std::size_t n = 0; n < 6; ++n) flat.push_back({std::vector<double>(64, 3.0), static_cast<double>(n)});
    const SnapshotSet constant(g, 1.0, flat);
    auto k = CaeModel::build(tiny_config(), g);
    k.train(constant);
    CHECK(k.mean_reconstruction_error(constant) < 1e-9);
}

TEST_CASE("3D grids use volumetric convolutions")
{
    const GridSpec g{8, 6, 4};
    auto c = tiny_config();
    c.epochs = 1;
    auto m = CaeModel::build(c, g);
    CHECK(m.image_shape() == nn::Shape{1, 4, 6, 8});
    const auto set = bubble_set(g, 4);
    m.train(set);
    CHECK(m.decode(m.encode(set[1])).values.size() == g.cell_count());
}
