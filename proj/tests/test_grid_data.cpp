#include "rom/error.hpp"
#include "rom/grid_data.hpp"
#include "rom/rng.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>

using namespace rom;
namespace fs = std::filesystem;

namespace {

SnapshotSet ramp_set(const GridSpec& g, std::size_t count, double dt = 0.5)
{
    std::vector<Snapshot> snaps;
    Rng rng(1);
    for (std::size_t n = 0; n < count; ++n) {
        Snapshot s{std::vector<double>(g.cell_count()), 2.0 + dt * static_cast<double>(n)};
        for (auto& v : s.values) v = rng.symmetric(10.0);
        snaps.push_back(std::move(s));
    }
    return SnapshotSet(g, dt, std::move(snaps));
}

fs::path temp_file(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / "rom_test_grid_data";
    fs::create_directories(dir);
    return dir / name;
}

std::string read_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

} // namespace

TEST_CASE("chronological split counts")
{
    CHECK(split_count(1020, 0.4) == 408);
    CHECK(split_count(1020, 0.6) == 612);
    CHECK(split_count(1020, 0.8) == 816);
    CHECK(split_count(2, 0.5) == 1);
    CHECK_THROWS_AS(split_count(2, 0.2), DomainError);
    CHECK_THROWS_AS(split_count(10, 1.0), DomainError);
    CHECK_THROWS_AS(split_count(10, 0.0), DomainError);

    const auto set = ramp_set({2, 1, 2}, 10);
    const auto [train, valid] = split(set, 0.6);
    CHECK(train.size() == 6);
    CHECK(valid.size() == 4);
    CHECK(valid[0].time == set[6].time);
    CHECK(train[5].values == set[5].values);
}

TEST_CASE("normalization maps the range onto [-1, 1]")
{
    const NormStats s{0.0, 4.0};
    CHECK(normalize_value(0.0, s) == -1.0);
    CHECK(normalize_value(4.0, s) == 1.0);
    CHECK(normalize_value(1.0, s) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(denormalize_value(0.0, NormStats{-2.0, 2.0}) == 0.0);
    CHECK(denormalize_value(-1.0, NormStats{3.0, 7.0}) == 3.0);
    CHECK(denormalize_value(0.5, s) == doctest::Approx(3.0).epsilon(1e-15));

    const NormStats flat{5.0, 5.0};
    CHECK(normalize_value(5.0, flat) == 0.0);
    CHECK(denormalize_value(0.0, flat) == 5.0);
}

TEST_CASE("normalize then denormalize round-trips and stays in range")
{
    const auto set = ramp_set({3, 2, 2}, 7);
    const auto stats = compute_norm_stats(set);
    const auto norm = normalize(set, stats);
    for (const auto& snap : norm) {
        for (double v : snap.values) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
    const auto back = denormalize(norm, stats);
    for (std::size_t n = 0; n < set.size(); ++n) {
        for (std::size_t i = 0; i < set[n].values.size(); ++i) {
            CHECK(back[n].values[i] == doctest::Approx(set[n].values[i]).epsilon(1e-13));
        }
    }
}

TEST_CASE("snapshot set validation")
{
    const GridSpec g{2, 2, 1};
    CHECK_THROWS_AS(SnapshotSet(g, 1.0, {Snapshot{{1, 2, 3}, 0.0}}), ShapeError);
    CHECK_THROWS_AS(SnapshotSet(g, 1.0, {Snapshot{{1, 2, 3, 4}, 0.0}, Snapshot{{1, 2, 3, 4}, 1.5}}), DomainError);
    CHECK_THROWS_AS(SnapshotSet(g, 1.0, {Snapshot{{1, 2, 3, std::nan("")}, 0.0}}), DomainError);
    CHECK_THROWS_AS(GridSpec({0, 1, 1}).validate(), ConfigError);
}

TEST_CASE("binary snapshot round trip")
{
    const GridSpec g{2, 2, 1, 0.5, 0.25, 1.0, -1.0, 2.0, 0.0};
    const SnapshotSet tiny(g, 1.0, {Snapshot{{1.5, -2.0, 3.25, 1e-300}, 0.0}});
    const auto p = temp_file("tiny.bin");
    save_snapshots(tiny, p);
    const auto loaded = load_snapshots(p);
    CHECK(loaded.grid() == g);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].values == tiny[0].values);
    CHECK(loaded[0].time == tiny[0].time);

    const auto big = ramp_set({80, 1, 160}, 1020, 0.1);
    const auto pb = temp_file("big.bin");
    save_snapshots(big, pb);
    const auto big_back = load_snapshots(pb);
    CHECK(big_back.size() == 1020);
    bool same = true;
    for (std::size_t n = 0; n < big.size(); ++n) same = same && big_back[n].values == big[n].values;
    CHECK(same);
    const auto pb2 = temp_file("big2.bin");
    save_snapshots(big_back, pb2);
    CHECK(read_bytes(pb) == read_bytes(pb2));
    fs::remove(pb);
    fs::remove(pb2);
}

TEST_CASE("corrupt snapshot files are rejected")
{
    const auto p = temp_file("cut.bin");
    save_snapshots(ramp_set({2, 2, 2}, 3), p);
    const std::string bytes = read_bytes(p);
    {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 5));
    }
    CHECK_THROWS_AS(load_snapshots(p), FormatError);
    {
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        out << "XXXX" << bytes.substr(4);
    }
    CHECK_THROWS_AS(load_snapshots(p), FormatError);
    CHECK_THROWS_AS(load_snapshots(temp_file("missing.bin")), IoError);
}

TEST_CASE("csv export has one row per cell and time")
{
    const auto p = temp_file("set.csv");
    export_csv(ramp_set({2, 1, 3}, 2), p);
    std::ifstream in(p);
    std::string header, line;
    std::getline(in, header);
    CHECK(header == "t,x,y,z,value");
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 12);
}

TEST_CASE("relative L2 error")
{
    const Snapshot truth{{3.0, 4.0}, 0.0};
    CHECK(relative_l2_error(truth, truth) == 0.0);
    CHECK(relative_l2_error(truth, Snapshot{{0.0, 0.0}, 0.0}) == doctest::Approx(100.0).epsilon(1e-15));
    CHECK(relative_l2_error(truth, Snapshot{{3.0, 0.0}, 0.0}) == doctest::Approx(80.0).epsilon(1e-15));
    CHECK_THROWS_AS(relative_l2_error(Snapshot{{0.0, 0.0}, 0.0}, truth), DomainError);
    CHECK_THROWS_AS(relative_l2_error(truth, Snapshot{{1.0}, 0.0}), ShapeError);
}
