#include "rom/pipeline.hpp"

#include "rom/autoencoder.hpp"
#include "rom/error.hpp"
#include "rom/reservoir.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace rom {

std::string to_string(Phase p) { return p == Phase::reconstruction ? "reconstruction" : "prediction"; }

double ErrorReport::prediction_mean_first(std::size_t n) const
{
    double sum = 0.0;
    std::size_t seen = 0;
    for (const auto& e : entries) {
        if (e.phase != Phase::prediction) continue;
        if (seen == n) break;
        sum += e.error_pct;
        ++seen;
    }
    if (seen == 0) throw DomainError("report has no prediction-phase entries");
    return sum / static_cast<double>(seen);
}

ErrorReport evaluate(const SnapshotSet& truth, const SnapshotSet& rom, double split_time)
{
    const auto& a = truth.grid();
    const auto& b = rom.grid();
    if (!(a == b)) {
        std::ostringstream os;
        os << "grid mismatch: truth is " << a.nx << "x" << a.ny << "x" << a.nz << " (dx " << a.dx << "), rom is "
           << b.nx << "x" << b.ny << "x" << b.nz << " (dx " << b.dx << ")";
        throw ShapeError(os.str());
    }
    if (truth.size() != rom.size()) {
        throw ShapeError("time mismatch: truth has " + std::to_string(truth.size()) + " snapshots, rom has " +
                         std::to_string(rom.size()));
    }
    ErrorReport report;
    const double tol = 1e-9 * truth.dt();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (std::abs(truth[i].time - rom[i].time) > tol) {
            throw ShapeError("time mismatch at index " + std::to_string(i));
        }
        const Phase phase = truth[i].time < split_time - tol ? Phase::reconstruction : Phase::prediction;
        report.entries.push_back({truth[i].time, relative_l2_error(truth[i], rom[i]), phase});
    }
    for (const auto& e : report.entries) {
        auto& s = e.phase == Phase::reconstruction ? report.reconstruction : report.prediction;
        ++s.count;
        s.mean += e.error_pct;
        s.max = std::max(s.max, e.error_pct);
    }
    if (report.reconstruction.count) report.reconstruction.mean /= static_cast<double>(report.reconstruction.count);
    if (report.prediction.count) report.prediction.mean /= static_cast<double>(report.prediction.count);
    return report;
}

void save_report_csv(const ErrorReport& report, const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << "t,error_pct,phase\n" << std::setprecision(17);
    for (const auto& e : report.entries) os << e.time << ',' << e.error_pct << ',' << to_string(e.phase) << '\n';
    if (!os) throw IoError("write failed: " + path.string());
}

std::vector<std::size_t> field_output_indices(std::size_t total)
{
    std::vector<std::size_t> out;
    if (total == 0) return out;
    for (double f : {0.25, 0.5, 0.91, 0.96, 1.0}) {
        const auto pos = static_cast<std::size_t>(std::llround(f * static_cast<double>(total)));
        const std::size_t idx = std::clamp<std::size_t>(pos, 1, total) - 1;
        if (out.empty() || out.back() != idx) out.push_back(idx);
    }
    return out;
}

namespace {

using Clock = std::chrono::steady_clock;

// Per-component affine map of latents to [-1, 1] over the training window.
struct LatentScaling {
    std::vector<NormStats> stats;

    static LatentScaling fit(const LatentTrajectory& t)
    {
        LatentScaling s;
        s.stats.assign(t.dim(), NormStats{std::numeric_limits<double>::infinity(),
                                          -std::numeric_limits<double>::infinity()});
        for (const auto& v : t.vectors) {
            for (std::size_t d = 0; d < v.size(); ++d) {
                s.stats[d].vmin = std::min(s.stats[d].vmin, v[d]);
                s.stats[d].vmax = std::max(s.stats[d].vmax, v[d]);
            }
        }
        return s;
    }

    LatentTrajectory apply(LatentTrajectory t, bool forward) const
    {
        for (auto& v : t.vectors) {
            for (std::size_t d = 0; d < v.size(); ++d) {
                v[d] = forward ? normalize_value(v[d], stats[d]) : denormalize_value(v[d], stats[d]);
            }
        }
        return t;
    }
};

template <typename F>
auto stage(const char* name, std::vector<StageTiming>& timings, F&& body)
{
    const auto start = Clock::now();
    auto record = [&] {
        timings.push_back({name, std::chrono::duration<double>(Clock::now() - start).count()});
    };
    try {
        if constexpr (std::is_void_v<decltype(body())>) {
            body();
            record();
        } else {
            auto r = body();
            record();
            return r;
        }
    } catch (const DivergenceError& e) {
        throw DivergenceError(std::string(name) + ": " + e.what());
    } catch (const Error& e) {
        throw Error(std::string(name) + ": " + e.what());
    }
}

void write_summary(const PipelineConfig& cfg, const PipelineResult& r, std::size_t total,
                   const std::filesystem::path& path)
{
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << std::fixed << std::setprecision(4);
    os << "preset: " << (cfg.preset.empty() ? "(none)" : cfg.preset) << "\n";
    os << "seed: " << cfg.seed << "\n";
    os << "snapshots: " << total << " (train " << r.train_count << ", validation " << total - r.train_count << ")\n";
    os << "cae: L=" << cfg.cae.levels << " n_f=" << cfg.cae.blocks_per_level << " N_d=" << cfg.cae.latent_dim
       << " epochs=" << cfg.cae.epochs << "\n";
    os << "esn: N_h=" << cfg.esn.reservoir_size << " alpha=" << cfg.esn.alpha << " lambda=" << cfg.esn.lambda << "\n";
    os << "cae training relative L2 [%]: " << r.cae_training_error << "\n";
    os << "reconstruction error [%]: mean " << r.report.reconstruction.mean << ", max " << r.report.reconstruction.max
       << "\n";
    os << "prediction error [%]: mean " << r.report.prediction.mean << ", max " << r.report.prediction.max << "\n";
    os << "stage timings [s]:\n";
    for (const auto& t : r.timings) os << "  " << t.stage << ": " << t.seconds << "\n";
}

} // namespace

PipelineResult run_pipeline(const PipelineConfig& config)
{
    config.validate();
    PipelineResult result;
    auto& timings = result.timings;
    const auto& out = config.out_dir;
    std::filesystem::create_directories(out / "fields");

    const auto data = stage("data", timings, [&] { return acquire_snapshots(config.data); });
    auto [train_set, valid_set] = stage("split", timings, [&] { return split(data, config.train_fraction); });
    result.train_count = train_set.size();

    CaeModel cae = stage("train-cae", timings, [&] {
        auto m = CaeModel::build(config.cae, data.grid());
        auto log = m.train(train_set);
        result.cae_loss = log.epoch_loss;
        m.save(out / "cae.romw");
        return m;
    });
    result.cae_training_error = cae.training_error();

    const auto latents = stage("encode", timings, [&] {
        auto l = cae.encode_set(data);
        save_latents_csv(l, out / "latents_truth.csv");
        return l;
    });
    const auto train_latents = latents.slice(0, train_set.size());

    const LatentScaling scaling = config.scale_latents ? LatentScaling::fit(train_latents) : LatentScaling{};
    auto to_esn = [&](const LatentTrajectory& t) { return config.scale_latents ? scaling.apply(t, true) : t; };
    auto from_esn = [&](const LatentTrajectory& t) { return config.scale_latents ? scaling.apply(t, false) : t; };

    const EsnModel esn = stage("train-rc", timings, [&] {
        auto m = EsnModel::init(config.esn, config.cae.latent_dim);
        m.train(to_esn(train_latents));
        m.save(out / "esn.rome");
        return m;
    });

    const auto predicted = stage("forecast", timings, [&] {
        save_latents_csv(from_esn(esn.teacher_forced(to_esn(train_latents))), out / "latents_onestep.csv");
        auto p = from_esn(esn.forecast(to_esn(train_latents), valid_set.size()));
        save_latents_csv(p, out / "latents_pred.csv");
        return p;
    });

    const auto rom = stage("decode", timings, [&] {
        // Training window: autoencoder reconstruction; validation window: forecast.
        std::vector<Snapshot> fields;
        fields.reserve(data.size());
        for (std::size_t i = 0; i < train_set.size(); ++i) {
            fields.push_back(cae.decode(latents.vectors[i], data[i].time));
        }
        for (std::size_t i = 0; i < predicted.size(); ++i) {
            fields.push_back(cae.decode(predicted.vectors[i], data[train_set.size() + i].time));
        }
        return SnapshotSet(data.grid(), data.dt(), std::move(fields));
    });

    stage("evaluate", timings, [&] {
        result.report = evaluate(data, rom, valid_set[0].time);
        save_report_csv(result.report, out / "report.csv");
        for (auto idx : field_output_indices(data.size())) {
            std::ostringstream name;
            name << std::setw(5) << std::setfill('0') << idx;
            save_snapshots(data.slice(idx, 1), out / "fields" / ("truth_" + name.str() + ".bin"));
            save_snapshots(rom.slice(idx, 1), out / "fields" / ("rom_" + name.str() + ".bin"));
        }
    });

    write_summary(config, result, data.size(), out / "summary.txt");
    return result;
}

} // namespace rom
