// Command-line front end for the reduced-order forecasting toolkit.

#include "rom/autoencoder.hpp"
#include "rom/config.hpp"
#include "rom/error.hpp"
#include "rom/grid_data.hpp"
#include "rom/pipeline.hpp"
#include "rom/reservoir.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
    std::string config;
    std::string preset;
    std::optional<std::uint64_t> seed;
    std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "key = value configuration file");
    cmd->add_option("--preset", o.preset, "base preset")->check(CLI::IsMember(rom::preset_names()));
    cmd->add_option("--seed", o.seed, "global seed override");
    cmd->add_option("--out", o.out, "output directory override");
}

rom::PipelineConfig resolve(const CommonOptions& o)
{
    std::optional<std::string> preset;
    if (!o.preset.empty()) preset = o.preset;
    rom::PipelineConfig cfg;
    if (!o.config.empty()) {
        cfg = rom::load_config(o.config, preset);
    } else if (preset) {
        cfg = rom::preset_config(*preset);
    } else {
        cfg.set_seed(0);
    }
    if (o.seed) cfg.set_seed(*o.seed);
    if (!o.out.empty()) cfg.out_dir = o.out;
    return cfg;
}

void print_report_summary(const rom::ErrorReport& r)
{
    std::cout << std::fixed << std::setprecision(4);
    std::cout << "reconstruction: " << r.reconstruction.count << " snapshots, mean " << r.reconstruction.mean
              << " %, max " << r.reconstruction.max << " %\n";
    std::cout << "prediction:     " << r.prediction.count << " snapshots, mean " << r.prediction.mean << " %, max "
              << r.prediction.max << " %\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Reduced-order forecasting: convolutional autoencoder + echo-state reservoir"};
    app.require_subcommand(1);

    CommonOptions gen_o, cae_o, enc_o, rc_o, fc_o, ev_o, pipe_o;

    auto* gen = app.add_subcommand("generate", "generate a synthetic snapshot series");
    add_common(gen, gen_o);
    bool gen_csv = false;
    gen->add_flag("--csv", gen_csv, "also write snapshots.csv");

    auto* train_cae = app.add_subcommand("train-cae", "train the autoencoder on the training split");
    add_common(train_cae, cae_o);
    std::string cae_data;
    train_cae->add_option("--data", cae_data, "snapshot file (default: configured source)");

    auto* encode = app.add_subcommand("encode", "encode snapshots into a latent trajectory");
    add_common(encode, enc_o);
    std::string enc_model, enc_data;
    encode->add_option("--model", enc_model, "autoencoder checkpoint")->required();
    encode->add_option("--data", enc_data, "snapshot file")->required();

    auto* train_rc = app.add_subcommand("train-rc", "fit the reservoir readout on a latent trajectory");
    add_common(train_rc, rc_o);
    std::string rc_latents;
    train_rc->add_option("--latents", rc_latents, "latent CSV")->required();

    auto* forecast = app.add_subcommand("forecast", "autoregressive latent forecast");
    add_common(forecast, fc_o);
    std::string fc_model, fc_latents, fc_cae;
    std::size_t fc_steps = 0;
    forecast->add_option("--model", fc_model, "reservoir checkpoint")->required();
    forecast->add_option("--latents", fc_latents, "warmup latent CSV")->required();
    forecast->add_option("--steps", fc_steps, "forecast length")->required();
    forecast->add_option("--cae", fc_cae, "autoencoder checkpoint to decode the forecast");

    auto* evaluate = app.add_subcommand("evaluate", "relative L2 error of a ROM series against the truth");
    add_common(evaluate, ev_o);
    std::string ev_truth, ev_rom;
    std::optional<double> ev_split;
    evaluate->add_option("--truth", ev_truth, "reference snapshot file")->required();
    evaluate->add_option("--rom", ev_rom, "approximate snapshot file")->required();
    evaluate->add_option("--split-time", ev_split, "start of the prediction phase");

    auto* pipeline = app.add_subcommand("pipeline", "run the full train/forecast/evaluate pipeline");
    add_common(pipeline, pipe_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        if (*gen) {
            auto cfg = resolve(gen_o);
            fs::create_directories(cfg.out_dir);
            const auto set = rom::acquire_snapshots(cfg.data);
            rom::save_snapshots(set, cfg.out_dir / "snapshots.bin");
            if (gen_csv) rom::export_csv(set, cfg.out_dir / "snapshots.csv");
            const auto& g = set.grid();
            std::cout << "wrote " << set.size() << " snapshots on a " << g.nx << "x" << g.ny << "x" << g.nz
                      << " grid to " << (cfg.out_dir / "snapshots.bin").string() << "\n";
        } else if (*train_cae) {
            auto cfg = resolve(cae_o);
            if (!cae_data.empty()) {
                cfg.data.from_file = true;
                cfg.data.path = cae_data;
            }
            fs::create_directories(cfg.out_dir);
            const auto set = rom::acquire_snapshots(cfg.data);
            const auto [train, valid] = rom::split(set, cfg.train_fraction);
            auto model = rom::CaeModel::build(cfg.cae, set.grid());
            const auto log = model.train(train);
            model.save(cfg.out_dir / "cae.romw");
            std::cout << "parameters: " << model.parameter_count() << "\n";
            if (!log.epoch_loss.empty()) std::cout << "final loss: " << log.epoch_loss.back() << "\n";
            std::cout << "training relative L2 [%]: " << model.training_error() << "\n";
            std::cout << "validation relative L2 [%]: " << model.mean_reconstruction_error(valid) << "\n";
        } else if (*encode) {
            auto cfg = resolve(enc_o);
            fs::create_directories(cfg.out_dir);
            const auto model = rom::CaeModel::load(enc_model);
            const auto latents = model.encode_set(rom::load_snapshots(enc_data));
            rom::save_latents_csv(latents, cfg.out_dir / "latents.csv");
            std::cout << "encoded " << latents.size() << " snapshots into " << latents.dim() << " latent components\n";
        } else if (*train_rc) {
            auto cfg = resolve(rc_o);
            fs::create_directories(cfg.out_dir);
            const auto latents = rom::load_latents_csv(rc_latents);
            auto esn = rom::EsnModel::init(cfg.esn, latents.dim());
            esn.train(latents);
            esn.save(cfg.out_dir / "esn.rome");
            std::cout << "trained readout on " << latents.size() - 1 << " columns, N_h = " << esn.reservoir_size()
                      << "\n";
        } else if (*forecast) {
            auto cfg = resolve(fc_o);
            fs::create_directories(cfg.out_dir);
            const auto esn = rom::EsnModel::load(fc_model);
            const auto pred = esn.forecast(rom::load_latents_csv(fc_latents), fc_steps);
            rom::save_latents_csv(pred, cfg.out_dir / "latents_pred.csv");
            if (!fc_cae.empty() && !pred.empty()) {
                const auto cae = rom::CaeModel::load(fc_cae);
                rom::save_snapshots(cae.decode_set(pred), cfg.out_dir / "forecast.bin");
            }
            std::cout << "forecast " << pred.size() << " steps\n";
        } else if (*evaluate) {
            auto cfg = resolve(ev_o);
            const auto truth = rom::load_snapshots(ev_truth);
            const auto approx = rom::load_snapshots(ev_rom);
            const double split_time =
                ev_split ? *ev_split : (truth.empty() ? 0.0 : truth[truth.size() - 1].time + truth.dt());
            const auto report = rom::evaluate(truth, approx, split_time);
            fs::create_directories(cfg.out_dir);
            rom::save_report_csv(report, cfg.out_dir / "report.csv");
            print_report_summary(report);
        } else if (*pipeline) {
            auto cfg = resolve(pipe_o);
            const auto result = rom::run_pipeline(cfg);
            print_report_summary(result.report);
            std::cout << "outputs in " << cfg.out_dir.string() << "\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
