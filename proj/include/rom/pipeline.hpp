#pragma once

#include "rom/config.hpp"
#include "rom/grid_data.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace rom {

enum class Phase { reconstruction, prediction };

std::string to_string(Phase p);

struct ErrorEntry {
    double time = 0.0;
    double error_pct = 0.0;
    Phase phase = Phase::reconstruction;
};

struct PhaseSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double max = 0.0;
};

struct ErrorReport {
    std::vector<ErrorEntry> entries;
    PhaseSummary reconstruction;
    PhaseSummary prediction;

    /// Mean of the first n prediction-phase errors.
    double prediction_mean_first(std::size_t n) const;
};

/// Per-time relative L2 errors; times before split_time are labelled
/// reconstruction, the rest prediction. Throws ShapeError on mismatched grids
/// or time axes.
ErrorReport evaluate(const SnapshotSet& truth, const SnapshotSet& rom, double split_time);

/// report.csv: t,error_pct,phase.
void save_report_csv(const ErrorReport& report, const std::filesystem::path& path);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct PipelineResult {
    ErrorReport report;
    std::size_t train_count = 0;
    double cae_training_error = 0.0;
    std::vector<double> cae_loss;
    std::vector<StageTiming> timings;
};

/// Full run: split, train the autoencoder, encode, train the reservoir,
/// reconstruct the training window, forecast the validation window, decode,
/// evaluate, and write every artifact into config.out_dir. Stage failures are
/// rethrown as rom::Error prefixed with the stage name.
PipelineResult run_pipeline(const PipelineConfig& config);

/// Snapshot indices written under fields/: the same relative positions along
/// the timeline as the reference figures (0.25, 0.5, 0.91, 0.96, 1.0).
std::vector<std::size_t> field_output_indices(std::size_t total);

} // namespace rom
