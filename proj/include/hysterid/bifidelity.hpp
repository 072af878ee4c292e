#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "hysterid/neuralop.hpp"
#include "hysterid/simulate.hpp"

namespace hysterid {

enum class ProtocolKind { standard, bifidelity };

const char* to_string(ProtocolKind kind);
ProtocolKind protocol_from_string(const std::string& name);

/// Storage-grid indices of the m branch sensors: floor((i + 1) n_store / m) - 1.
std::vector<std::size_t> sensor_indices(std::size_t n_store, std::size_t m);

/// Branch input of one trajectory: y_lf (bi-fidelity) or the excitation
/// (standard) at the sensor indices. Throws InvalidInput if the series is missing.
Eigen::VectorXd branch_input(const TrajectoryPair& pair, ProtocolKind kind, std::size_t m);

/// Operator batch over trajectories. Targets are y_corr (bi-fidelity) or y_hf
/// (standard). `points_per_trajectory` = 0 keeps every storage point,
/// otherwise a sorted random subset of that size is drawn per trajectory.
OperatorBatch make_batch(const std::vector<TrajectoryPair>& trajectories, ProtocolKind kind, std::size_t m,
                         std::size_t points_per_trajectory = 0, std::uint64_t seed = 0);

/// y_lf + G(y_lf)(t, xi) on the trajectory's storage grid.
std::vector<double> predict_bifidelity(const DeepOnetModel& model, const TrajectoryPair& pair);
/// G(excitation)(t, xi).
std::vector<double> predict_standard(const DeepOnetModel& model, const TrajectoryPair& pair);
std::vector<double> predict_protocol(const DeepOnetModel& model, ProtocolKind kind, const TrajectoryPair& pair);

/// ||pred - val|| / ||val||. Throws InvalidInput for a zero-norm reference
/// or mismatched lengths.
double rel_rmse(const std::vector<double>& pred, const std::vector<double>& val);

struct Histogram {
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> counts;
};

/// Equal-width bins on [lo, hi]; the top edge is inclusive.
Histogram make_histogram(const std::vector<double>& values, double lo, double hi, std::size_t bins);
/// Sum over bins of min(p_a, p_b) with p the per-histogram bin fractions.
double histogram_overlap(const Histogram& a, const Histogram& b);

struct ValidationReport {
    std::string protocol;
    std::vector<double> errors;
    double mean = 0.0;
    Histogram histogram;
};

ValidationReport evaluate(const DeepOnetModel& model, ProtocolKind kind, const std::vector<TrajectoryPair>& val);
/// Errors of the zero-correction predictor y_hf ~ y_lf.
ValidationReport evaluate_passthrough(const std::vector<TrajectoryPair>& val);

/// N_std = round(n_bf (1 + r) / r), the standard-protocol size whose
/// simulation cost matches n_bf paired runs when one high-fidelity run
/// costs r low-fidelity runs.
std::size_t cost_equalized_size(std::size_t n_bf, double cost_ratio);

struct ExperimentSpec {
    DeepOnetArch arch;
    AdamConfig adam;
    std::size_t n_train_bf = 200;
    std::size_t n_train_std = 200;
    std::size_t n_val = 250;
    /// 0: every storage point.
    std::size_t points_per_trajectory = 0;
    std::size_t bins = 30;
    double cost_ratio = 1.0;
    std::function<void(const std::string&)> log;

    void validate() const;
};

/// Published network and optimizer settings per example.
ExperimentSpec default_experiment(ExampleId id);

struct ProtocolOutcome {
    ProtocolKind kind = ProtocolKind::bifidelity;
    std::size_t n_train = 0;
    DeepOnetModel model;
    TrainResult training;
    ValidationReport report;
};

struct ExperimentResult {
    std::uint64_t seed = 0;
    ProtocolOutcome standard;
    ProtocolOutcome bifidelity;
    ValidationReport passthrough;
    double overlap = 0.0;
    std::string dataset_hash;

    nlohmann::json summary() const;
};

/// Trains one protocol on the first n_train_bf (bi-fidelity) or
/// n_train_std (standard) training trajectories. The report is left empty.
ProtocolOutcome train_protocol(const Dataset& ds, ProtocolKind kind, const ExperimentSpec& spec, std::uint64_t seed);

/// Trains both protocols on the dataset prefixes of their sizes and scores
/// them on the first n_val validation trajectories. Histograms share 30 bins
/// over the pooled error range.
ExperimentResult run_experiment(const Dataset& ds, const ExperimentSpec& spec, std::uint64_t seed);

/// Writes report.json, hist_<protocol>.csv and errors_<protocol>.csv.
void write_experiment(const ExperimentResult& result, const ExperimentSpec& spec, const std::filesystem::path& dir);
void write_histogram_csv(const Histogram& h, const std::filesystem::path& path);
void write_errors_csv(const std::vector<double>& errors, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Sweeps. Every seed is a root seed: it fixes the dataset and the network
// initialization of that repetition.

struct SweepRow {
    double key = 0.0;  // N_tr, zeta_s or noise percentage
    double mean_standard = 0.0;
    double mean_bifidelity = 0.0;
    double mean_passthrough = 0.0;
    double overlap = 0.0;
    /// Per-seed mean errors, in seed order.
    std::vector<double> seed_standard;
    std::vector<double> seed_bifidelity;
    std::vector<double> seed_passthrough;

    double ratio() const { return mean_standard / mean_bifidelity; }
};

/// Both protocols use N_tr training trajectories at each size.
std::vector<SweepRow> sweep_training_size(const ExampleConfig& cfg, const ExperimentSpec& spec,
                                          const std::vector<std::size_t>& sizes,
                                          const std::vector<std::uint64_t>& seeds);
std::vector<SweepRow> sweep_pinching(const ExperimentSpec& spec, const std::vector<double>& zetas,
                                     const std::vector<std::uint64_t>& seeds);
std::vector<SweepRow> sweep_noise(const ExampleConfig& cfg, const ExperimentSpec& spec,
                                  const std::vector<double>& noise_pct, const std::vector<std::uint64_t>& seeds);

/// Header `<key_name>,mean_standard,mean_bifidelity,mean_passthrough,ratio,overlap`.
void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& key_name,
                     const std::filesystem::path& path);

/// Dataset seed used by the sweeps for a root seed.
std::uint64_t dataset_seed(std::uint64_t root);

}  // namespace hysterid
