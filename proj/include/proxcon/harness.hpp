#pragma once
// Experiment runner: per-cell training and measurement trials for PC and
// VC, aggregation, the interval-guarantee probe series, and output files.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "proxcon/simnet.hpp"

namespace proxcon {

// ceil(z^2 * sigma_sq / e^2), robust to representation error in the quotient.
long sample_size(double z, double sigma_sq, double e);

enum class AttackMode { None, Optimal };
std::string_view to_string(AttackMode m) noexcept;
AttackMode parse_attack_mode(std::string_view s);

// per_trial: a trial's ideal output is drawn once and every round of the
// trial (training and measured) observes it. per_round: a fresh ideal output
// every round.
enum class StreamMode { PerTrial, PerRound };
std::string_view to_string(StreamMode m) noexcept;
StreamMode parse_stream_mode(std::string_view s);

// Trial count derived from a pilot run: sample_size(z, pilot variance of the
// percent error, e), clamped to [pilot, max_trials].
struct AutoTrials {
    double z = 3.09;
    double e = 0.05;
    int pilot = 50;
    int max_trials = 5000;

    bool operator==(const AutoTrials&) const = default;
};

struct IntervalFigurePlan {
    int f = 1;
    double sigma_eps = 0.06;
    int warmup_rounds = 500;
    int probes = 100;
    std::vector<AttackMode> attacks{AttackMode::None};

    bool operator==(const IntervalFigurePlan&) const = default;
};

struct ExperimentPlan {
    TrueProcess process;                         // sigma_eps is overridden per cell
    std::vector<int> f_values{1};
    std::vector<double> sigma_eps_values{0.06};
    int trials = 500;
    std::optional<AutoTrials> auto_trials;
    std::vector<AttackMode> attacks{AttackMode::None};
    AttackDirection attack_direction = AttackDirection::WorstOfBoth;
    int training_rounds = 5;
    std::uint64_t seed = 0;
    std::vector<Protocol> protocols{Protocol::PC, Protocol::VC};
    StreamMode stream = StreamMode::PerTrial;
    bool train_with_byzantine = false;
    double min_confidence = 0.5;
    NigParams prior;                             // (294, 1, 1, 1)
    ErrorStdEstimator error_prior;               // starting sigma_eps estimator
    NetModel net = NetModel::reliable();
    double search_step = 0.0;                    // 0 = scale / 1000
    std::optional<IntervalFigurePlan> interval_figure;

    bool operator==(const ExperimentPlan&) const = default;
};

// Throws BadConfig for an unusable plan.
void validate_plan(const ExperimentPlan& plan);

struct CellReport {
    int f = 0;
    double sigma_eps = 0.0;
    Protocol protocol = Protocol::PC;
    AttackMode attack = AttackMode::None;
    int trials = 0;
    int excluded_zero = 0;      // true output 0: no percent error
    int undecided = 0;          // fewer than 2f+1 messages delivered
    double median_pct_error = 0.0;
    double max_pct_error = 0.0;
    double coverage = 0.0;
    double mean_ig_width = 0.0;
    double mean_hull_width = 0.0;

    bool operator==(const CellReport&) const = default;
};

struct Comparison {
    int f = 0;
    double sigma_eps = 0.0;
    AttackMode attack = AttackMode::None;
    double pc_median = 0.0;
    double vc_median = 0.0;
    double reduction = 0.0;     // 1 - pc_median / vc_median

    bool operator==(const Comparison&) const = default;
};

struct AggregateReport {
    std::vector<CellReport> cells;
    std::vector<Comparison> comparisons;

    bool operator==(const AggregateReport&) const = default;
};

struct IntervalProbe {
    int probe = 0;
    AttackMode attack = AttackMode::None;
    double true_output = 0.0;
    double pc_value = 0.0;
    std::vector<Interval> pc_bands;   // 1, 2 and 3 sigma_eps
    double vc_value = 0.0;
    Interval vc_hull;

    bool operator==(const IntervalProbe&) const = default;
};

struct ExperimentResult {
    std::vector<TrialRecord> records;
    AggregateReport aggregate;
    std::vector<IntervalProbe> figure;
};

// Worker threads for trials: PROXCON_WORKERS, else the hardware concurrency.
int worker_count();

ExperimentResult run_experiment(const ExperimentPlan& plan);

AggregateReport aggregate(const std::vector<TrialRecord>& records);

// Runs the probe series described by plan.interval_figure.
std::vector<IntervalProbe> interval_figure(const ExperimentPlan& plan);

// Writes trials.csv, aggregate.json and figure_data.json into `dir`.
void write_outputs(const std::filesystem::path& dir, const ExperimentResult& result);

}  // namespace proxcon
