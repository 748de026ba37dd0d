#pragma once
// JSON and CSV encodings. Field names are snake_case; optional values are
// null when absent, except SystemConfig::aiw which is "disabled".

#include <iosfwd>
#include <vector>

#include <json.hpp>

#include "proxcon/harness.hpp"

namespace proxcon {

using nlohmann::json;

void to_json(json& j, const SystemConfig& v);
void from_json(const json& j, SystemConfig& v);
void to_json(json& j, const TrueProcess& v);
void from_json(const json& j, TrueProcess& v);
void to_json(json& j, const Observation& v);
void from_json(const json& j, Observation& v);
void to_json(json& j, const RoundObservations& v);
void from_json(const json& j, RoundObservations& v);
void to_json(json& j, const Interval& v);
void from_json(const json& j, Interval& v);
void to_json(json& j, const ConsensusResult& v);
void from_json(const json& j, ConsensusResult& v);
void to_json(json& j, const NigParams& v);
void from_json(const json& j, NigParams& v);
void to_json(json& j, const PredictiveModel& v);
void from_json(const json& j, PredictiveModel& v);
void to_json(json& j, const ErrorStdEstimator& v);
void from_json(const json& j, ErrorStdEstimator& v);
void to_json(json& j, const AttackSpec& v);
void from_json(const json& j, AttackSpec& v);
void to_json(json& j, const BoundReport& v);
void from_json(const json& j, BoundReport& v);
void to_json(json& j, const Partition& v);
void from_json(const json& j, Partition& v);
void to_json(json& j, const NetModel& v);
void from_json(const json& j, NetModel& v);
void to_json(json& j, const TrialRecord& v);
void from_json(const json& j, TrialRecord& v);
void to_json(json& j, const CoinflipProbabilities& v);
void from_json(const json& j, CoinflipProbabilities& v);
void to_json(json& j, const AutoTrials& v);
void from_json(const json& j, AutoTrials& v);
void to_json(json& j, const IntervalFigurePlan& v);
void from_json(const json& j, IntervalFigurePlan& v);
void to_json(json& j, const ExperimentPlan& v);
void from_json(const json& j, ExperimentPlan& v);
void to_json(json& j, const CellReport& v);
void from_json(const json& j, CellReport& v);
void to_json(json& j, const Comparison& v);
void from_json(const json& j, Comparison& v);
void to_json(json& j, const AggregateReport& v);
void from_json(const json& j, AggregateReport& v);
void to_json(json& j, const IntervalProbe& v);
void from_json(const json& j, IntervalProbe& v);

// Parses a plan, wrapping any JSON error as ParseError.
ExperimentPlan parse_plan(const std::string& text);

// Figure series: fig4a (no attack) and fig4b (attack) per-cell medians, and
// fig4c probe bands.
json figure_data(const AggregateReport& agg, const std::vector<IntervalProbe>& probes);

// One row per record; columns follow the TrialRecord field order. Doubles
// are written with 17 significant digits so a read restores them exactly.
void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> read_trials_csv(std::istream& is);

}  // namespace proxcon
