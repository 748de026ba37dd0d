#include "proxcon/serialization.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace proxcon {

namespace {

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) it->get_to(out);
}

template <typename T>
json opt_json(const std::optional<T>& v) {
    return v ? json(*v) : json(nullptr);
}

template <typename T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
    out.reset();
    if (auto it = j.find(key); it != j.end() && !it->is_null()) out = it->get<T>();
}

ErrorCode parse_error_code(const std::string& s) {
    for (int c = 0; c <= static_cast<int>(ErrorCode::ParseError); ++c) {
        if (to_string(static_cast<ErrorCode>(c)) == s) return static_cast<ErrorCode>(c);
    }
    throw Error(ErrorCode::ParseError, "unknown error code '" + s + "'");
}

template <typename E, typename Parse>
std::vector<E> enum_list(const json& j, Parse parse) {
    std::vector<E> out;
    if (j.is_string()) {
        out.push_back(parse(j.get<std::string>()));
    } else {
        for (const auto& e : j) out.push_back(parse(e.get<std::string>()));
    }
    return out;
}

template <typename E>
json enum_names(const std::vector<E>& v) {
    json a = json::array();
    for (E e : v) a.push_back(std::string(to_string(e)));
    return a;
}

}  // namespace

void to_json(json& j, const SystemConfig& v) {
    j = {{"f", v.f},
         {"n", v.n},
         {"confidence_level", v.confidence_level},
         {"aiw", v.aiw ? json(*v.aiw) : json("disabled")},
         {"min_confidence", v.min_confidence}};
}

void from_json(const json& j, SystemConfig& v) {
    read_opt(j, "f", v.f);
    read_opt(j, "n", v.n);
    read_opt(j, "confidence_level", v.confidence_level);
    read_opt(j, "min_confidence", v.min_confidence);
    v.aiw.reset();
    if (auto it = j.find("aiw"); it != j.end()) {
        if (it->is_number()) {
            v.aiw = it->get<double>();
        } else if (!(it->is_null() || (it->is_string() && it->get<std::string>() == "disabled"))) {
            throw Error(ErrorCode::ParseError, "aiw must be a number or \"disabled\"");
        }
    }
}

void to_json(json& j, const TrueProcess& v) {
    j = {{"mu", v.mu}, {"sigma", v.sigma}, {"sigma_eps", v.sigma_eps}, {"mu_eps", v.mu_eps}};
}

void from_json(const json& j, TrueProcess& v) {
    read_opt(j, "mu", v.mu);
    read_opt(j, "sigma", v.sigma);
    read_opt(j, "sigma_eps", v.sigma_eps);
    read_opt(j, "mu_eps", v.mu_eps);
}

void to_json(json& j, const Observation& v) { j = {{"replica_id", v.replica_id}, {"value", v.value}}; }

void from_json(const json& j, Observation& v) {
    j.at("replica_id").get_to(v.replica_id);
    j.at("value").get_to(v.value);
}

void to_json(json& j, const RoundObservations& v) {
    j = {{"round_id", v.round_id}, {"values", v.values}, {"true_output", opt_json(v.true_output)}};
}

void from_json(const json& j, RoundObservations& v) {
    read_opt(j, "round_id", v.round_id);
    j.at("values").get_to(v.values);
    read_optional(j, "true_output", v.true_output);
}

void to_json(json& j, const Interval& v) { j = {{"low", v.low}, {"high", v.high}}; }

void from_json(const json& j, Interval& v) {
    j.at("low").get_to(v.low);
    j.at("high").get_to(v.high);
}

void to_json(json& j, const ConsensusResult& v) {
    j = {{"value", v.value},         {"quorum", v.quorum},       {"cond_prob", v.cond_prob},
         {"ig", v.ig},               {"confident", v.confident}, {"messages_used", v.messages_used},
         {"quorum_prob", v.quorum_prob}};
}

void from_json(const json& j, ConsensusResult& v) {
    j.at("value").get_to(v.value);
    j.at("quorum").get_to(v.quorum);
    j.at("cond_prob").get_to(v.cond_prob);
    j.at("ig").get_to(v.ig);
    read_opt(j, "confident", v.confident);
    read_opt(j, "messages_used", v.messages_used);
    read_opt(j, "quorum_prob", v.quorum_prob);
}

void to_json(json& j, const NigParams& v) {
    j = {{"mu0", v.mu0}, {"nu", v.nu}, {"alpha", v.alpha}, {"beta", v.beta}};
}

void from_json(const json& j, NigParams& v) {
    read_opt(j, "mu0", v.mu0);
    read_opt(j, "nu", v.nu);
    read_opt(j, "alpha", v.alpha);
    read_opt(j, "beta", v.beta);
}

void to_json(json& j, const PredictiveModel& v) {
    j = {{"loc", v.loc},
         {"scale", v.scale},
         {"dof", v.dof},
         {"sigma_xy", v.sigma_xy},
         {"sigma_eps_hat", v.sigma_eps_hat},
         {"sigma_xy_approximate", v.sigma_xy_approximate}};
}

void from_json(const json& j, PredictiveModel& v) {
    j.at("loc").get_to(v.loc);
    j.at("scale").get_to(v.scale);
    j.at("dof").get_to(v.dof);
    read_opt(j, "sigma_xy", v.sigma_xy);
    read_opt(j, "sigma_eps_hat", v.sigma_eps_hat);
    read_opt(j, "sigma_xy_approximate", v.sigma_xy_approximate);
}

void to_json(json& j, const ErrorStdEstimator& v) {
    j = {{"pseudo_count", v.pseudo_count},
         {"prior_estimate", v.prior_estimate},
         {"sum_sq", v.sum_sq},
         {"rounds", v.rounds}};
}

void from_json(const json& j, ErrorStdEstimator& v) {
    read_opt(j, "pseudo_count", v.pseudo_count);
    read_opt(j, "prior_estimate", v.prior_estimate);
    read_opt(j, "sum_sq", v.sum_sq);
    read_opt(j, "rounds", v.rounds);
}

void to_json(json& j, const AttackSpec& v) {
    j = {{"direction", std::string(to_string(v.direction))}, {"f", v.f}};
}

void from_json(const json& j, AttackSpec& v) {
    if (j.contains("direction")) v.direction = parse_attack_direction(j.at("direction").get<std::string>());
    read_opt(j, "f", v.f);
}

void to_json(json& j, const BoundReport& v) {
    j = {{"omega", v.omega},
         {"a_low", v.a_low},
         {"a_high", v.a_high},
         {"delta_s", v.delta_s},
         {"delta_i", v.delta_i},
         {"eps_low", opt_json(v.eps_low)},
         {"eps_high", opt_json(v.eps_high)},
         {"c_eps", v.c_eps},
         {"sigma_xy_sq", v.sigma_xy_sq},
         {"warning", v.warning ? json(std::string(to_string(*v.warning))) : json(nullptr)}};
}

void from_json(const json& j, BoundReport& v) {
    j.at("omega").get_to(v.omega);
    j.at("a_low").get_to(v.a_low);
    j.at("a_high").get_to(v.a_high);
    j.at("delta_s").get_to(v.delta_s);
    j.at("delta_i").get_to(v.delta_i);
    read_optional(j, "eps_low", v.eps_low);
    read_optional(j, "eps_high", v.eps_high);
    j.at("c_eps").get_to(v.c_eps);
    read_opt(j, "sigma_xy_sq", v.sigma_xy_sq);
    v.warning.reset();
    if (auto it = j.find("warning"); it != j.end() && !it->is_null()) {
        v.warning = parse_error_code(it->get<std::string>());
    }
}

void to_json(json& j, const Partition& v) {
    j = {{"replicas", v.replicas}, {"start", v.start}, {"end", v.end}};
}

void from_json(const json& j, Partition& v) {
    j.at("replicas").get_to(v.replicas);
    j.at("start").get_to(v.start);
    j.at("end").get_to(v.end);
}

void to_json(json& j, const NetModel& v) {
    j = {{"drop_prob", v.drop_prob},
         {"latency_mean", opt_json(v.latency_mean)},
         {"partitions", v.partitions},
         {"seed", v.seed}};
}

void from_json(const json& j, NetModel& v) {
    read_opt(j, "drop_prob", v.drop_prob);
    if (j.contains("latency_mean")) read_optional(j, "latency_mean", v.latency_mean);
    read_opt(j, "partitions", v.partitions);
    read_opt(j, "seed", v.seed);
}

void to_json(json& j, const TrialRecord& v) {
    j = {{"trial_id", v.trial_id},
         {"protocol", std::string(to_string(v.protocol))},
         {"true_output", v.true_output},
         {"decided", v.decided},
         {"pct_error", opt_json(v.pct_error)},
         {"ig_low", v.ig_low},
         {"ig_high", v.ig_high},
         {"covered", v.covered},
         {"confident", v.confident},
         {"attack_direction", v.attack_direction},
         {"messages_used", v.messages_used},
         {"f", v.f},
         {"sigma_eps", v.sigma_eps}};
}

void from_json(const json& j, TrialRecord& v) {
    j.at("trial_id").get_to(v.trial_id);
    v.protocol = parse_protocol(j.at("protocol").get<std::string>());
    j.at("true_output").get_to(v.true_output);
    j.at("decided").get_to(v.decided);
    read_optional(j, "pct_error", v.pct_error);
    j.at("ig_low").get_to(v.ig_low);
    j.at("ig_high").get_to(v.ig_high);
    j.at("covered").get_to(v.covered);
    j.at("confident").get_to(v.confident);
    j.at("attack_direction").get_to(v.attack_direction);
    j.at("messages_used").get_to(v.messages_used);
    read_opt(j, "f", v.f);
    read_opt(j, "sigma_eps", v.sigma_eps);
}

void to_json(json& j, const CoinflipProbabilities& v) { j = {{"p0t", v.p0}, {"p1t", v.p1}, {"p2t", v.p2}}; }

void from_json(const json& j, CoinflipProbabilities& v) {
    j.at("p0t").get_to(v.p0);
    j.at("p1t").get_to(v.p1);
    j.at("p2t").get_to(v.p2);
}

void to_json(json& j, const AutoTrials& v) {
    j = {{"z", v.z}, {"e", v.e}, {"pilot", v.pilot}, {"max_trials", v.max_trials}};
}

void from_json(const json& j, AutoTrials& v) {
    read_opt(j, "z", v.z);
    read_opt(j, "e", v.e);
    read_opt(j, "pilot", v.pilot);
    read_opt(j, "max_trials", v.max_trials);
}

void to_json(json& j, const IntervalFigurePlan& v) {
    j = {{"f", v.f},
         {"sigma_eps", v.sigma_eps},
         {"warmup_rounds", v.warmup_rounds},
         {"probes", v.probes},
         {"attacks", enum_names(v.attacks)}};
}

void from_json(const json& j, IntervalFigurePlan& v) {
    read_opt(j, "f", v.f);
    read_opt(j, "sigma_eps", v.sigma_eps);
    read_opt(j, "warmup_rounds", v.warmup_rounds);
    read_opt(j, "probes", v.probes);
    if (j.contains("attacks")) v.attacks = enum_list<AttackMode>(j.at("attacks"), parse_attack_mode);
}

void to_json(json& j, const ExperimentPlan& v) {
    j = {{"process", v.process},
         {"f_values", v.f_values},
         {"sigma_eps_values", v.sigma_eps_values},
         {"trials", v.auto_trials ? json("auto") : json(v.trials)},
         {"auto_trials", opt_json(v.auto_trials)},
         {"attack", enum_names(v.attacks)},
         {"attack_direction", std::string(to_string(v.attack_direction))},
         {"training_rounds", v.training_rounds},
         {"seed", v.seed},
         {"protocols", enum_names(v.protocols)},
         {"stream", std::string(to_string(v.stream))},
         {"train_with_byzantine", v.train_with_byzantine},
         {"min_confidence", v.min_confidence},
         {"prior", v.prior},
         {"error_prior", v.error_prior},
         {"net", v.net},
         {"search_step", v.search_step},
         {"interval_figure", opt_json(v.interval_figure)}};
}

void from_json(const json& j, ExperimentPlan& v) {
    read_opt(j, "process", v.process);
    read_opt(j, "f_values", v.f_values);
    read_opt(j, "sigma_eps_values", v.sigma_eps_values);
    read_optional(j, "auto_trials", v.auto_trials);
    if (auto it = j.find("trials"); it != j.end()) {
        if (it->is_string()) {
            if (it->get<std::string>() != "auto") throw Error(ErrorCode::ParseError, "trials must be a number or \"auto\"");
            if (!v.auto_trials) v.auto_trials = AutoTrials{};
        } else {
            it->get_to(v.trials);
            v.auto_trials.reset();
        }
    }
    if (j.contains("attack")) v.attacks = enum_list<AttackMode>(j.at("attack"), parse_attack_mode);
    if (j.contains("attack_direction")) {
        v.attack_direction = parse_attack_direction(j.at("attack_direction").get<std::string>());
    }
    read_opt(j, "training_rounds", v.training_rounds);
    read_opt(j, "seed", v.seed);
    if (j.contains("protocols")) v.protocols = enum_list<Protocol>(j.at("protocols"), parse_protocol);
    if (j.contains("stream")) v.stream = parse_stream_mode(j.at("stream").get<std::string>());
    read_opt(j, "train_with_byzantine", v.train_with_byzantine);
    read_opt(j, "min_confidence", v.min_confidence);
    read_opt(j, "prior", v.prior);
    read_opt(j, "error_prior", v.error_prior);
    read_opt(j, "net", v.net);
    read_opt(j, "search_step", v.search_step);
    read_optional(j, "interval_figure", v.interval_figure);
}

void to_json(json& j, const CellReport& v) {
    j = {{"f", v.f},
         {"sigma_eps", v.sigma_eps},
         {"protocol", std::string(to_string(v.protocol))},
         {"attack", std::string(to_string(v.attack))},
         {"trials", v.trials},
         {"excluded_zero", v.excluded_zero},
         {"undecided", v.undecided},
         {"median_pct_error", v.median_pct_error},
         {"max_pct_error", v.max_pct_error},
         {"coverage", v.coverage},
         {"mean_ig_width", v.mean_ig_width},
         {"mean_hull_width", v.mean_hull_width}};
}

void from_json(const json& j, CellReport& v) {
    j.at("f").get_to(v.f);
    j.at("sigma_eps").get_to(v.sigma_eps);
    v.protocol = parse_protocol(j.at("protocol").get<std::string>());
    v.attack = parse_attack_mode(j.at("attack").get<std::string>());
    j.at("trials").get_to(v.trials);
    read_opt(j, "excluded_zero", v.excluded_zero);
    read_opt(j, "undecided", v.undecided);
    j.at("median_pct_error").get_to(v.median_pct_error);
    j.at("max_pct_error").get_to(v.max_pct_error);
    j.at("coverage").get_to(v.coverage);
    j.at("mean_ig_width").get_to(v.mean_ig_width);
    j.at("mean_hull_width").get_to(v.mean_hull_width);
}

void to_json(json& j, const Comparison& v) {
    j = {{"f", v.f},
         {"sigma_eps", v.sigma_eps},
         {"attack", std::string(to_string(v.attack))},
         {"pc_median", v.pc_median},
         {"vc_median", v.vc_median},
         {"reduction", v.reduction}};
}

void from_json(const json& j, Comparison& v) {
    j.at("f").get_to(v.f);
    j.at("sigma_eps").get_to(v.sigma_eps);
    v.attack = parse_attack_mode(j.at("attack").get<std::string>());
    j.at("pc_median").get_to(v.pc_median);
    j.at("vc_median").get_to(v.vc_median);
    j.at("reduction").get_to(v.reduction);
}

void to_json(json& j, const AggregateReport& v) { j = {{"cells", v.cells}, {"comparisons", v.comparisons}}; }

void from_json(const json& j, AggregateReport& v) {
    j.at("cells").get_to(v.cells);
    j.at("comparisons").get_to(v.comparisons);
}

void to_json(json& j, const IntervalProbe& v) {
    j = {{"probe", v.probe},
         {"attack", std::string(to_string(v.attack))},
         {"true_output", v.true_output},
         {"pc_value", v.pc_value},
         {"pc_bands", v.pc_bands},
         {"vc_value", v.vc_value},
         {"vc_hull", v.vc_hull}};
}

void from_json(const json& j, IntervalProbe& v) {
    j.at("probe").get_to(v.probe);
    v.attack = parse_attack_mode(j.at("attack").get<std::string>());
    j.at("true_output").get_to(v.true_output);
    j.at("pc_value").get_to(v.pc_value);
    j.at("pc_bands").get_to(v.pc_bands);
    j.at("vc_value").get_to(v.vc_value);
    j.at("vc_hull").get_to(v.vc_hull);
}

ExperimentPlan parse_plan(const std::string& text) {
    try {
        return json::parse(text).get<ExperimentPlan>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

json figure_data(const AggregateReport& agg, const std::vector<IntervalProbe>& probes) {
    json a = json::array();
    json b = json::array();
    for (const auto& c : agg.comparisons) {
        json row = {{"f", c.f},
                    {"sigma_eps", c.sigma_eps},
                    {"pc_median", c.pc_median},
                    {"vc_median", c.vc_median},
                    {"reduction", c.reduction}};
        for (const auto& cell : agg.cells) {
            if (cell.f == c.f && cell.sigma_eps == c.sigma_eps && cell.attack == c.attack) {
                row[cell.protocol == Protocol::PC ? "pc_max" : "vc_max"] = cell.max_pct_error;
            }
        }
        (c.attack == AttackMode::None ? a : b).push_back(std::move(row));
    }
    return {{"fig4a", a}, {"fig4b", b}, {"fig4c", probes}};
}

// CSV ----------------------------------------------------------------------------

namespace {

constexpr const char* kHeader =
    "trial_id,protocol,true_output,decided,pct_error,ig_low,ig_high,covered,confident,"
    "attack_direction,messages_used,f,sigma_eps";

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw Error(ErrorCode::ParseError, "bad number '" + s + "'");
    return v;
}

long long parse_int(const std::string& s) {
    long long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size()) throw Error(ErrorCode::ParseError, "bad integer '" + s + "'");
    return v;
}

bool parse_bool(const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw Error(ErrorCode::ParseError, "bad boolean '" + s + "'");
}

}  // namespace

void write_trials_csv(std::ostream& os, const std::vector<TrialRecord>& records) {
    os << kHeader << '\n';
    for (const auto& r : records) {
        os << r.trial_id << ',' << to_string(r.protocol) << ',' << fmt(r.true_output) << ',' << fmt(r.decided) << ','
           << (r.pct_error ? fmt(*r.pct_error) : std::string()) << ',' << fmt(r.ig_low) << ',' << fmt(r.ig_high)
           << ',' << (r.covered ? "true" : "false") << ',' << (r.confident ? "true" : "false") << ','
           << r.attack_direction << ',' << r.messages_used << ',' << r.f << ',' << fmt(r.sigma_eps) << '\n';
    }
}

std::vector<TrialRecord> read_trials_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != kHeader) throw Error(ErrorCode::ParseError, "missing trials.csv header");
    std::vector<TrialRecord> out;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cols.push_back(cell);
        if (!line.empty() && line.back() == ',') cols.emplace_back();
        if (cols.size() != 13) throw Error(ErrorCode::ParseError, "expected 13 columns: " + line);
        TrialRecord r;
        r.trial_id = parse_int(cols[0]);
        r.protocol = parse_protocol(cols[1]);
        r.true_output = parse_double(cols[2]);
        r.decided = parse_double(cols[3]);
        if (!cols[4].empty()) r.pct_error = parse_double(cols[4]);
        r.ig_low = parse_double(cols[5]);
        r.ig_high = parse_double(cols[6]);
        r.covered = parse_bool(cols[7]);
        r.confident = parse_bool(cols[8]);
        r.attack_direction = cols[9];
        r.messages_used = static_cast<int>(parse_int(cols[10]));
        r.f = static_cast<int>(parse_int(cols[11]));
        r.sigma_eps = parse_double(cols[12]);
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace proxcon
