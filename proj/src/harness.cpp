#include "proxcon/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <thread>

#include "proxcon/serialization.hpp"
#include "proxcon/vc_baseline.hpp"

namespace proxcon {

long sample_size(double z, double sigma_sq, double e) {
    if (!(e > 0.0)) throw Error(ErrorCode::BadConfig, "sample_size needs e > 0");
    if (!(sigma_sq >= 0.0)) throw Error(ErrorCode::BadConfig, "sample_size needs sigma_sq >= 0");
    const double v = z * z * sigma_sq / (e * e);
    const double r = std::round(v);
    if (std::abs(v - r) <= 1e-9 * std::max(1.0, v)) return static_cast<long>(r);
    return static_cast<long>(std::ceil(v));
}

std::string_view to_string(AttackMode m) noexcept { return m == AttackMode::None ? "none" : "optimal"; }

AttackMode parse_attack_mode(std::string_view s) {
    if (s == "none") return AttackMode::None;
    if (s == "optimal") return AttackMode::Optimal;
    throw Error(ErrorCode::ParseError, "unknown attack mode '" + std::string(s) + "'");
}

std::string_view to_string(StreamMode m) noexcept { return m == StreamMode::PerTrial ? "per_trial" : "per_round"; }

StreamMode parse_stream_mode(std::string_view s) {
    if (s == "per_trial") return StreamMode::PerTrial;
    if (s == "per_round") return StreamMode::PerRound;
    throw Error(ErrorCode::ParseError, "unknown stream mode '" + std::string(s) + "'");
}

void validate_plan(const ExperimentPlan& plan) {
    const auto bad = [](const std::string& msg) { throw Error(ErrorCode::BadConfig, msg); };
    if (plan.f_values.empty() || plan.sigma_eps_values.empty()) bad("plan needs f_values and sigma_eps_values");
    for (int f : plan.f_values) {
        if (f < 0) bad("f must be non-negative");
    }
    for (double s : plan.sigma_eps_values) {
        if (!(s >= 0.0 && std::isfinite(s))) bad("sigma_eps must be finite and non-negative");
    }
    if (!plan.auto_trials && plan.trials < 1) bad("trials must be at least 1");
    if (plan.auto_trials && (plan.auto_trials->pilot < 2 || plan.auto_trials->max_trials < plan.auto_trials->pilot)) {
        bad("auto trials need 2 <= pilot <= max_trials");
    }
    if (plan.training_rounds < 0) bad("training_rounds must be non-negative");
    if (plan.protocols.empty() || plan.attacks.empty()) bad("plan needs protocols and attack modes");
    if (!(plan.process.sigma >= 0.0)) bad("sigma must be non-negative");
    if (!plan.prior.valid()) bad("prior parameters are invalid");
    if (!(plan.error_prior.pseudo_count >= 0.0 && plan.error_prior.prior_estimate >= 0.0) ||
        plan.error_prior.sum_sq != 0.0 || plan.error_prior.rounds != 0) {
        bad("error_prior needs a non-negative pseudo count and estimate and no history");
    }
    if (!(plan.min_confidence > 0.0 && plan.min_confidence <= 1.0)) {
        throw Error(ErrorCode::BadFraction, "min_confidence must lie in (0,1]");
    }
    validate_net(plan.net);
    if (plan.interval_figure) {
        const auto& fig = *plan.interval_figure;
        if (fig.f < 0 || fig.warmup_rounds < 0 || fig.probes < 1 || fig.attacks.empty()) bad("bad interval_figure");
    }
}

int worker_count() {
    if (const char* env = std::getenv("PROXCON_WORKERS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

namespace {

// Runs fn(i) for i in [0, count) on the worker pool; results are written by
// index so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
    const auto workers = std::min<std::size_t>(static_cast<std::size_t>(worker_count()), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count && !failed; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

struct Cell {
    int f = 0;
    double sigma_eps = 0.0;
    AttackMode attack = AttackMode::None;
    std::size_t data_index = 0;   // (f, sigma_eps) position; trials share data across attack modes
};

SystemConfig cell_config(int f, double min_confidence) {
    SystemConfig cfg;
    cfg.f = f;
    cfg.n = 4 * f + 1;
    cfg.min_confidence = min_confidence;
    return cfg;
}

std::string direction_label(AttackMode mode, AttackDirection d) {
    return mode == AttackMode::None ? "none" : std::string(to_string(d));
}

std::vector<double> honest_values(const RoundObservations& round, const SystemConfig& cfg) {
    std::vector<double> out;
    for (const auto& o : round.values) {
        if (!is_byzantine(o.replica_id, cfg)) out.push_back(o.value);
    }
    return out;
}

Interval hull(std::span<const double> v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {*lo, *hi};
}

struct VcOutcome {
    double value = 0.0;
    std::string direction = "none";
};

VcOutcome run_vc(std::span<const double> honest, int f, AttackMode mode, AttackDirection direction, double truth) {
    VcState st;
    st.values.assign(honest.begin(), honest.end());
    st.faulty.assign(honest.size(), false);
    for (int i = 0; i < f; ++i) {
        st.values.push_back(0.0);
        st.faulty.push_back(true);
    }
    VcOutcome out;
    VcByzantineStrategy strategy;
    if (mode == AttackMode::Optimal && f > 0) {
        strategy = [&](int, std::size_t, std::span<const double> h) {
            auto a = vc_optimal_attack(h, f, direction, truth);
            if (out.direction == "none" && !a.empty()) {
                out.direction = a.front() <= sample_mean(h) ? "suppress" : "inflate";
            }
            return a;
        };
    }
    const VcDecision d = vc_decide(st, f, strategy);
    out.value = d.value;
    return out;
}

TrialRecord pc_record(const ConsensusResult& r, double x) {
    TrialRecord rec;
    rec.protocol = Protocol::PC;
    rec.true_output = x;
    rec.decided = r.value;
    rec.pct_error = pct_error(r.value, x);
    rec.ig_low = r.ig.low;
    rec.ig_high = r.ig.high;
    rec.covered = r.ig.contains(x);
    rec.confident = r.confident;
    rec.messages_used = r.messages_used;
    return rec;
}

// One trial of one cell: training rounds, then the measured round decided by
// each requested protocol on identical replica outputs.
std::vector<TrialRecord> run_trial(const ExperimentPlan& plan, const Cell& cell, std::uint64_t trial_seed) {
    const SystemConfig cfg = cell_config(cell.f, plan.min_confidence);
    TrueProcess proc = plan.process;
    proc.sigma_eps = cell.sigma_eps;
    SearchSettings search;
    search.step = plan.search_step;

    Rng rng(trial_seed);
    std::optional<double> fixed_x;
    if (plan.stream == StreamMode::PerTrial) {
        fixed_x = proc.mu + proc.sigma * standard_normal(rng);
    }

    const bool attacked = cell.attack == AttackMode::Optimal && cell.f > 0;
    NigParams prior = plan.prior;
    ErrorStdEstimator est = plan.error_prior;
    for (int r = 0; r < plan.training_rounds; ++r) {
        RoundOptions opts;
        opts.round_id = r;
        opts.true_output = fixed_x;
        SystemConfig train_cfg = cfg;
        if (plan.train_with_byzantine) {
            if (attacked) {
                opts.attack = RoundAttack{{plan.attack_direction, cell.f},
                                          posterior_predictive(prior, est.sigma_eps()), search};
            } else {
                train_cfg.f = 0;   // the f extra replicas behave honestly
            }
        }
        const RoundObservations round = generate_round(proc, train_cfg, plan.net, rng, opts);
        std::vector<double> values;
        for (const auto& o : round.values) values.push_back(o.value);
        prior = conjugate_update(prior, values);
        if (values.size() >= 2 && sample_mean(values) != 0.0) est = infer_error_std(values, est).estimator;
    }

    const PredictiveModel model = posterior_predictive(prior, est.sigma_eps());
    RoundOptions opts;
    opts.round_id = plan.training_rounds;
    opts.true_output = fixed_x;
    if (attacked) opts.attack = RoundAttack{{plan.attack_direction, cell.f}, model, search};

    // Keep the PC attack out of the honest-only draw so VC sees the same
    // honest outputs: draw honest outputs first, then let the attacker act.
    RoundOptions honest_opts = opts;
    honest_opts.attack.reset();
    RoundObservations round = generate_round(proc, cfg, plan.net, rng, honest_opts);
    const double x = *round.true_output;
    const auto honest = honest_values(round, cfg);

    std::string pc_direction = direction_label(cell.attack, plan.attack_direction);
    if (attacked && honest.size() > static_cast<std::size_t>(cfg.f)) {
        const AttackResult a = optimal_attack(honest, model, cfg.f, plan.attack_direction, search, x);
        pc_direction = std::string(to_string(a.direction));
        for (std::size_t j = 0; j < a.values.size(); ++j) {
            round.values.push_back({static_cast<ReplicaId>(cfg.n - cfg.f + static_cast<int>(j)), a.values[j]});
        }
    }

    std::vector<TrialRecord> out;
    for (Protocol p : plan.protocols) {
        TrialRecord rec;
        if (p == Protocol::PC) {
            if (round.values.size() < static_cast<std::size_t>(cfg.quorum_size())) continue;
            rec = pc_record(pc_consensus(round.values, model, cfg, search), x);
            rec.attack_direction = pc_direction;
        } else {
            if (honest.size() < static_cast<std::size_t>(cfg.quorum_size()) || honest.empty()) continue;
            const VcOutcome vc = run_vc(honest, attacked ? cfg.f : 0, cell.attack, plan.attack_direction, x);
            const Interval h = hull(honest);
            rec.protocol = Protocol::VC;
            rec.true_output = x;
            rec.decided = vc.value;
            rec.pct_error = pct_error(vc.value, x);
            rec.ig_low = h.low;
            rec.ig_high = h.high;
            rec.covered = h.contains(x);
            rec.confident = true;
            rec.attack_direction = attacked ? vc.direction : "none";
            rec.messages_used = static_cast<int>(honest.size()) + (attacked ? cfg.f : 0);
        }
        rec.f = cell.f;
        rec.sigma_eps = cell.sigma_eps;
        out.push_back(std::move(rec));
    }
    return out;
}

double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

double variance_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size() - 1);
}

}  // namespace

AggregateReport aggregate(const std::vector<TrialRecord>& records) {
    struct Key {
        int f;
        double sigma_eps;
        Protocol protocol;
        AttackMode attack;
        bool operator==(const Key&) const = default;
    };
    std::vector<Key> keys;
    std::vector<std::vector<const TrialRecord*>> groups;
    for (const auto& r : records) {
        const Key k{r.f, r.sigma_eps, r.protocol,
                    r.attack_direction == "none" ? AttackMode::None : AttackMode::Optimal};
        const auto it = std::find(keys.begin(), keys.end(), k);
        if (it == keys.end()) {
            keys.push_back(k);
            groups.push_back({&r});
        } else {
            groups[static_cast<std::size_t>(it - keys.begin())].push_back(&r);
        }
    }

    AggregateReport rep;
    for (std::size_t g = 0; g < keys.size(); ++g) {
        CellReport c;
        c.f = keys[g].f;
        c.sigma_eps = keys[g].sigma_eps;
        c.protocol = keys[g].protocol;
        c.attack = keys[g].attack;
        std::vector<double> errors;
        int covered = 0;
        double width = 0.0;
        for (const TrialRecord* r : groups[g]) {
            ++c.trials;
            if (r->pct_error) {
                errors.push_back(*r->pct_error);
            } else {
                ++c.excluded_zero;
            }
            covered += r->covered ? 1 : 0;
            width += r->ig_high - r->ig_low;
        }
        c.median_pct_error = median_of(errors);
        c.max_pct_error = errors.empty() ? 0.0 : *std::max_element(errors.begin(), errors.end());
        c.coverage = c.trials ? static_cast<double>(covered) / c.trials : 0.0;
        const double mean_width = c.trials ? width / c.trials : 0.0;
        (c.protocol == Protocol::PC ? c.mean_ig_width : c.mean_hull_width) = mean_width;
        rep.cells.push_back(c);
    }

    for (const auto& pc : rep.cells) {
        if (pc.protocol != Protocol::PC) continue;
        for (const auto& vc : rep.cells) {
            if (vc.protocol == Protocol::VC && vc.f == pc.f && vc.sigma_eps == pc.sigma_eps && vc.attack == pc.attack) {
                Comparison cmp{pc.f, pc.sigma_eps, pc.attack, pc.median_pct_error, vc.median_pct_error, 0.0};
                cmp.reduction = vc.median_pct_error > 0.0 ? 1.0 - pc.median_pct_error / vc.median_pct_error : 0.0;
                rep.comparisons.push_back(cmp);
            }
        }
    }
    return rep;
}

ExperimentResult run_experiment(const ExperimentPlan& plan) {
    validate_plan(plan);

    std::vector<Cell> cells;
    std::size_t data_index = 0;
    for (int f : plan.f_values) {
        for (double s : plan.sigma_eps_values) {
            for (AttackMode a : plan.attacks) cells.push_back({f, s, a, data_index});
            ++data_index;
        }
    }
    const auto seed_for = [&](const Cell& c, std::size_t t) {
        return derive_seed(plan.seed, static_cast<std::uint64_t>(c.data_index) * 1'000'003ULL + t);
    };

    // Trial counts per cell, from a pilot run when requested.
    std::vector<std::size_t> counts(cells.size(), static_cast<std::size_t>(plan.trials));
    std::vector<std::vector<std::vector<TrialRecord>>> results(cells.size());
    if (plan.auto_trials) {
        const auto pilot = static_cast<std::size_t>(plan.auto_trials->pilot);
        for (auto& r : results) r.resize(pilot);
        parallel_for(cells.size() * pilot, [&](std::size_t i) {
            const std::size_t c = i / pilot, t = i % pilot;
            results[c][t] = run_trial(plan, cells[c], seed_for(cells[c], t));
        });
        for (std::size_t c = 0; c < cells.size(); ++c) {
            double var = 0.0;
            for (Protocol p : plan.protocols) {
                std::vector<double> e;
                for (const auto& trial : results[c]) {
                    for (const auto& rec : trial) {
                        if (rec.protocol == p && rec.pct_error) e.push_back(*rec.pct_error);
                    }
                }
                var = std::max(var, variance_of(e));
            }
            const long n0 = sample_size(plan.auto_trials->z, var, plan.auto_trials->e);
            counts[c] = static_cast<std::size_t>(
                std::clamp<long>(n0, plan.auto_trials->pilot, plan.auto_trials->max_trials));
        }
    }

    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const std::size_t done = results[c].size();
        results[c].resize(counts[c]);
        for (std::size_t t = done; t < counts[c]; ++t) jobs.emplace_back(c, t);
    }
    parallel_for(jobs.size(), [&](std::size_t i) {
        const auto [c, t] = jobs[i];
        results[c][t] = run_trial(plan, cells[c], seed_for(cells[c], t));
    });

    ExperimentResult out;
    std::int64_t trial_id = 0;
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (auto& trial : results[c]) {
            for (auto& rec : trial) {
                rec.trial_id = trial_id;
                out.records.push_back(std::move(rec));
            }
            ++trial_id;
        }
    }
    out.aggregate = aggregate(out.records);
    // Undecided trials produce no record; count them against their cell.
    for (std::size_t c = 0; c < cells.size(); ++c) {
        for (auto& cell : out.aggregate.cells) {
            if (cell.f != cells[c].f || cell.sigma_eps != cells[c].sigma_eps || cell.attack != cells[c].attack) continue;
            cell.undecided = static_cast<int>(counts[c]) - cell.trials;
        }
    }
    if (plan.interval_figure) out.figure = interval_figure(plan);
    return out;
}

std::vector<IntervalProbe> interval_figure(const ExperimentPlan& plan) {
    if (!plan.interval_figure) throw Error(ErrorCode::BadConfig, "plan has no interval_figure section");
    const IntervalFigurePlan& fig = *plan.interval_figure;
    const SystemConfig cfg = cell_config(fig.f, plan.min_confidence);
    TrueProcess proc = plan.process;
    proc.sigma_eps = fig.sigma_eps;
    SearchSettings search;
    search.step = plan.search_step;
    OneShotOptions absorb_all;
    absorb_all.update_on_low_confidence = true;

    std::vector<IntervalProbe> out;
    for (std::size_t m = 0; m < fig.attacks.size(); ++m) {
        const AttackMode mode = fig.attacks[m];
        const bool attacked = mode == AttackMode::Optimal && cfg.f > 0;
        Rng rng(derive_seed(plan.seed, 0xF16C0000ULL + m));
        OneShotState client{cfg, plan.prior, plan.error_prior, {}};

        for (int r = 0; r < fig.warmup_rounds + fig.probes; ++r) {
            const bool probe = r >= fig.warmup_rounds;
            const PredictiveModel model = client.model();
            RoundObservations round = generate_round(proc, cfg, plan.net, rng, {r, std::nullopt, std::nullopt, nullptr});
            const double x = *round.true_output;
            const auto honest = honest_values(round, cfg);
            if (probe && attacked && honest.size() > static_cast<std::size_t>(cfg.f)) {
                const AttackResult a = optimal_attack(honest, model, cfg.f, plan.attack_direction, search, x);
                for (std::size_t j = 0; j < a.values.size(); ++j) {
                    round.values.push_back({static_cast<ReplicaId>(cfg.n - cfg.f + static_cast<int>(j)), a.values[j]});
                }
            }
            if (round.values.size() < static_cast<std::size_t>(cfg.quorum_size())) {
                client.received.values.clear();
                continue;
            }
            // At the deadline the client decides on whatever arrived.
            const OneShotOutcome o = one_shot_step(client, round.values, search, absorb_all);
            ConsensusResult res;
            if (o.result) {
                res = *o.result;
            } else {
                res = pc_consensus(round.values, model, cfg, search);
                client.received.values.clear();
                client.received.round_id += 1;
            }
            if (!probe) continue;

            IntervalProbe p;
            p.probe = r - fig.warmup_rounds;
            p.attack = mode;
            p.true_output = x;
            p.pc_value = res.value;
            for (int k = 1; k <= 3; ++k) p.pc_bands.push_back(interval_guarantee(res.value, model.sigma_eps_hat, k));
            const VcOutcome vc = run_vc(honest, attacked ? cfg.f : 0, mode, plan.attack_direction, x);
            p.vc_value = vc.value;
            p.vc_hull = hull(honest);
            out.push_back(std::move(p));
        }
    }
    return out;
}

void write_outputs(const std::filesystem::path& dir, const ExperimentResult& result) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "trials.csv", std::ios::binary);
        write_trials_csv(os, result.records);
    }
    {
        std::ofstream os(dir / "aggregate.json", std::ios::binary);
        os << json(result.aggregate).dump(2) << '\n';
    }
    {
        std::ofstream os(dir / "figure_data.json", std::ios::binary);
        os << figure_data(result.aggregate, result.figure).dump(2) << '\n';
    }
}

}  // namespace proxcon
