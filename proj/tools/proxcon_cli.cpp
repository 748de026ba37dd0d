// proxcon: experiment runner and spot-check tool.

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "proxcon/oracle.hpp"
#include "proxcon/serialization.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw proxcon::Error(proxcon::ErrorCode::ParseError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int simulate(const std::string& plan_path, std::uint64_t seed, const std::string& out_dir) {
    proxcon::ExperimentPlan plan = proxcon::parse_plan(slurp(plan_path));
    plan.seed = seed;
    const proxcon::ExperimentResult res = proxcon::run_experiment(plan);
    proxcon::write_outputs(out_dir, res);
    for (const auto& c : res.aggregate.comparisons) {
        std::printf("f=%d sigma_eps=%.3f attack=%-7s pc_median=%.4f%% vc_median=%.4f%% reduction=%.1f%%\n", c.f,
                    c.sigma_eps, std::string(proxcon::to_string(c.attack)).c_str(), c.pc_median, c.vc_median,
                    100.0 * c.reduction);
    }
    std::printf("%zu records written to %s\n", res.records.size(), out_dir.c_str());
    return 0;
}

int attack_bounds(const std::string& path, std::optional<int> f_flag, std::optional<int> n_flag) {
    const proxcon::json j = proxcon::json::parse(slurp(path));
    const auto proc = j.get<proxcon::TrueProcess>();
    const int f = f_flag.value_or(j.value("f", 1));
    std::optional<int> n = n_flag;
    if (!n && j.contains("n")) n = j.at("n").get<int>();
    const proxcon::BoundReport r = proxcon::security_bounds(proc, f, n);
    std::cout << proxcon::json(r).dump(2) << '\n';
    return 0;
}

int coinflip_check(double p, long trials, std::uint64_t seed) {
    const auto exact = proxcon::coinflip_probabilities(p, p);
    const auto est = proxcon::coinflip_simulate(p, trials, seed);
    bool ok = true;
    const double e[] = {exact.p0, exact.p1, exact.p2};
    const double m[] = {est.p0, est.p1, est.p2};
    for (int i = 0; i < 3; ++i) {
        const double se = std::sqrt(e[i] * (1.0 - e[i]) / static_cast<double>(trials));
        ok = ok && std::abs(m[i] - e[i]) <= 3.0 * se;
    }
    proxcon::json out = {{"analytic", exact}, {"empirical", est}, {"trials", trials}, {"within_3_se", ok}};
    std::cout << out.dump(2) << '\n';
    return ok ? 0 : 1;
}

int verify(int seeds) {
    int failures = 0;
    const std::pair<int, int> configs[] = {{0, 1}, {0, 5}, {1, 5}, {2, 5}, {1, 9}, {2, 9}};
    for (const auto& [f, n] : configs) {
        int ok = 0;
        for (int s = 0; s < seeds; ++s) {
            const auto inst = proxcon::oracle::random_instance(static_cast<std::uint64_t>(s), f, n);
            if (proxcon::oracle::compare_pc(inst).ok()) ++ok;
        }
        std::printf("f=%d n=%d: %d/%d instances agree with the exhaustive oracle\n", f, n, ok, seeds);
        failures += seeds - ok;
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proximal consensus simulator"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "Run an experiment plan");
    std::string plan_path;
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    sim->add_option("plan", plan_path, "Plan JSON")->required()->check(CLI::ExistingFile);
    sim->add_option("--seed", seed, "Master seed")->required();
    sim->add_option("--out", out_dir, "Output directory");

    auto* bounds = app.add_subcommand("attack-bounds", "Print worst-case attack bounds");
    std::string proc_path;
    std::optional<int> f_flag, n_flag;
    bounds->add_option("proc", proc_path, "Process JSON (mu, sigma, sigma_eps, mu_eps)")
        ->required()
        ->check(CLI::ExistingFile);
    bounds->add_option("--f", f_flag, "Fault bound");
    bounds->add_option("--n", n_flag, "Replica count (default 4f+1)");

    auto* size = app.add_subcommand("sample-size", "Simulations needed for a margin of error");
    double z = 0.0, sigma_sq = 0.0, e = 0.0;
    size->add_option("--z", z)->required();
    size->add_option("--sigma-sq", sigma_sq)->required();
    size->add_option("--e", e)->required();

    auto* coin = app.add_subcommand("coinflip-check", "Check the delivery model on the coin-flip vignette");
    double p = 0.9;
    long trials = 100000;
    std::uint64_t coin_seed = 1;
    coin->add_option("--p", p, "Delivery probability");
    coin->add_option("--trials", trials);
    coin->add_option("--seed", coin_seed);

    auto* ver = app.add_subcommand("verify", "Compare the engine with the exhaustive oracle");
    int seeds = 20;
    ver->add_option("--seeds", seeds, "Instances per configuration");

    CLI11_PARSE(app, argc, argv);
    try {
        if (*sim) return simulate(plan_path, seed, out_dir);
        if (*bounds) return attack_bounds(proc_path, f_flag, n_flag);
        if (*size) {
            std::cout << proxcon::sample_size(z, sigma_sq, e) << '\n';
            return 0;
        }
        if (*coin) return coinflip_check(p, trials, coin_seed);
        if (*ver) return verify(seeds);
    } catch (const proxcon::Error& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << '\n';
        return 2;
    }
    return 0;
}
