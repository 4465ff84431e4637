#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <thread>

#include "rsolve/decode.hpp"
#include "rsolve/model.hpp"
#include "rsolve/training.hpp"
#include "support.hpp"

using namespace test;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct Criterion {
    int id;
    const char* title;
    Outcome (*run)();
};

std::string fmt(double v)
{
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

Outcome bound_fuzz()
{
    std::mt19937_64 rng(101);
    int violations = 0, checked = 0;
    double worst = -std::numeric_limits<double>::infinity();
    for (Family family : kCoreFamilies)
        for (int i = 0; i < 250; ++i) {
            const auto f = random_instance(family, static_cast<int>(uniform_int(rng, 1, 10)), rng);
            const auto exact = build_table(f);
            const HashValue random(rng(), -5, 5);
            const ZeroValue zero;
            const NoisyValue noisy(exact, rng(), 0.5);
            const ValueFunction* sources[] = {&random, &zero, &exact, &noisy};
            const auto& V = *sources[i % 4];
            const auto report = verify_bound(f, V, exact.values());
            ++checked;
            worst = std::max(worst, report.phi - report.psi);
            if (!(report.phi <= report.psi + 1e-9 * (1 + report.psi)) || !report.holds) ++violations;
        }
    return {violations == 0, std::to_string(checked) + " instances, " + std::to_string(violations) +
                                 " violations, max(phi - psi) = " + fmt(worst)};
}

Outcome max_lipschitz()
{
    std::mt19937_64 rng(102);
    int violations = 0;
    for (int i = 0; i < 100000; ++i) {
        const double scale = std::ldexp(1.0, static_cast<int>(uniform_int(rng, -10, 10)));
        const double A = uniform_real(rng, -scale, scale), B = uniform_real(rng, -scale, scale);
        const double a = uniform_real(rng, -scale, scale), b = uniform_real(rng, -scale, scale);
        if (std::abs(std::max(A, B) - std::max(a, b)) > std::abs(A - a) + std::abs(B - b) + 1e-12) ++violations;
    }
    return {violations == 0, "100000 tuples, " + std::to_string(violations) + " violations"};
}

Outcome local_inequality()
{
    std::mt19937_64 rng(103);
    long keys = 0, violations = 0;
    for (int i = 0; i < 200; ++i) {
        const auto family = kAllFamilies[i % kAllFamilies.size()];
        const auto f = random_instance(family, static_cast<int>(uniform_int(rng, 1, 8)), rng);
        const auto exact = build_table(f);
        const HashValue V(rng(), -4, 4);
        const auto values = tabulate(V, f);
        for (int k = 1; k <= f.dimension(); ++k)
            for (const auto& fk : enumerate_keys(f, k)) {
                if (!fk.feasible) continue;
                ++keys;
                if (!check_local_deviation(values, exact.values(), f, fk.key).holds) ++violations;
            }
    }
    return {violations == 0, std::to_string(keys) + " keys, " + std::to_string(violations) + " violations"};
}

Outcome oracle_consistency()
{
    std::mt19937_64 rng(104);
    int mismatches = 0;
    double worst = 0;
    for (int i = 0; i < 200; ++i) {
        GeneratorParams p;
        p.n = static_cast<int>(uniform_int(rng, 1, 14));
        p.capacity_ratio = uniform_real(rng, 0.05, 1.0);
        p.integral_sizes = true;
        const auto f = generate(Family::KnapsackGuarded, p, rng, 1).front();
        const double table = build_table(f).root_value();
        const double brute = brute_force_root(f);
        const double dp = dp_knapsack_integer(f.knapsack_data());
        const double scale = std::max({1.0, std::abs(brute)});
        const double err = std::max(std::abs(table - brute), std::abs(dp - brute)) / scale;
        worst = std::max(worst, err);
        if (err > 1e-9) ++mismatches;
    }
    return {mismatches == 0, "200 instances, max relative difference " + fmt(worst)};
}

Outcome optimal_decode()
{
    std::mt19937_64 rng(105);
    int nonzero = 0;
    double worst = 0;
    for (int i = 0; i < 500; ++i) {
        const auto family = kAllFamilies[i % kAllFamilies.size()];
        const auto f = random_instance(family, static_cast<int>(uniform_int(rng, 1, 12)), rng);
        const auto table = build_table(f);
        const auto result = greedy_solve(table, f);
        const double gap = relative_gap(brute_force_root(f), result.objective);
        worst = std::max(worst, std::abs(gap));
        if (!result.feasible || std::abs(gap) > 1e-12) ++nonzero;
    }
    return {nonzero == 0, "500 instances, " + std::to_string(nonzero) + " nonzero gaps, max |gap| " + fmt(worst)};
}

Outcome gradient_check()
{
    std::mt19937_64 rng(106);
    int failures = 0;
    double worst = 0;
    for (int batch_index = 0; batch_index < 20; ++batch_index) {
        const Family family = kCoreFamilies[batch_index % 4];
        auto params = init_params(family, rng());
        const NetworkValue V(params);
        const auto f = std::make_shared<const ProblemInstance>(random_instance(family, 8, rng));
        std::vector<ResidualSample> batch;
        for (int s = 0; s < 8; ++s) {
            const int k = static_cast<int>(uniform_int(rng, 1, 8));
            SubInstanceKey key{k, 0};
            do key.suffix = rng() & low_mask(8) & ~low_mask(k);
            while (!is_feasible(*f, key));
            batch.push_back({f, key, uniform_real(rng, 0.5, 1.5)});
        }
        const double alpha = uniform_real(rng, 1, 10);
        const LossSettings settings{LossKind::Smoothed, alpha, alpha, batch_index % 2 ? AbsKind::Sqrt : AbsKind::Tanh};
        const auto g = gradient(V, batch, settings);
        for (int probe = 0; probe < 50; ++probe) {
            const auto i = static_cast<std::size_t>(uniform_int(rng, 0, params.theta.size() - 1));
            const double theta = params.theta[i];
            const double h = 1e-5 * (1 + std::abs(theta));
            params.theta[i] = theta + h;
            const double up = batch_loss(V, batch, settings);
            params.theta[i] = theta - h;
            const double down = batch_loss(V, batch, settings);
            params.theta[i] = theta;
            const double fd = (up - down) / (2 * h);
            const double err = std::abs(g[i] - fd);
            const double allowed = std::max(1e-6, 1e-4 * std::abs(fd));
            worst = std::max(worst, err / allowed);
            if (err > allowed) ++failures;
        }
    }
    return {failures == 0, "1000 coordinates, " + std::to_string(failures) +
                               " outside tolerance, worst error / tolerance " + fmt(worst)};
}

Outcome knapsack_equivalence()
{
    std::mt19937_64 rng(107);
    int mismatches = 0;
    for (int i = 0; i < 200; ++i) {
        GeneratorParams p;
        p.n = static_cast<int>(uniform_int(rng, 1, 12));
        p.capacity_ratio = uniform_real(rng, 0.0, 1.0);
        p.integral_sizes = true;
        const auto guarded = generate(Family::KnapsackGuarded, p, rng, 1).front();
        const auto& d = guarded.knapsack_data();
        const auto artificial = ProblemInstance::knapsack(Family::KnapsackArtificial, d);
        const auto penalty = ProblemInstance::knapsack(Family::KnapsackPenalty, d);
        const double g = build_table(guarded).root_value();
        const double a = build_table(artificial).root_value();
        const double q = build_table(penalty).root_value();
        const double tol = 1e-9 * std::max(1.0, std::abs(g));
        if (std::abs(g - a) > tol || std::abs(g - q) > tol || std::abs(brute_force_root(penalty) - g) > tol)
            ++mismatches;
    }
    return {mismatches == 0, "200 instances, " + std::to_string(mismatches) + " mismatches"};
}

Outcome smoothing_fidelity()
{
    double worst = 0;
    int pairs = 0;
    for (double x = -20; x <= 20; x += 0.25)
        for (double y = -20; y <= 20; y += 0.25) {
            if (std::abs(x - y) < 1) continue;
            ++pairs;
            worst = std::max(worst, std::abs(smooth_max(x, y, 50) - std::max(x, y)));
        }
    int asymmetric = 0;
    std::mt19937_64 rng(108);
    for (AbsKind kind : {AbsKind::Tanh, AbsKind::Sqrt})
        for (int i = 0; i < 10000; ++i) {
            const double x = uniform_real(rng, -100, 100);
            const double alpha = uniform_real(rng, 0.1, 100);
            if (smooth_abs(x, alpha, kind) != smooth_abs(-x, alpha, kind)) ++asymmetric;
        }
    return {worst <= 1e-6 && asymmetric == 0, std::to_string(pairs) + " grid pairs, max error " + fmt(worst) + ", " +
                                                  std::to_string(asymmetric) + " asymmetric abs values"};
}

Outcome training_gate()
{
    TrainConfig config;
    config.family = Family::KnapsackGuarded;
    config.generator.n = 10;
    config.batch_size = 64;
    config.steps = 20000;
    config.seed = 1;
    config.threads = static_cast<int>(std::clamp(std::thread::hardware_concurrency(), 1u, 8u));
    const auto result = train(config);
    const auto& state = *result.checkpoint.training;
    const double ratio = state.loss_ma / state.initial_sampled_psi;
    bool bound_ok = true;
    for (const auto& row : result.metrics.rows)
        if (row.phi_exact_eval > row.psi_exact_eval + 1e-9 * (1 + row.psi_exact_eval)) bound_ok = false;
    const double gap = result.metrics.rows.back().decode_gap_mean;
    const bool pass = ratio <= 0.5 && bound_ok && gap < result.baseline_gap_mean;
    return {pass, "sampled psi " + fmt(state.initial_sampled_psi) + " -> " + fmt(state.loss_ma) + " (ratio " +
                      fmt(ratio) + "), phi <= psi at " + std::to_string(result.metrics.rows.size()) + " rows: " +
                      (bound_ok ? "yes" : "no") + ", decode gap " + fmt(gap) + " vs random " +
                      fmt(result.baseline_gap_mean)};
}

Outcome alpha_verification()
{
    std::mt19937_64 rng(110);
    int failures = 0;
    for (int i = 0; i < 50; ++i) {
        const auto f = random_instance(Family::Mwis, static_cast<int>(uniform_int(rng, 1, 8)), rng);
        const auto& data = f.mwis_data();
        const auto alpha = alpha_coefficients(data);
        if (alpha != unmemoized_occurrences(data)) ++failures;
        std::vector<double> V(std::size_t{1} << data.size());
        for (auto& v : V) v = uniform_real(rng, -3, 3);
        if (!check_alpha_bound(data, alpha, V).holds) ++failures;
    }
    return {failures == 0, "50 graphs, " + std::to_string(failures) + " failures"};
}

const Criterion kCriteria[] = {
    {1, "bound theorem fuzz", bound_fuzz},
    {2, "max is 1-Lipschitz in each argument", max_lipschitz},
    {3, "local deviation inequality", local_inequality},
    {4, "oracle consistency", oracle_consistency},
    {5, "greedy decode under the oracle is optimal", optimal_decode},
    {6, "gradient matches finite differences", gradient_check},
    {7, "knapsack formulations agree", knapsack_equivalence},
    {8, "smoothing fidelity", smoothing_fidelity},
    {9, "training smoke gate", training_gate},
    {10, "sub-graph coefficient verification", alpha_verification},
};

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Acceptance criteria"};
    std::vector<int> selected;
    app.add_option("--criterion", selected, "Run only these criteria (1-10)")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    bool all = true;
    for (const auto& c : kCriteria) {
        if (!selected.empty() && std::find(selected.begin(), selected.end(), c.id) == selected.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("[%s] criterion %d: %s: %s (%.1f s)\n", outcome.pass ? "PASS" : "FAIL", c.id, c.title,
                    outcome.detail.c_str(), seconds);
        std::fflush(stdout);
        all = all && outcome.pass;
    }
    return all ? 0 : 1;
}
