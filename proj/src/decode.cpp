#include "rsolve/decode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "parallel.hpp"
#include "rsolve/oracle.hpp"
#include "rsolve/random.hpp"

namespace rsolve {

namespace {

constexpr std::uint64_t kRandomPolicyStream = 0x52414e44;

// Walks from the root down to level stop_k. `choose` fills the step's branch
// values if it wants them and returns the index into the feasible branches.
template <class Choose>
SubInstanceKey descend(const ProblemInstance& instance, int stop_k, std::vector<DecodeStep>* trace, Choose choose)
{
    SubInstanceKey key = root_key(instance.dimension());
    if (!is_feasible(instance, key)) throw InfeasibleError("decode: instance is infeasible at the root");
    double collected = 0.0;
    while (key.free_count > stop_k) {
        const Transitions branches = transitions(instance, key);
        if (branches.empty()) throw InfeasibleError("decode: no feasible branch");
        DecodeStep step;
        step.key = key;
        const TransitionOutcome& outcome = branches[choose(branches, collected, step)];
        step.chosen = outcome.bit;
        if (trace) trace->push_back(step);
        collected += outcome.reward;
        key = outcome.child;
    }
    return key;
}

auto greedy_choice(const ValueFunction& V, const ProblemInstance& instance)
{
    return [&V, &instance](const Transitions& branches, double collected, DecodeStep& step) {
        for (const auto& outcome : branches)
            step.branch_values[outcome.bit] = collected + outcome.reward + value_at(V, instance, outcome.child);
        if (branches.size() == 2 && *step.branch_values[1] > *step.branch_values[0]) return 1;
        return 0;
    };
}

DecodeResult finish(const ProblemInstance& instance, SubInstanceKey leaf, std::vector<DecodeStep> trace)
{
    DecodeResult result;
    result.assignment = BitVector(instance.dimension(), leaf.suffix);
    result.trace = std::move(trace);
    result.feasible = is_feasible_assignment(instance, leaf.suffix);
    result.objective = terminal_value(instance, leaf.suffix);
    return result;
}

}  // namespace

DecodeResult greedy_solve(const ValueFunction& V, const ProblemInstance& instance)
{
    std::vector<DecodeStep> trace;
    trace.reserve(instance.dimension());
    const SubInstanceKey leaf = descend(instance, 0, &trace, greedy_choice(V, instance));
    return finish(instance, leaf, std::move(trace));
}

SubInstanceKey greedy_prefix(const ValueFunction& V, const ProblemInstance& instance, int stop_k)
{
    if (stop_k < 0 || stop_k > instance.dimension()) throw std::invalid_argument("greedy_prefix: level out of range");
    return descend(instance, stop_k, nullptr, greedy_choice(V, instance));
}

DecodeResult random_solve(const ProblemInstance& instance, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::vector<DecodeStep> trace;
    trace.reserve(instance.dimension());
    const SubInstanceKey leaf = descend(instance, 0, &trace, [&](const Transitions& branches, double, DecodeStep&) {
        return branches.size() == 2 ? static_cast<int>(uniform_int(rng, 0, 1)) : 0;
    });
    return finish(instance, leaf, std::move(trace));
}

double relative_gap(double optimum, double objective)
{
    return (optimum - objective) / std::max(1.0, std::abs(optimum));
}

GapReport evaluate_gap(const ValueFunction& V, std::span<const ProblemInstance> instances, std::uint64_t seed)
{
    return evaluate_gap([&V](std::size_t) -> const ValueFunction& { return V; }, instances, seed, 1);
}

GapReport evaluate_gap(const ValueSelector& select, std::span<const ProblemInstance> instances, std::uint64_t seed,
                       int threads)
{
    for (const auto& instance : instances) check_guard(instance.dimension(), kEnumerationGuard, "evaluate_gap");
    std::vector<double> optima(instances.size());
    detail::parallel_for(instances.size(), threads,
                         [&](std::size_t i) { optima[i] = brute_force_root(instances[i]); });
    return evaluate_gap(select, instances, optima, seed, threads);
}

GapReport evaluate_gap(const ValueSelector& select, std::span<const ProblemInstance> instances,
                       std::span<const double> optima, std::uint64_t seed, int threads)
{
    if (optima.size() != instances.size()) throw std::invalid_argument("evaluate_gap: one optimum per instance");
    GapReport report;
    report.rows.resize(instances.size());
    detail::parallel_for(instances.size(), threads, [&](std::size_t i) {
        const ProblemInstance& instance = instances[i];
        GapRow& row = report.rows[i];
        row.index = i;
        row.n = instance.dimension();
        row.optimum = optima[i];
        row.objective = greedy_solve(select(i), instance).objective;
        row.gap = relative_gap(row.optimum, row.objective);
        row.random_objective = random_solve(instance, derive_seed(seed, kRandomPolicyStream, i)).objective;
        row.random_gap = relative_gap(row.optimum, row.random_objective);
    });
    if (report.rows.empty()) return report;
    for (const auto& row : report.rows) {
        report.mean_gap += row.gap;
        report.random_mean_gap += row.random_gap;
        report.max_gap = std::max(report.max_gap, row.gap);
        report.random_max_gap = std::max(report.random_max_gap, row.random_gap);
    }
    report.mean_gap /= static_cast<double>(report.rows.size());
    report.random_mean_gap /= static_cast<double>(report.rows.size());
    return report;
}

}  // namespace rsolve
