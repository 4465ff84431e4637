#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rsolve/core.hpp"
#include "rsolve/problems.hpp"

namespace rsolve {

/// One variable fixing during a greedy decode.
struct DecodeStep {
    SubInstanceKey key;  // key before fixing variable k = key.free_count
    /// Estimated total objective per branch: rewards collected so far plus the
    /// branch reward plus V(child). Empty when the branch is infeasible.
    std::array<std::optional<double>, 2> branch_values;
    int chosen = 0;
};

struct DecodeResult {
    BitVector assignment;
    double objective = 0.0;  // terminal_value(assignment)
    std::vector<DecodeStep> trace;  // one step per variable, k = n first
    bool feasible = false;
};

/// Fixes x_n, ..., x_1 in turn toward the higher reward + V(child) (ties to
/// 0), skipping infeasible branches. Throws InfeasibleError when the root has
/// no feasible completion.
DecodeResult greedy_solve(const ValueFunction& V, const ProblemInstance& instance);

/// Key reached after greedily fixing variables down to level `stop_k`.
SubInstanceKey greedy_prefix(const ValueFunction& V, const ProblemInstance& instance, int stop_k);

/// Uniformly random feasible bit at every step.
DecodeResult random_solve(const ProblemInstance& instance, std::uint64_t seed);

/// (optimum - objective) / max(1, |optimum|).
double relative_gap(double optimum, double objective);

struct GapRow {
    std::size_t index = 0;
    int n = 0;
    double optimum = 0.0;
    double objective = 0.0;
    double gap = 0.0;
    double random_objective = 0.0;
    double random_gap = 0.0;
};

struct GapReport {
    double mean_gap = 0.0;
    double max_gap = 0.0;
    double random_mean_gap = 0.0;
    double random_max_gap = 0.0;
    std::vector<GapRow> rows;
};

/// Value mapping to use for the i-th instance.
using ValueSelector = std::function<const ValueFunction&(std::size_t index)>;

/// Greedy decode gaps against the exact optimum (enumeration, n <= 24), with a
/// random-policy baseline seeded per instance from `seed`.
GapReport evaluate_gap(const ValueFunction& V, std::span<const ProblemInstance> instances,
                       std::uint64_t seed = 0);
GapReport evaluate_gap(const ValueSelector& select, std::span<const ProblemInstance> instances,
                       std::uint64_t seed = 0, int threads = 1);
/// Same with known optima (one per instance).
GapReport evaluate_gap(const ValueSelector& select, std::span<const ProblemInstance> instances,
                       std::span<const double> optima, std::uint64_t seed = 0, int threads = 1);

}  // namespace rsolve
