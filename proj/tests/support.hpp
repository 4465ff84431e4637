#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "rsolve/core.hpp"
#include "rsolve/oracle.hpp"
#include "rsolve/problems.hpp"
#include "rsolve/random.hpp"

namespace test {

using namespace rsolve;

inline constexpr Family kCoreFamilies[] = {Family::KnapsackGuarded, Family::MaxSat, Family::Mwis, Family::MaxCut};

/// Random instance of dimension exactly n (artificial knapsack gets n - 1 items).
inline ProblemInstance random_instance(Family family, int n, std::mt19937_64& rng)
{
    GeneratorParams p;
    p.n = family == Family::KnapsackArtificial ? std::max(1, n - 1) : n;
    p.capacity_ratio = uniform_real(rng, 0.2, 0.9);
    p.integral_sizes = bernoulli(rng, 0.5);
    p.profit_min = family == Family::KnapsackGuarded && bernoulli(rng, 0.3) ? -0.2 : 0.0;
    p.clauses = static_cast<int>(uniform_int(rng, 1, 3 * n));
    p.clause_length = static_cast<int>(uniform_int(rng, 1, std::min(3, n)));
    p.clause_weight_min = -0.5;
    p.edge_probability = uniform_real(rng, 0.1, 0.7);
    p.symmetric = bernoulli(rng, 0.5);
    p.reward_min = -0.5;
    return generate(family, p, rng, 1).front();
}

/// Deterministic pseudo-random value per key, in [lo, hi].
class HashValue final : public ValueFunction {
public:
    HashValue(std::uint64_t seed, double lo, double hi) : seed_(seed), lo_(lo), hi_(hi) {}
    double estimate(const ProblemInstance&, SubInstanceKey key) const override
    {
        const std::uint64_t h = derive_seed(seed_, static_cast<std::uint64_t>(key.free_count), key.suffix);
        return lo_ + (hi_ - lo_) * static_cast<double>(h >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t seed_;
    double lo_, hi_;
};

/// Another value mapping plus deterministic noise of amplitude `scale`.
class NoisyValue final : public ValueFunction {
public:
    NoisyValue(const ValueFunction& base, std::uint64_t seed, double scale) : base_(base), noise_(seed, -scale, scale) {}
    double estimate(const ProblemInstance& f, SubInstanceKey key) const override
    {
        return base_.estimate(f, key) + noise_.estimate(f, key);
    }

private:
    const ValueFunction& base_;
    HashValue noise_;
};

class FunctionValue final : public ValueFunction {
public:
    explicit FunctionValue(std::function<double(SubInstanceKey)> fn) : fn_(std::move(fn)) {}
    double estimate(const ProblemInstance&, SubInstanceKey key) const override { return fn_(key); }

private:
    std::function<double(SubInstanceKey)> fn_;
};

inline bool bit(std::uint64_t x, int j) { return (x >> j) & 1u; }

// ---------------------------------------------------------------------------
// Independent reference formulas, written from the problem definitions.

inline double naive_objective(const ProblemInstance& f, std::uint64_t x)
{
    const int n = f.dimension();
    switch (f.family()) {
    case Family::KnapsackGuarded:
    case Family::KnapsackArtificial:
    case Family::KnapsackPenalty: {
        const auto& d = f.knapsack_data();
        const int items = static_cast<int>(d.c.size());
        double profit = 0, load = 0, total_c = 0, total_a = 0;
        for (int j = 0; j < items; ++j) {
            total_c += d.c[j];
            total_a += d.a[j];
            if (bit(x, j)) {
                profit += d.c[j];
                load += d.a[j];
            }
        }
        if (f.family() == Family::KnapsackArtificial && bit(x, items)) {
            profit -= total_c;
            load -= total_a;
        }
        if (f.family() == Family::KnapsackPenalty) return profit - total_c * std::max(0.0, load - d.b);
        return profit;
    }
    case Family::MaxSat: {
        const auto& d = f.max_sat_data();
        double total = 0;
        for (std::size_t i = 0; i < d.clauses.size(); ++i) {
            bool sat = false;
            for (int lit : d.clauses[i].literals) sat = sat || (bit(x, std::abs(lit) - 1) == (lit > 0));
            if (sat) total += d.coeffs[i];
        }
        return total;
    }
    case Family::Mwis: {
        const auto& d = f.mwis_data();
        double total = 0;
        for (int j = 0; j < n; ++j)
            if (bit(x, j)) total += d.w[j];
        return total;
    }
    case Family::MaxCut: {
        const auto& d = f.max_cut_data();
        double total = 0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) total += d.at(i, j) * bit(x, i) * (1 - bit(x, j));
        return total;
    }
    case Family::BlackBox: return f.black_box_data().values[x];
    }
    return 0;
}

inline bool naive_feasible(const ProblemInstance& f, std::uint64_t x)
{
    const int n = f.dimension();
    if (f.family() == Family::KnapsackGuarded || f.family() == Family::KnapsackArtificial) {
        const auto& d = f.knapsack_data();
        double load = 0;
        for (int j = 0; j < n; ++j)
            if (bit(x, j)) load += f.family() == Family::KnapsackArtificial && j == n - 1 ? -d.total_size() : d.a[j];
        return load <= d.b;
    }
    if (f.family() == Family::Mwis) {
        const auto& d = f.mwis_data();
        for (const auto& [u, v] : d.edges())
            if (bit(x, u) && bit(x, v)) return false;
    }
    return true;
}

/// Objective collected by the fixed variables k+1..n on their own, i.e. the
/// part of f that the optimality equation has already paid out above `key`.
inline double naive_fixed_part(const ProblemInstance& f, SubInstanceKey key)
{
    const int n = f.dimension();
    const int k = key.free_count;
    switch (f.family()) {
    case Family::KnapsackGuarded:
    case Family::KnapsackArtificial: {
        const auto& d = f.knapsack_data();
        const int items = static_cast<int>(d.c.size());
        double total = 0;
        for (int j = k; j < items; ++j)
            if (bit(key.suffix, j)) total += d.c[j];
        if (f.family() == Family::KnapsackArtificial && k < n && bit(key.suffix, items)) total -= d.total_profit();
        return total;
    }
    case Family::Mwis: {
        double total = 0;
        for (int j = k; j < n; ++j)
            if (bit(key.suffix, j)) total += f.mwis_data().w[j];
        return total;
    }
    case Family::MaxCut: {
        double total = 0;
        for (int i = k; i < n; ++i)
            for (int j = k; j < n; ++j) total += f.max_cut_data().at(i, j) * bit(key.suffix, i) * (1 - bit(key.suffix, j));
        return total;
    }
    default: return 0;
    }
}

/// V*_k(xi) by enumerating the 2^k completions. -inf when none is feasible.
inline double naive_optimal(const ProblemInstance& f, SubInstanceKey key)
{
    double best = -std::numeric_limits<double>::infinity();
    for (std::uint64_t prefix = 0; prefix < (std::uint64_t{1} << key.free_count); ++prefix) {
        const std::uint64_t x = key.suffix | prefix;
        if (naive_feasible(f, x)) best = std::max(best, naive_objective(f, x));
    }
    if (std::isinf(best)) return best;
    return best - naive_fixed_part(f, key);
}

inline bool close(double a, double b, double rel = 1e-9) { return std::abs(a - b) <= rel * (1.0 + std::abs(b)); }

}  // namespace test
