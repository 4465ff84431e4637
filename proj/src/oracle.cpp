#include "rsolve/oracle.hpp"

#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "rsolve/serialization.hpp"

namespace rsolve {

namespace {

constexpr std::int64_t kMaxDpCapacity = 10'000'000;

int highest_node(std::uint64_t mask) { return 63 - std::countl_zero(mask); }

}  // namespace

OracleTable::OracleTable(std::string instance_id, ValueTable values,
                         std::vector<std::vector<std::int8_t>> argmax)
    : instance_id_(std::move(instance_id)), values_(std::move(values)), argmax_(std::move(argmax))
{
}

int OracleTable::argmax(SubInstanceKey key) const
{
    if (key.free_count < 1 || !values_.contains(key))
        throw std::out_of_range("oracle table: no branch recorded for key");
    return argmax_[key.free_count][key.suffix >> key.free_count];
}

double brute_force_root(const ProblemInstance& instance)
{
    const int n = instance.dimension();
    check_guard(n, kEnumerationGuard, "brute_force_root");
    double best = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (std::uint64_t x = 0; x < (std::uint64_t{1} << n); ++x) {
        if (!is_feasible_assignment(instance, x)) continue;
        best = std::max(best, terminal_value(instance, x));
        any = true;
    }
    if (!any) throw InfeasibleError("brute_force_root: no feasible assignment");
    return best;
}

OracleTable build_table(const ProblemInstance& instance)
{
    const int n = instance.dimension();
    check_guard(n, kTableGuard, "build_table");
    if (!is_feasible(instance, root_key(n))) throw InfeasibleError("build_table: root is infeasible");

    ValueTable values(n);
    std::vector<std::vector<std::int8_t>> argmax(n + 1);
    for (int k = 0; k <= n; ++k) {
        const std::uint64_t count = std::uint64_t{1} << (n - k);
        argmax[k].assign(count, -1);
        for (std::uint64_t s = 0; s < count; ++s) {
            const SubInstanceKey key{k, s << k};
            if (!is_feasible(instance, key)) continue;
            if (k == 0) {
                values.set(key, leaf_value(instance, key.suffix));
                continue;
            }
            double best = -std::numeric_limits<double>::infinity();
            int bit = -1;
            for (const auto& outcome : transitions(instance, key)) {
                const double candidate = outcome.reward + values.at(outcome.child);
                if (candidate > best) {
                    best = candidate;
                    bit = outcome.bit;
                }
            }
            if (bit < 0) throw InfeasibleError("build_table: feasible key without feasible branch");
            values.set(key, best);
            argmax[k][s] = static_cast<std::int8_t>(bit);
        }
    }
    return OracleTable(instance_id(instance), std::move(values), std::move(argmax));
}

double dp_knapsack_integer(const KnapsackData& data)
{
    if (!data.integral()) throw std::invalid_argument("dp_knapsack_integer: sizes and capacity must be integers");
    if (data.b < 0) throw InfeasibleError("dp_knapsack_integer: negative capacity");
    if (data.b > static_cast<double>(kMaxDpCapacity))
        throw std::invalid_argument("dp_knapsack_integer: capacity too large for the table");
    const auto capacity = static_cast<std::int64_t>(data.b);
    // best[r]: optimum over the items seen so far with remaining capacity r.
    std::vector<double> best(static_cast<std::size_t>(capacity) + 1, 0.0);
    for (std::size_t j = 0; j < data.c.size(); ++j) {
        const auto size = static_cast<std::int64_t>(data.a[j]);
        for (std::int64_t r = capacity; r >= size; --r)
            best[r] = std::max(best[r], data.c[j] + best[r - size]);
    }
    return best[capacity];
}

// ---------------------------------------------------------------------------

AlphaCoefficients alpha_coefficients(const MwisData& data)
{
    const int n = data.size();
    check_guard(n, kAlphaGuard, "alpha_coefficients");
    const std::uint64_t root = low_mask(n);
    std::vector<std::uint64_t> paths(std::size_t{1} << n, 0);
    paths[root] = 1;
    // Children are strict subsets, hence numerically smaller masks.
    for (std::uint64_t h = root; h > 0; --h) {
        if (paths[h] == 0) continue;
        const int i = highest_node(h);
        paths[h & ~(std::uint64_t{1} << i)] += paths[h];
        paths[h & ~data.closed_neighborhood(i)] += paths[h];
    }
    AlphaCoefficients alpha;
    for (std::uint64_t h = 0; h <= root; ++h)
        if (paths[h] > 0) alpha[h] = paths[h];
    return alpha;
}

AlphaCoefficients unmemoized_occurrences(const MwisData& data)
{
    check_guard(data.size(), kUnmemoizedGuard, "unmemoized_occurrences");
    AlphaCoefficients counts;
    std::function<void(std::uint64_t)> expand = [&](std::uint64_t h) {
        ++counts[h];
        if (h == 0) return;
        const int i = highest_node(h);
        expand(h & ~(std::uint64_t{1} << i));
        expand(h & ~data.closed_neighborhood(i));
    };
    expand(low_mask(data.size()));
    return counts;
}

std::vector<double> mwis_structural_values(const MwisData& data)
{
    const int n = data.size();
    check_guard(n, kAlphaGuard, "mwis_structural_values");
    std::vector<double> v(std::size_t{1} << n, 0.0);
    for (std::uint64_t h = 1; h < v.size(); ++h) {
        const int i = highest_node(h);
        v[h] = std::max(v[h & ~(std::uint64_t{1} << i)], data.w[i] + v[h & ~data.closed_neighborhood(i)]);
    }
    return v;
}

AlphaBoundCheck check_alpha_bound(const MwisData& data, const AlphaCoefficients& alpha,
                                  const std::vector<double>& V)
{
    const int n = data.size();
    if (V.size() != (std::size_t{1} << n)) throw std::invalid_argument("check_alpha_bound: V needs 2^n entries");
    auto value = [&](std::uint64_t h) { return h == 0 ? 0.0 : V[h]; };
    const std::vector<double> exact = mwis_structural_values(data);
    const std::uint64_t root = low_mask(n);

    AlphaBoundCheck check;
    check.lhs = std::abs(exact[root] - value(root));
    CompensatedSum rhs;
    for (const auto& [h, count] : alpha) {
        if (h == 0) continue;
        const int i = highest_node(h);
        const double bellman =
            std::max(value(h & ~(std::uint64_t{1} << i)), data.w[i] + value(h & ~data.closed_neighborhood(i)));
        rhs.add(static_cast<double>(count) * std::abs(bellman - value(h)));
    }
    check.rhs = rhs.value();
    check.holds = within_bound(check.lhs, check.rhs);
    return check;
}

std::vector<int> mask_to_nodes(std::uint64_t mask)
{
    std::vector<int> nodes;
    for (; mask != 0; mask &= mask - 1) nodes.push_back(std::countr_zero(mask) + 1);
    return nodes;
}

}  // namespace rsolve
