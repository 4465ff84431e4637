#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rsolve/core.hpp"
#include "rsolve/problems.hpp"

namespace rsolve {

/// Exact V*_k(xi) at every feasible key of one instance, with an optimal
/// branch bit per key (ties resolve to 0). Usable directly as the oracle
/// value function.
class OracleTable final : public ValueFunction {
public:
    OracleTable(std::string instance_id, ValueTable values, std::vector<std::vector<std::int8_t>> argmax);

    const std::string& instance_id() const { return instance_id_; }
    const ValueTable& values() const { return values_; }
    int dimension() const { return values_.dimension(); }
    double root_value() const { return values_.at(root_key(dimension())); }
    /// Optimal bit at a key with k >= 1.
    int argmax(SubInstanceKey key) const;

    double estimate(const ProblemInstance&, SubInstanceKey key) const override { return values_.at(key); }

private:
    std::string instance_id_;
    ValueTable values_;
    std::vector<std::vector<std::int8_t>> argmax_;
};

/// Maximum of f over feasible full assignments by enumeration. n <= 24.
double brute_force_root(const ProblemInstance& instance);

/// Bottom-up table over all feasible keys via the family's optimality
/// equation. n <= 20.
OracleTable build_table(const ProblemInstance& instance);

/// Exact 0/1 knapsack optimum by the capacity recursion; needs integral a, b
/// and b >= 0.
double dp_knapsack_integer(const KnapsackData& data);

// ---------------------------------------------------------------------------
// MWIS sub-graph recursion. Sub-graphs of a fixed root graph are identified by
// their remaining node set (mask); weights come from the root.

/// Multiplicity of each sub-graph H in the expansion of the recursion
/// V(H) = max{V(H \ {i_H}), w_i + V(H \ N(i_H))}, i_H = highest node in H:
/// the number of root-to-H paths in the recursion DAG. Keys are node masks;
/// the empty mask is the leaf.
using AlphaCoefficients = std::map<std::uint64_t, std::uint64_t>;

AlphaCoefficients alpha_coefficients(const MwisData& data);

/// Occurrence counts from explicitly expanding the recursion tree. n <= 8.
AlphaCoefficients unmemoized_occurrences(const MwisData& data);

/// Exact V*(H) for every node subset H by the sub-graph recursion. n <= 16.
std::vector<double> mwis_structural_values(const MwisData& data);

struct AlphaBoundCheck {
    double lhs = 0.0;  // |V*(G) - V(G)|
    double rhs = 0.0;  // sum_H alpha_H |local residual at H|
    bool holds = true;
};

/// Checks the sub-graph telescoping inequality for a value table V over node
/// masks (V(empty) is treated as 0).
AlphaBoundCheck check_alpha_bound(const MwisData& data, const AlphaCoefficients& alpha,
                                  const std::vector<double>& V);

std::vector<int> mask_to_nodes(std::uint64_t mask);

}  // namespace rsolve
