#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rsolve/bits.hpp"
#include "rsolve/problems.hpp"

namespace rsolve {

/// A value mapping V_k(xi; f). Implementations only answer keys with k >= 1;
/// k = 0 is always pinned to leaf_value() by value_at().
class ValueFunction {
public:
    virtual ~ValueFunction() = default;
    virtual double estimate(const ProblemInstance& instance, SubInstanceKey key) const = 0;
};

/// V evaluated with the k = 0 level pinned to the instance's leaf value.
double value_at(const ValueFunction& V, const ProblemInstance& instance, SubInstanceKey key);

/// V that is zero at every key with k >= 1.
class ZeroValue final : public ValueFunction {
public:
    double estimate(const ProblemInstance&, SubInstanceKey) const override { return 0.0; }
};

/// Dense map from keys of one n-dimensional instance to reals. Level k holds
/// 2^(n-k) slots indexed by suffix >> k; absent entries are NaN.
class ValueTable {
public:
    ValueTable() = default;
    explicit ValueTable(int n);

    int dimension() const { return n_; }
    bool contains(SubInstanceKey key) const;
    double at(SubInstanceKey key) const;  // throws std::out_of_range when absent
    void set(SubInstanceKey key, double value);
    std::size_t size() const;  // number of present entries

    const std::vector<double>& level(int k) const { return levels_[k]; }

private:
    std::size_t slot(SubInstanceKey key) const;

    int n_ = 0;
    std::vector<std::vector<double>> levels_;
};

/// ValueFunction backed by a table for one instance (the table's own).
class TableValue final : public ValueFunction {
public:
    explicit TableValue(ValueTable table) : table_(std::move(table)) {}
    double estimate(const ProblemInstance&, SubInstanceKey key) const override { return table_.at(key); }
    const ValueTable& table() const { return table_; }
    ValueTable& table() { return table_; }

private:
    ValueTable table_;
};

/// V evaluated at every feasible key (leaf level pinned). n <= kTableGuard.
ValueTable tabulate(const ValueFunction& V, const ProblemInstance& instance);

struct FlaggedKey {
    SubInstanceKey key;
    bool feasible = true;
};

/// All 2^(n-k) keys of level k with the family's feasibility flag.
std::vector<FlaggedKey> enumerate_keys(const ProblemInstance& instance, int k);

/// Xi_ell(eta): keys of level ell agreeing with eta on positions beyond eta.k.
std::vector<SubInstanceKey> enumerate_xi_set(SubInstanceKey eta, int ell, int n);

/// Bellman residual: max over feasible branches of (reward + V(child)) - V(key).
double delta_residual(const ValueFunction& V, const ProblemInstance& instance, SubInstanceKey key);

/// V*(key) - V(key) against an exact table.
double deviation(const ValueFunction& V, const ValueTable& exact, const ProblemInstance& instance,
                 SubInstanceKey key);
double deviation_abs(const ValueFunction& V, const ValueTable& exact, const ProblemInstance& instance,
                     SubInstanceKey key);

/// Sum of |delta| over every feasible key with k >= 1, exact max and abs.
double psi_exact(const ValueFunction& V, const ProblemInstance& instance);
double psi_from_table(const ValueTable& values, const ProblemInstance& instance);

enum class PhiVariant {
    RootOnly,     // |V(root) - V*(root)|
    AllSuffixes,  // sum over all xi in B^n of |V*_n(xi) - V_n(xi)|; V_n ignores xi
};

double phi_exact(const ValueFunction& V, const ValueTable& exact, const ProblemInstance& instance,
                 PhiVariant variant = PhiVariant::RootOnly);

struct BoundViolation {
    SubInstanceKey key;
    double lhs = 0.0;  // |Delta(k; eta)|
    double rhs = 0.0;  // telescoped sum of |delta| over Xi_ell(eta)
};

struct BoundReport {
    double phi = 0.0;
    double psi = 0.0;
    bool holds = true;
    std::vector<BoundViolation> violations;  // first per-key violation, if any
};

/// Builds the exact table, computes Phi and Psi, and checks Phi <= Psi plus
/// the telescoped per-key inequality at every feasible key.
BoundReport verify_bound(const ProblemInstance& instance, const ValueFunction& V);
/// Same, with a caller-supplied exact table.
BoundReport verify_bound(const ProblemInstance& instance, const ValueFunction& V, const ValueTable& exact);

/// Telescoped right-hand side sum_{ell <= k} sum_{xi in Xi_ell(eta)} |delta(ell; xi)|
/// over feasible keys, for every feasible eta; computed by recursion over children.
ValueTable telescoped_residuals(const ValueTable& values, const ProblemInstance& instance);

/// Local deviation inequality at one key:
/// |Delta(k)| <= sum over feasible children |Delta(k-1)| + |delta(k)|.
struct LocalCheck {
    double lhs = 0.0;
    double rhs = 0.0;
    bool holds = true;
};
LocalCheck check_local_deviation(const ValueTable& values, const ValueTable& exact,
                                 const ProblemInstance& instance, SubInstanceKey key);

}  // namespace rsolve
