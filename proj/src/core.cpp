#include "rsolve/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rsolve/oracle.hpp"

namespace rsolve {

namespace {

constexpr double kAbsent = std::numeric_limits<double>::quiet_NaN();

double bellman_max(const ValueTable& values, const ProblemInstance& instance, SubInstanceKey key)
{
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& outcome : transitions(instance, key))
        best = std::max(best, outcome.reward + values.at(outcome.child));
    return best;
}

template <typename Visit>
void for_each_feasible_key(const ProblemInstance& instance, int k, Visit&& visit)
{
    const int n = instance.dimension();
    const std::uint64_t count = std::uint64_t{1} << (n - k);
    for (std::uint64_t s = 0; s < count; ++s) {
        const SubInstanceKey key{k, s << k};
        if (is_feasible(instance, key)) visit(key);
    }
}

}  // namespace

double value_at(const ValueFunction& V, const ProblemInstance& instance, SubInstanceKey key)
{
    if (key.free_count == 0) return leaf_value(instance, key.suffix);
    return V.estimate(instance, key);
}

// ---------------------------------------------------------------------------

ValueTable::ValueTable(int n) : n_(n)
{
    check_guard(n, kTableGuard, "value table");
    if (n < 0) throw std::invalid_argument("value table: negative dimension");
    levels_.resize(n + 1);
    for (int k = 0; k <= n; ++k) levels_[k].assign(std::size_t{1} << (n - k), kAbsent);
}

std::size_t ValueTable::slot(SubInstanceKey key) const
{
    validate_key(key, n_);
    return static_cast<std::size_t>(key.suffix >> key.free_count);
}

bool ValueTable::contains(SubInstanceKey key) const
{
    if (key.free_count < 0 || key.free_count > n_) return false;
    if ((key.suffix & ~low_mask(n_)) != 0 || (key.suffix & low_mask(key.free_count)) != 0) return false;
    return !std::isnan(levels_[key.free_count][key.suffix >> key.free_count]);
}

double ValueTable::at(SubInstanceKey key) const
{
    const double value = levels_.at(key.free_count).at(slot(key));
    if (std::isnan(value)) throw std::out_of_range("value table: key not present");
    return value;
}

void ValueTable::set(SubInstanceKey key, double value)
{
    if (std::isnan(value)) throw NumericError("value table: NaN value");
    levels_.at(key.free_count).at(slot(key)) = value;
}

std::size_t ValueTable::size() const
{
    std::size_t count = 0;
    for (const auto& level : levels_)
        for (double v : level)
            if (!std::isnan(v)) ++count;
    return count;
}

ValueTable tabulate(const ValueFunction& V, const ProblemInstance& instance)
{
    const int n = instance.dimension();
    check_guard(n, kTableGuard, "tabulate");
    ValueTable table(n);
    for (int k = 0; k <= n; ++k)
        for_each_feasible_key(instance, k, [&](SubInstanceKey key) {
            const double v = value_at(V, instance, key);
            if (!std::isfinite(v)) throw NumericError("tabulate: non-finite value");
            table.set(key, v);
        });
    return table;
}

// ---------------------------------------------------------------------------

std::vector<FlaggedKey> enumerate_keys(const ProblemInstance& instance, int k)
{
    const int n = instance.dimension();
    check_guard(n, kEnumerationGuard, "enumerate_keys");
    if (k < 0 || k > n) throw std::invalid_argument("enumerate_keys: k out of range");
    std::vector<FlaggedKey> out;
    const std::uint64_t count = std::uint64_t{1} << (n - k);
    out.reserve(count);
    for (std::uint64_t s = 0; s < count; ++s) {
        const SubInstanceKey key{k, s << k};
        out.push_back({key, is_feasible(instance, key)});
    }
    return out;
}

std::vector<SubInstanceKey> enumerate_xi_set(SubInstanceKey eta, int ell, int n)
{
    validate_key(eta, n);
    check_guard(n, kEnumerationGuard, "enumerate_xi_set");
    if (ell < 1 || ell > eta.free_count)
        throw std::invalid_argument("enumerate_xi_set: ell out of range");
    const int freed = eta.free_count - ell;
    std::vector<SubInstanceKey> out;
    out.reserve(std::size_t{1} << freed);
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << freed); ++s)
        out.push_back({ell, eta.suffix | (s << ell)});
    return out;
}

double delta_residual(const ValueFunction& V, const ProblemInstance& instance, SubInstanceKey key)
{
    validate_key(key, instance.dimension());
    if (key.free_count < 1) throw std::invalid_argument("delta_residual: key needs k >= 1");
    if (!is_feasible(instance, key)) throw InfeasibleError("delta_residual: infeasible key");
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& outcome : transitions(instance, key))
        best = std::max(best, outcome.reward + value_at(V, instance, outcome.child));
    return best - value_at(V, instance, key);
}

double deviation(const ValueFunction& V, const ValueTable& exact, const ProblemInstance& instance,
                 SubInstanceKey key)
{
    if (!exact.contains(key)) throw std::out_of_range("deviation: key missing from oracle table");
    return exact.at(key) - value_at(V, instance, key);
}

double deviation_abs(const ValueFunction& V, const ValueTable& exact, const ProblemInstance& instance,
                     SubInstanceKey key)
{
    return std::abs(deviation(V, exact, instance, key));
}

double psi_from_table(const ValueTable& values, const ProblemInstance& instance)
{
    const int n = instance.dimension();
    CompensatedSum sum;
    for (int k = 1; k <= n; ++k)
        for_each_feasible_key(instance, k, [&](SubInstanceKey key) {
            sum.add(std::abs(bellman_max(values, instance, key) - values.at(key)));
        });
    return sum.value();
}

double psi_exact(const ValueFunction& V, const ProblemInstance& instance)
{
    check_guard(instance.dimension(), kTableGuard, "psi_exact");
    return psi_from_table(tabulate(V, instance), instance);
}

double phi_exact(const ValueFunction& V, const ValueTable& exact, const ProblemInstance& instance,
                 PhiVariant variant)
{
    const SubInstanceKey root = root_key(instance.dimension());
    const double root_error = deviation_abs(V, exact, instance, root);
    if (variant == PhiVariant::RootOnly) return root_error;
    return std::ldexp(root_error, instance.dimension());
}

ValueTable telescoped_residuals(const ValueTable& values, const ProblemInstance& instance)
{
    const int n = instance.dimension();
    ValueTable sums(n);
    for_each_feasible_key(instance, 0, [&](SubInstanceKey key) { sums.set(key, 0.0); });
    for (int k = 1; k <= n; ++k)
        for_each_feasible_key(instance, k, [&](SubInstanceKey key) {
            CompensatedSum sum;
            sum.add(std::abs(bellman_max(values, instance, key) - values.at(key)));
            for (const auto& outcome : transitions(instance, key)) sum.add(sums.at(outcome.child));
            sums.set(key, sum.value());
        });
    return sums;
}

LocalCheck check_local_deviation(const ValueTable& values, const ValueTable& exact,
                                 const ProblemInstance& instance, SubInstanceKey key)
{
    if (key.free_count < 1) throw std::invalid_argument("check_local_deviation: key needs k >= 1");
    LocalCheck check;
    check.lhs = std::abs(exact.at(key) - values.at(key));
    CompensatedSum rhs;
    for (const auto& outcome : transitions(instance, key))
        rhs.add(std::abs(exact.at(outcome.child) - values.at(outcome.child)));
    rhs.add(std::abs(bellman_max(values, instance, key) - values.at(key)));
    check.rhs = rhs.value();
    check.holds = within_bound(check.lhs, check.rhs);
    return check;
}

BoundReport verify_bound(const ProblemInstance& instance, const ValueFunction& V, const ValueTable& exact)
{
    const int n = instance.dimension();
    check_guard(n, kTableGuard, "verify_bound");
    const SubInstanceKey root = root_key(n);
    if (!is_feasible(instance, root)) throw InfeasibleError("verify_bound: root is infeasible");

    const ValueTable values = tabulate(V, instance);
    BoundReport report;
    report.phi = std::abs(values.at(root) - exact.at(root));
    report.psi = psi_from_table(values, instance);
    report.holds = within_bound(report.phi, report.psi);

    const ValueTable sums = telescoped_residuals(values, instance);
    for (int k = 1; k <= n && report.violations.empty(); ++k) {
        for_each_feasible_key(instance, k, [&](SubInstanceKey key) {
            if (!report.violations.empty()) return;
            const double lhs = std::abs(exact.at(key) - values.at(key));
            const double rhs = sums.at(key);
            if (!within_bound(lhs, rhs)) report.violations.push_back({key, lhs, rhs});
        });
    }
    if (!report.violations.empty()) report.holds = false;
    return report;
}

BoundReport verify_bound(const ProblemInstance& instance, const ValueFunction& V)
{
    check_guard(instance.dimension(), kTableGuard, "verify_bound");
    return verify_bound(instance, V, build_table(instance).values());
}

}  // namespace rsolve
