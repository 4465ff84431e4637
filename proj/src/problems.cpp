#include "rsolve/problems.hpp"

#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace rsolve {

namespace {

void require(bool condition, const char* message)
{
    if (!condition) throw std::invalid_argument(message);
}

bool all_finite(const std::vector<double>& values)
{
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

double knapsack_objective(const KnapsackData& data, std::uint64_t x)
{
    double total = 0.0;
    for (std::size_t j = 0; j < data.c.size(); ++j)
        if ((x >> j) & 1u) total += data.c[j];
    return total;
}

double knapsack_load(const std::vector<double>& sizes, std::uint64_t x)
{
    double load = 0.0;
    for (std::size_t j = 0; j < sizes.size(); ++j)
        if ((x >> j) & 1u) load += sizes[j];
    return load;
}

double max_cut_objective(const MaxCutData& data, std::uint64_t x)
{
    double total = 0.0;
    for (int i = 0; i < data.n; ++i) {
        if (!((x >> i) & 1u)) continue;
        for (int j = 0; j < data.n; ++j)
            if (!((x >> j) & 1u)) total += data.at(i, j);
    }
    return total;
}

double max_sat_objective(const MaxSatData& data, std::uint64_t x)
{
    double total = 0.0;
    for (std::size_t i = 0; i < data.clauses.size(); ++i)
        if (data.clauses[i].satisfied_by(x)) total += data.coeffs[i];
    return total;
}

bool independent(const MwisData& data, std::uint64_t set)
{
    for (std::uint64_t rest = set; rest != 0; rest &= rest - 1) {
        const int i = std::countr_zero(rest);
        if (data.adjacency[i] & set) return false;
    }
    return true;
}

}  // namespace

std::string_view family_name(Family family)
{
    switch (family) {
    case Family::KnapsackGuarded: return "knapsack_guarded";
    case Family::KnapsackArtificial: return "knapsack_artificial";
    case Family::KnapsackPenalty: return "knapsack_penalty";
    case Family::MaxSat: return "max_sat";
    case Family::Mwis: return "mwis";
    case Family::MaxCut: return "max_cut";
    case Family::BlackBox: return "black_box";
    }
    return "unknown";
}

Family parse_family(std::string_view name)
{
    for (Family family : kAllFamilies)
        if (family_name(family) == name) return family;
    throw std::invalid_argument("unknown problem family: " + std::string(name));
}

bool is_knapsack(Family family)
{
    return family == Family::KnapsackGuarded || family == Family::KnapsackArtificial ||
           family == Family::KnapsackPenalty;
}

bool KnapsackData::integral() const
{
    auto is_int = [](double v) { return std::isfinite(v) && std::floor(v) == v; };
    if (!is_int(b)) return false;
    for (double v : a)
        if (!is_int(v)) return false;
    return true;
}

double KnapsackData::total_size() const { return std::accumulate(a.begin(), a.end(), 0.0); }

double KnapsackData::total_profit() const { return std::accumulate(c.begin(), c.end(), 0.0); }

bool Clause::satisfied_by(std::uint64_t assignment) const
{
    for (int literal : literals) {
        const int position = std::abs(literal) - 1;
        const bool value = (assignment >> position) & 1u;
        if (value == (literal > 0)) return true;
    }
    return false;
}

std::uint64_t MwisData::closed_neighborhood(int node) const
{
    return adjacency[node] | (std::uint64_t{1} << node);
}

std::vector<std::pair<int, int>> MwisData::edges() const
{
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < size(); ++i)
        for (int j = i + 1; j < size(); ++j)
            if ((adjacency[i] >> j) & 1u) out.emplace_back(i, j);
    return out;
}

MwisData MwisData::from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                              std::vector<double> weights)
{
    require(n >= 1 && n <= kMaxDimension, "mwis: node count out of range");
    MwisData data;
    data.adjacency.assign(n, 0);
    data.w = std::move(weights);
    for (auto [i, j] : edges) {
        require(i >= 0 && i < n && j >= 0 && j < n, "mwis: edge endpoint out of range");
        require(i != j, "mwis: self-loops are not allowed");
        data.adjacency[i] |= std::uint64_t{1} << j;
        data.adjacency[j] |= std::uint64_t{1} << i;
    }
    return data;
}

// ---------------------------------------------------------------------------

ProblemInstance::ProblemInstance(Family family, Payload payload, double weight)
    : family_(family), payload_(std::move(payload)), weight_(weight), dimension_(0)
{
    require(std::isfinite(weight) && weight >= 0.0, "instance weight must be finite and >= 0");
}

ProblemInstance ProblemInstance::knapsack(Family family, KnapsackData data, double weight)
{
    require(is_knapsack(family), "knapsack factory needs a knapsack family");
    const std::size_t n = data.c.size();
    require(n >= 1, "knapsack: need at least one item");
    require(data.a.size() == n, "knapsack: c and a differ in length");
    require(all_finite(data.c) && all_finite(data.a) && std::isfinite(data.b),
            "knapsack: non-finite data");
    for (double size : data.a) require(size > 0.0, "knapsack: sizes must be positive");
    const int dimension = static_cast<int>(n) + (family == Family::KnapsackArtificial ? 1 : 0);
    require(dimension <= kMaxDimension, "knapsack: too many items");

    ProblemInstance instance(family, std::move(data), weight);
    instance.dimension_ = dimension;
    const auto& stored = instance.knapsack_data();
    instance.sizes_ = stored.a;
    if (family == Family::KnapsackArtificial) instance.sizes_.push_back(-stored.total_size());
    return instance;
}

ProblemInstance ProblemInstance::max_sat(MaxSatData data, double weight)
{
    require(data.n >= 1 && data.n <= kMaxDimension, "max_sat: variable count out of range");
    require(!data.clauses.empty(), "max_sat: need at least one clause");
    require(data.coeffs.size() == data.clauses.size(), "max_sat: one coefficient per clause");
    require(all_finite(data.coeffs), "max_sat: non-finite coefficient");
    for (const auto& clause : data.clauses) {
        require(!clause.literals.empty(), "max_sat: empty clause");
        for (int literal : clause.literals)
            require(literal != 0 && std::abs(literal) <= data.n, "max_sat: literal out of range");
    }
    const int n = data.n;
    ProblemInstance instance(Family::MaxSat, std::move(data), weight);
    instance.dimension_ = n;
    return instance;
}

ProblemInstance ProblemInstance::mwis(MwisData data, double weight)
{
    const int n = data.size();
    require(n >= 1 && n <= kMaxDimension, "mwis: node count out of range");
    require(static_cast<int>(data.adjacency.size()) == n, "mwis: adjacency size mismatch");
    require(all_finite(data.w), "mwis: non-finite weight");
    for (int i = 0; i < n; ++i) {
        require((data.adjacency[i] & ~low_mask(n)) == 0, "mwis: adjacency beyond node count");
        require(!((data.adjacency[i] >> i) & 1u), "mwis: self-loops are not allowed");
        for (int j = 0; j < n; ++j)
            require(((data.adjacency[i] >> j) & 1u) == ((data.adjacency[j] >> i) & 1u),
                    "mwis: adjacency must be symmetric");
    }
    ProblemInstance instance(Family::Mwis, std::move(data), weight);
    instance.dimension_ = n;
    return instance;
}

ProblemInstance ProblemInstance::max_cut(MaxCutData data, double weight)
{
    require(data.n >= 1 && data.n <= kMaxDimension, "max_cut: node count out of range");
    require(data.R.size() == static_cast<std::size_t>(data.n) * data.n,
            "max_cut: reward matrix must be n x n");
    require(all_finite(data.R), "max_cut: non-finite reward");
    const int n = data.n;
    ProblemInstance instance(Family::MaxCut, std::move(data), weight);
    instance.dimension_ = n;
    return instance;
}

ProblemInstance ProblemInstance::black_box(BlackBoxData data, double weight)
{
    require(data.n >= 1, "black_box: need at least one variable");
    check_guard(data.n, kEnumerationGuard, "black_box truth table");
    require(data.values.size() == (std::size_t{1} << data.n),
            "black_box: truth table must have 2^n entries");
    require(all_finite(data.values), "black_box: non-finite value");
    const int n = data.n;
    ProblemInstance instance(Family::BlackBox, std::move(data), weight);
    instance.dimension_ = n;
    return instance;
}

ProblemInstance ProblemInstance::with_weight(double weight) const
{
    require(std::isfinite(weight) && weight >= 0.0, "instance weight must be finite and >= 0");
    ProblemInstance copy = *this;
    copy.weight_ = weight;
    return copy;
}

// ---------------------------------------------------------------------------

bool is_feasible_assignment(const ProblemInstance& instance, std::uint64_t x)
{
    return is_feasible(instance, {0, x});
}

bool is_feasible(const ProblemInstance& instance, SubInstanceKey key)
{
    switch (instance.family()) {
    case Family::KnapsackGuarded:
        return knapsack_load(instance.sizes(), key.suffix) <= instance.knapsack_data().b;
    case Family::KnapsackArtificial: {
        // Cheapest completion: free items out, x_0 (negative size) in if free.
        double load = knapsack_load(instance.sizes(), key.suffix);
        if (key.free_count == instance.dimension()) load += instance.sizes().back();
        return load <= instance.knapsack_data().b;
    }
    case Family::Mwis:
        return independent(instance.mwis_data(), key.suffix);
    default:
        return true;
    }
}

double terminal_value(const ProblemInstance& instance, const BitVector& x)
{
    if (x.size() != instance.dimension())
        throw std::invalid_argument("terminal_value: assignment length differs from dimension");
    return terminal_value(instance, x.mask());
}

double terminal_value(const ProblemInstance& instance, std::uint64_t x)
{
    if (!is_feasible_assignment(instance, x))
        throw InfeasibleError("terminal_value: assignment violates the " +
                              std::string(family_name(instance.family())) + " constraint");
    switch (instance.family()) {
    case Family::KnapsackGuarded:
        return knapsack_objective(instance.knapsack_data(), x);
    case Family::KnapsackArtificial: {
        const auto& data = instance.knapsack_data();
        const int n = static_cast<int>(data.c.size());
        const bool artificial = (x >> n) & 1u;
        return knapsack_objective(data, x) - (artificial ? data.total_profit() : 0.0);
    }
    case Family::KnapsackPenalty: {
        const auto& data = instance.knapsack_data();
        const double overload = knapsack_load(data.a, x) - data.b;
        return knapsack_objective(data, x) - data.total_profit() * std::max(0.0, overload);
    }
    case Family::MaxSat:
        return max_sat_objective(instance.max_sat_data(), x);
    case Family::Mwis: {
        const auto& data = instance.mwis_data();
        double total = 0.0;
        for (int i = 0; i < data.size(); ++i)
            if ((x >> i) & 1u) total += data.w[i];
        return total;
    }
    case Family::MaxCut:
        return max_cut_objective(instance.max_cut_data(), x);
    case Family::BlackBox:
        return instance.black_box_data().values[x];
    }
    return 0.0;
}

double leaf_value(const ProblemInstance& instance, std::uint64_t x)
{
    switch (instance.family()) {
    case Family::KnapsackGuarded:
    case Family::KnapsackArtificial:
    case Family::Mwis:
    case Family::MaxCut:
        return 0.0;
    default:
        return terminal_value(instance, x);
    }
}

Transitions transitions(const ProblemInstance& instance, SubInstanceKey key)
{
    if (key.free_count < 1) throw std::invalid_argument("transitions: key has no free variable");
    const int position = key.free_count - 1;
    const std::uint64_t bit = std::uint64_t{1} << position;
    const SubInstanceKey zero_child{position, key.suffix};
    const SubInstanceKey one_child{position, key.suffix | bit};

    double zero_reward = 0.0;
    double one_reward = 0.0;
    switch (instance.family()) {
    case Family::KnapsackGuarded:
    case Family::KnapsackArtificial: {
        const auto& data = instance.knapsack_data();
        const int items = static_cast<int>(data.c.size());
        one_reward = position < items ? data.c[position] : -data.total_profit();
        break;
    }
    case Family::Mwis:
        one_reward = instance.mwis_data().w[position];
        break;
    case Family::MaxCut: {
        // Pair (k, j), j > k: x_k = 1, x_j = 0 earns R_kj; x_k = 0, x_j = 1 earns R_jk.
        const auto& data = instance.max_cut_data();
        for (int j = position + 1; j < data.n; ++j) {
            if ((key.suffix >> j) & 1u)
                zero_reward += data.at(j, position);
            else
                one_reward += data.at(position, j);
        }
        break;
    }
    default:
        break;
    }

    Transitions out;
    if (is_feasible(instance, zero_child)) out.push({zero_child, zero_reward, 0});
    if (is_feasible(instance, one_child)) out.push({one_child, one_reward, 1});
    return out;
}

double path_reward(const ProblemInstance& instance, std::uint64_t x)
{
    const int n = instance.dimension();
    double total = 0.0;
    for (int k = n; k >= 1; --k) {
        const SubInstanceKey key{k, x & ~low_mask(k)};
        const int wanted = static_cast<int>((x >> (k - 1)) & 1u);
        bool found = false;
        for (const auto& outcome : transitions(instance, key)) {
            if (outcome.bit == wanted) {
                total += outcome.reward;
                found = true;
            }
        }
        if (!found) throw InfeasibleError("path_reward: assignment leaves the feasible region");
    }
    return total;
}

}  // namespace rsolve
