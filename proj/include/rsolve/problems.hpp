#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "rsolve/bits.hpp"

namespace rsolve {

enum class Family {
    KnapsackGuarded,
    KnapsackArtificial,
    KnapsackPenalty,
    MaxSat,
    Mwis,
    MaxCut,
    BlackBox,
};

inline constexpr std::array<Family, 7> kAllFamilies = {
    Family::KnapsackGuarded, Family::KnapsackArtificial, Family::KnapsackPenalty,
    Family::MaxSat,          Family::Mwis,               Family::MaxCut,
    Family::BlackBox,
};

std::string_view family_name(Family family);
Family parse_family(std::string_view name);
bool is_knapsack(Family family);

/// Profits c, positive sizes a and capacity b of a 0/1 knapsack.
struct KnapsackData {
    std::vector<double> c;
    std::vector<double> a;
    double b = 0.0;

    /// True when every a_j and b are integers.
    bool integral() const;
    double total_size() const;
    double total_profit() const;

    friend bool operator==(const KnapsackData&, const KnapsackData&) = default;
};

/// Disjunction of literals; literal +j means x_j, -j means not x_j (1-based).
struct Clause {
    std::vector<int> literals;

    bool satisfied_by(std::uint64_t assignment) const;

    friend bool operator==(const Clause&, const Clause&) = default;
};

struct MaxSatData {
    int n = 0;
    std::vector<Clause> clauses;
    std::vector<double> coeffs;

    friend bool operator==(const MaxSatData&, const MaxSatData&) = default;
};

/// Node-weighted simple graph. adjacency[i] has bit j set iff {i, j} is an
/// edge; the closed neighborhood N(i) is adjacency[i] plus i itself.
struct MwisData {
    std::vector<std::uint64_t> adjacency;
    std::vector<double> w;

    int size() const { return static_cast<int>(w.size()); }
    std::uint64_t closed_neighborhood(int node) const;
    std::vector<std::pair<int, int>> edges() const;
    static MwisData from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                               std::vector<double> weights);

    friend bool operator==(const MwisData&, const MwisData&) = default;
};

/// Dense row-major n x n reward matrix.
struct MaxCutData {
    int n = 0;
    std::vector<double> R;

    double at(int i, int j) const { return R[static_cast<std::size_t>(i) * n + j]; }

    friend bool operator==(const MaxCutData&, const MaxCutData&) = default;
};

/// Arbitrary f given by its truth table; values[mask] = f(x) where bit j of
/// mask is x_{j+1}.
struct BlackBoxData {
    int n = 0;
    std::vector<double> values;

    friend bool operator==(const BlackBoxData&, const BlackBoxData&) = default;
};

/// One objective over binary variables together with its probability mass.
/// Immutable once built; the factories validate every payload invariant.
class ProblemInstance {
public:
    using Payload = std::variant<KnapsackData, MaxSatData, MwisData, MaxCutData, BlackBoxData>;

    static ProblemInstance knapsack(Family family, KnapsackData data, double weight = 1.0);
    static ProblemInstance max_sat(MaxSatData data, double weight = 1.0);
    static ProblemInstance mwis(MwisData data, double weight = 1.0);
    static ProblemInstance max_cut(MaxCutData data, double weight = 1.0);
    static ProblemInstance black_box(BlackBoxData data, double weight = 1.0);

    Family family() const { return family_; }
    /// Number of binary decision variables; knapsack_artificial adds x_0 as
    /// the last variable.
    int dimension() const { return dimension_; }
    double weight() const { return weight_; }
    ProblemInstance with_weight(double weight) const;

    const Payload& payload() const { return payload_; }
    const KnapsackData& knapsack_data() const { return std::get<KnapsackData>(payload_); }
    const MaxSatData& max_sat_data() const { return std::get<MaxSatData>(payload_); }
    const MwisData& mwis_data() const { return std::get<MwisData>(payload_); }
    const MaxCutData& max_cut_data() const { return std::get<MaxCutData>(payload_); }
    const BlackBoxData& black_box_data() const { return std::get<BlackBoxData>(payload_); }

    /// Item sizes indexed by variable position; for knapsack_artificial the
    /// last entry is -sum(a), the size of x_0.
    const std::vector<double>& sizes() const { return sizes_; }

    friend bool operator==(const ProblemInstance& lhs, const ProblemInstance& rhs)
    {
        return lhs.family_ == rhs.family_ && lhs.weight_ == rhs.weight_ &&
               lhs.payload_ == rhs.payload_;
    }

private:
    ProblemInstance(Family family, Payload payload, double weight);

    Family family_;
    Payload payload_;
    double weight_;
    int dimension_;
    std::vector<double> sizes_;
};

/// Objective f(x) of a full assignment. Throws InfeasibleError when x
/// violates a hard constraint (guarded/artificial knapsack, MWIS).
double terminal_value(const ProblemInstance& instance, const BitVector& x);
double terminal_value(const ProblemInstance& instance, std::uint64_t x);

/// Value pinned at fully fixed points (k = 0): the part of f(x) not carried
/// by transition rewards. Zero for reward-bearing families, f(x) otherwise.
double leaf_value(const ProblemInstance& instance, std::uint64_t x);

/// Whether the sub-instance has at least one feasible completion.
bool is_feasible(const ProblemInstance& instance, SubInstanceKey key);
bool is_feasible_assignment(const ProblemInstance& instance, std::uint64_t x);

/// Fixing variable k (the highest free one) to `bit`, landing on `child`.
struct TransitionOutcome {
    SubInstanceKey child;
    double reward = 0.0;
    int bit = 0;
};

/// Feasible branches out of a key: the 0-branch first when present.
class Transitions {
public:
    void push(const TransitionOutcome& outcome) { items_[count_++] = outcome; }
    int size() const { return count_; }
    bool empty() const { return count_ == 0; }
    const TransitionOutcome& operator[](int i) const { return items_[i]; }
    const TransitionOutcome* begin() const { return items_.data(); }
    const TransitionOutcome* end() const { return items_.data() + count_; }

private:
    std::array<TransitionOutcome, 2> items_{};
    int count_ = 0;
};

/// Branches of a key with k >= 1, each carrying the additive reward of the
/// family's optimality equation. Only branches with feasible children.
Transitions transitions(const ProblemInstance& instance, SubInstanceKey key);

/// Sum of branch rewards collected along the path from the root to x.
double path_reward(const ProblemInstance& instance, std::uint64_t x);

// ---------------------------------------------------------------------------
// Instance generators

struct GeneratorParams {
    int n = 10;
    // knapsack
    double profit_min = 0.0;
    double profit_max = 1.0;
    double size_min = 1.0;
    double size_max = 20.0;
    bool integral_sizes = true;
    double capacity_ratio = 0.5;
    // max-sat
    int clauses = 0;  // 0 means 4n
    int clause_length = 3;
    double clause_weight_min = 0.0;
    double clause_weight_max = 1.0;
    // mwis / max-cut
    double edge_probability = 0.3;
    double node_weight_min = 0.0;
    double node_weight_max = 1.0;
    bool fixed_graph = false;
    double reward_min = 0.0;
    double reward_max = 1.0;
    bool symmetric = true;
    // black box
    double value_min = -1.0;
    double value_max = 1.0;

    friend bool operator==(const GeneratorParams&, const GeneratorParams&) = default;
};

/// Throws std::invalid_argument when the parameters are unusable for family.
void validate_generator_params(Family family, const GeneratorParams& params);

/// Draws `count` instances with uniform weights 1/count. In fixed-graph mode
/// (MWIS) one adjacency is drawn and shared; only weights are resampled.
std::vector<ProblemInstance> generate(Family family, const GeneratorParams& params,
                                      std::mt19937_64& rng, int count);

}  // namespace rsolve
