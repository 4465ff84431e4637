#include <cmath>
#include <stdexcept>

#include "rsolve/problems.hpp"
#include "rsolve/random.hpp"

namespace rsolve {

namespace {

void require(bool condition, const std::string& message)
{
    if (!condition) throw std::invalid_argument("generator: " + message);
}

void require_range(double lo, double hi, const char* what)
{
    require(std::isfinite(lo) && std::isfinite(hi) && lo <= hi, std::string(what) + " range invalid");
}

int clause_count(const GeneratorParams& params)
{
    return params.clauses > 0 ? params.clauses : 4 * params.n;
}

KnapsackData draw_knapsack(const GeneratorParams& params, std::mt19937_64& rng)
{
    KnapsackData data;
    data.c.resize(params.n);
    data.a.resize(params.n);
    for (int j = 0; j < params.n; ++j) {
        data.c[j] = uniform_real(rng, params.profit_min, params.profit_max);
        if (params.integral_sizes) {
            data.a[j] = static_cast<double>(uniform_int(rng, static_cast<std::int64_t>(params.size_min),
                                                        static_cast<std::int64_t>(params.size_max)));
        } else {
            data.a[j] = uniform_real(rng, params.size_min, params.size_max);
        }
    }
    data.b = params.capacity_ratio * data.total_size();
    if (params.integral_sizes) data.b = std::floor(data.b);
    return data;
}

MaxSatData draw_max_sat(const GeneratorParams& params, std::mt19937_64& rng)
{
    MaxSatData data;
    data.n = params.n;
    const int m = clause_count(params);
    const int length = std::min(params.clause_length, params.n);
    data.clauses.resize(m);
    data.coeffs.resize(m);
    for (int i = 0; i < m; ++i) {
        std::uint64_t used = 0;
        auto& literals = data.clauses[i].literals;
        while (static_cast<int>(literals.size()) < length) {
            const int variable = static_cast<int>(uniform_int(rng, 0, params.n - 1));
            if ((used >> variable) & 1u) continue;
            used |= std::uint64_t{1} << variable;
            literals.push_back(bernoulli(rng, 0.5) ? variable + 1 : -(variable + 1));
        }
        data.coeffs[i] = uniform_real(rng, params.clause_weight_min, params.clause_weight_max);
    }
    return data;
}

std::vector<std::uint64_t> draw_graph(const GeneratorParams& params, std::mt19937_64& rng)
{
    std::vector<std::uint64_t> adjacency(params.n, 0);
    for (int i = 0; i < params.n; ++i) {
        for (int j = i + 1; j < params.n; ++j) {
            if (bernoulli(rng, params.edge_probability)) {
                adjacency[i] |= std::uint64_t{1} << j;
                adjacency[j] |= std::uint64_t{1} << i;
            }
        }
    }
    return adjacency;
}

std::vector<double> draw_weights(int n, double lo, double hi, std::mt19937_64& rng)
{
    std::vector<double> w(n);
    for (auto& value : w) value = uniform_real(rng, lo, hi);
    return w;
}

MaxCutData draw_max_cut(const GeneratorParams& params, std::mt19937_64& rng)
{
    MaxCutData data;
    data.n = params.n;
    data.R.assign(static_cast<std::size_t>(params.n) * params.n, 0.0);
    for (int i = 0; i < params.n; ++i) {
        for (int j = 0; j < params.n; ++j) {
            if (i == j || (params.symmetric && j < i)) continue;
            if (!bernoulli(rng, params.edge_probability)) continue;
            const double r = uniform_real(rng, params.reward_min, params.reward_max);
            data.R[static_cast<std::size_t>(i) * params.n + j] = r;
            if (params.symmetric) data.R[static_cast<std::size_t>(j) * params.n + i] = r;
        }
    }
    return data;
}

BlackBoxData draw_black_box(const GeneratorParams& params, std::mt19937_64& rng)
{
    BlackBoxData data;
    data.n = params.n;
    data.values = draw_weights(1 << params.n, params.value_min, params.value_max, rng);
    return data;
}

}  // namespace

void validate_generator_params(Family family, const GeneratorParams& params)
{
    require(params.n >= 1, "n must be >= 1");
    const int dimension = params.n + (family == Family::KnapsackArtificial ? 1 : 0);
    require(dimension <= kMaxDimension, "n too large");
    switch (family) {
    case Family::KnapsackGuarded:
    case Family::KnapsackArtificial:
    case Family::KnapsackPenalty:
        require_range(params.profit_min, params.profit_max, "profit");
        require_range(params.size_min, params.size_max, "size");
        require(params.size_min > 0.0, "sizes must be positive");
        if (params.integral_sizes)
            require(std::floor(params.size_min) == params.size_min &&
                        std::floor(params.size_max) == params.size_max,
                    "integral sizes need integer bounds");
        require(params.capacity_ratio > 0.0 && params.capacity_ratio <= 1.0,
                "capacity ratio must lie in (0, 1]");
        break;
    case Family::MaxSat:
        require(params.clause_length >= 1, "clause length must be >= 1");
        require(params.clauses >= 0, "clause count must be >= 0");
        require_range(params.clause_weight_min, params.clause_weight_max, "clause weight");
        break;
    case Family::Mwis:
        require(params.edge_probability >= 0.0 && params.edge_probability <= 1.0,
                "edge probability must lie in [0, 1]");
        require_range(params.node_weight_min, params.node_weight_max, "node weight");
        break;
    case Family::MaxCut:
        require(params.edge_probability >= 0.0 && params.edge_probability <= 1.0,
                "edge probability must lie in [0, 1]");
        require_range(params.reward_min, params.reward_max, "reward");
        break;
    case Family::BlackBox:
        require(params.n <= kEnumerationGuard, "black box n above truth-table guard");
        require_range(params.value_min, params.value_max, "value");
        break;
    }
}

std::vector<ProblemInstance> generate(Family family, const GeneratorParams& params,
                                      std::mt19937_64& rng, int count)
{
    validate_generator_params(family, params);
    require(count >= 0, "count must be >= 0");
    std::vector<ProblemInstance> out;
    out.reserve(count);
    const double weight = count > 0 ? 1.0 / count : 0.0;

    std::vector<std::uint64_t> shared_graph;
    if (family == Family::Mwis && params.fixed_graph) shared_graph = draw_graph(params, rng);

    for (int i = 0; i < count; ++i) {
        switch (family) {
        case Family::KnapsackGuarded:
        case Family::KnapsackArtificial:
        case Family::KnapsackPenalty:
            out.push_back(ProblemInstance::knapsack(family, draw_knapsack(params, rng), weight));
            break;
        case Family::MaxSat:
            out.push_back(ProblemInstance::max_sat(draw_max_sat(params, rng), weight));
            break;
        case Family::Mwis: {
            MwisData data;
            data.adjacency = params.fixed_graph ? shared_graph : draw_graph(params, rng);
            data.w = draw_weights(params.n, params.node_weight_min, params.node_weight_max, rng);
            out.push_back(ProblemInstance::mwis(std::move(data), weight));
            break;
        }
        case Family::MaxCut:
            out.push_back(ProblemInstance::max_cut(draw_max_cut(params, rng), weight));
            break;
        case Family::BlackBox:
            out.push_back(ProblemInstance::black_box(draw_black_box(params, rng), weight));
            break;
        }
    }
    return out;
}

}  // namespace rsolve
