#include "rsolve/serialization.hpp"

#include <cstdio>
#include <stdexcept>

namespace rsolve {

namespace {

const Json& field(const Json& j, const char* name)
{
    if (!j.contains(name)) throw std::invalid_argument(std::string("instance JSON: missing field '") + name + "'");
    return j.at(name);
}

double weight_of(const Json& j) { return j.contains("weight") ? j.at("weight").get<double>() : 1.0; }

}  // namespace

Json to_json(const ProblemInstance& instance)
{
    Json j;
    j["family"] = std::string(family_name(instance.family()));
    j["weight"] = instance.weight();
    switch (instance.family()) {
    case Family::KnapsackGuarded:
    case Family::KnapsackArtificial:
    case Family::KnapsackPenalty: {
        const auto& data = instance.knapsack_data();
        j["c"] = data.c;
        j["a"] = data.a;
        j["b"] = data.b;
        break;
    }
    case Family::MaxSat: {
        const auto& data = instance.max_sat_data();
        j["n"] = data.n;
        Json clauses = Json::array();
        for (std::size_t i = 0; i < data.clauses.size(); ++i)
            clauses.push_back({{"c", data.coeffs[i]}, {"literals", data.clauses[i].literals}});
        j["clauses"] = clauses;
        break;
    }
    case Family::Mwis: {
        const auto& data = instance.mwis_data();
        j["n"] = data.size();
        j["w"] = data.w;
        Json edges = Json::array();
        for (auto [u, v] : data.edges()) edges.push_back({u + 1, v + 1});
        j["edges"] = edges;
        break;
    }
    case Family::MaxCut: {
        const auto& data = instance.max_cut_data();
        j["n"] = data.n;
        Json rows = Json::array();
        for (int i = 0; i < data.n; ++i) {
            std::vector<double> row(data.R.begin() + static_cast<std::ptrdiff_t>(i) * data.n,
                                    data.R.begin() + static_cast<std::ptrdiff_t>(i + 1) * data.n);
            rows.push_back(row);
        }
        j["R"] = rows;
        break;
    }
    case Family::BlackBox: {
        const auto& data = instance.black_box_data();
        j["n"] = data.n;
        j["values"] = data.values;
        break;
    }
    }
    return j;
}

ProblemInstance instance_from_json(const Json& j)
{
    if (!j.is_object()) throw std::invalid_argument("instance JSON: expected an object");
    const Family family = parse_family(field(j, "family").get<std::string>());
    const double weight = weight_of(j);
    try {
        switch (family) {
        case Family::KnapsackGuarded:
        case Family::KnapsackArtificial:
        case Family::KnapsackPenalty: {
            KnapsackData data;
            data.c = field(j, "c").get<std::vector<double>>();
            data.a = field(j, "a").get<std::vector<double>>();
            data.b = field(j, "b").get<double>();
            return ProblemInstance::knapsack(family, std::move(data), weight);
        }
        case Family::MaxSat: {
            MaxSatData data;
            data.n = field(j, "n").get<int>();
            for (const auto& clause : field(j, "clauses")) {
                data.clauses.push_back({field(clause, "literals").get<std::vector<int>>()});
                data.coeffs.push_back(field(clause, "c").get<double>());
            }
            return ProblemInstance::max_sat(std::move(data), weight);
        }
        case Family::Mwis: {
            const int n = field(j, "n").get<int>();
            std::vector<std::pair<int, int>> edges;
            for (const auto& edge : field(j, "edges")) {
                if (!edge.is_array() || edge.size() != 2)
                    throw std::invalid_argument("instance JSON: edges must be pairs");
                edges.emplace_back(edge[0].get<int>() - 1, edge[1].get<int>() - 1);
            }
            auto data = MwisData::from_edges(n, edges, field(j, "w").get<std::vector<double>>());
            return ProblemInstance::mwis(std::move(data), weight);
        }
        case Family::MaxCut: {
            MaxCutData data;
            data.n = field(j, "n").get<int>();
            for (const auto& row : field(j, "R")) {
                auto values = row.get<std::vector<double>>();
                if (static_cast<int>(values.size()) != data.n)
                    throw std::invalid_argument("instance JSON: R rows must have n entries");
                data.R.insert(data.R.end(), values.begin(), values.end());
            }
            return ProblemInstance::max_cut(std::move(data), weight);
        }
        case Family::BlackBox: {
            BlackBoxData data;
            data.n = field(j, "n").get<int>();
            data.values = field(j, "values").get<std::vector<double>>();
            return ProblemInstance::black_box(std::move(data), weight);
        }
        }
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("instance JSON: ") + e.what());
    }
    throw std::invalid_argument("instance JSON: unhandled family");
}

Json to_json(const GeneratorParams& p)
{
    return Json{
        {"n", p.n},
        {"profit_min", p.profit_min},
        {"profit_max", p.profit_max},
        {"size_min", p.size_min},
        {"size_max", p.size_max},
        {"integral_sizes", p.integral_sizes},
        {"capacity_ratio", p.capacity_ratio},
        {"clauses", p.clauses},
        {"clause_length", p.clause_length},
        {"clause_weight_min", p.clause_weight_min},
        {"clause_weight_max", p.clause_weight_max},
        {"edge_probability", p.edge_probability},
        {"node_weight_min", p.node_weight_min},
        {"node_weight_max", p.node_weight_max},
        {"fixed_graph", p.fixed_graph},
        {"reward_min", p.reward_min},
        {"reward_max", p.reward_max},
        {"symmetric", p.symmetric},
        {"value_min", p.value_min},
        {"value_max", p.value_max},
    };
}

GeneratorParams generator_params_from_json(const Json& j)
{
    GeneratorParams p;
    const Json defaults = to_json(p);
    for (const auto& [name, value] : j.items())
        if (!defaults.contains(name))
            throw std::invalid_argument("generator params: unknown field '" + name + "'");
    Json merged = defaults;
    merged.update(j);
    try {
        p.n = merged.at("n").get<int>();
        p.profit_min = merged.at("profit_min").get<double>();
        p.profit_max = merged.at("profit_max").get<double>();
        p.size_min = merged.at("size_min").get<double>();
        p.size_max = merged.at("size_max").get<double>();
        p.integral_sizes = merged.at("integral_sizes").get<bool>();
        p.capacity_ratio = merged.at("capacity_ratio").get<double>();
        p.clauses = merged.at("clauses").get<int>();
        p.clause_length = merged.at("clause_length").get<int>();
        p.clause_weight_min = merged.at("clause_weight_min").get<double>();
        p.clause_weight_max = merged.at("clause_weight_max").get<double>();
        p.edge_probability = merged.at("edge_probability").get<double>();
        p.node_weight_min = merged.at("node_weight_min").get<double>();
        p.node_weight_max = merged.at("node_weight_max").get<double>();
        p.fixed_graph = merged.at("fixed_graph").get<bool>();
        p.reward_min = merged.at("reward_min").get<double>();
        p.reward_max = merged.at("reward_max").get<double>();
        p.symmetric = merged.at("symmetric").get<bool>();
        p.value_min = merged.at("value_min").get<double>();
        p.value_max = merged.at("value_max").get<double>();
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("generator params: ") + e.what());
    }
    return p;
}

Json key_to_json(SubInstanceKey key, int n)
{
    return Json{{"k", key.free_count}, {"xi", BitVector(n, key.suffix).to_vector()}};
}

Json to_json(const BoundReport& report, int n)
{
    Json violations = Json::array();
    for (const auto& v : report.violations) {
        Json entry = key_to_json(v.key, n);
        entry["lhs"] = v.lhs;
        entry["rhs"] = v.rhs;
        violations.push_back(entry);
    }
    return Json{{"phi", report.phi}, {"psi", report.psi}, {"holds", report.holds}, {"violations", violations}};
}

std::string instance_id(const ProblemInstance& instance)
{
    const std::string text = to_json(instance).dump();
    std::uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 0x100000001b3ull;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

}  // namespace rsolve
