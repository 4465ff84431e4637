#include <doctest.h>

#include <random>

#include "frozen_values.hpp"
#include "support.hpp"

using namespace test;

TEST_CASE("brute_force_root")
{
    CHECK(brute_force_root(ProblemInstance::black_box(BlackBoxData{3, std::vector<double>(8, 7.0)})) == 7.0);
    CHECK(brute_force_root(ProblemInstance::knapsack(Family::KnapsackGuarded, KnapsackData{{1, 2, 3}, {1, 1, 1}, 2})) ==
          5.0);
    // Directed objective: either orientation of the single edge cuts weight 1.
    CHECK(brute_force_root(ProblemInstance::max_cut(MaxCutData{2, {0, 1, 1, 0}})) == 1.0);
    CHECK(brute_force_root(ProblemInstance::max_cut(MaxCutData{3, {0, 2, -1, 0.5, 0, 3, 1, 1, 0}})) ==
          frozen::kMaxCutRoot);

    std::vector<double> c(25, 1.0), a(25, 1.0);
    CHECK_THROWS_AS(brute_force_root(ProblemInstance::knapsack(Family::KnapsackGuarded, KnapsackData{c, a, 3})),
                    GuardError);
}

TEST_CASE("build_table")
{
    SUBCASE("single variable")
    {
        const auto f = ProblemInstance::black_box(BlackBoxData{1, {2.0, -1.0}});
        const auto table = build_table(f);
        CHECK(table.values().size() == 3);
        CHECK(table.root_value() == 2.0);
        CHECK(table.argmax(root_key(1)) == 0);
    }
    SUBCASE("infeasible keys are absent")
    {
        const auto f = ProblemInstance::knapsack(Family::KnapsackGuarded, KnapsackData{{1, 1, 1}, {1, 1, 5}, 2});
        const auto table = build_table(f);
        for (int k = 0; k <= 3; ++k)
            for (const auto& fk : enumerate_keys(f, k)) CHECK(table.values().contains(fk.key) == fk.feasible);
    }
    SUBCASE("every entry equals the enumerated optimum")
    {
        std::mt19937_64 rng(19);
        for (Family family : kAllFamilies)
            for (int trial = 0; trial < 6; ++trial) {
                const auto f = random_instance(family, static_cast<int>(uniform_int(rng, 1, 8)), rng);
                const auto table = build_table(f);
                for (int k = 0; k <= f.dimension(); ++k)
                    for (const auto& fk : enumerate_keys(f, k)) {
                        if (!fk.feasible) continue;
                        CHECK(close(table.values().at(fk.key), naive_optimal(f, fk.key), 1e-12));
                        if (k == 0) CHECK(table.values().at(fk.key) == leaf_value(f, fk.key.suffix));
                    }
                CHECK(close(table.root_value(), brute_force_root(f)));
            }
    }
    SUBCASE("argmax is an optimal branch")
    {
        std::mt19937_64 rng(20);
        for (Family family : kAllFamilies) {
            const auto f = random_instance(family, 7, rng);
            const auto table = build_table(f);
            for (int k = 1; k <= 7; ++k)
                for (const auto& fk : enumerate_keys(f, k)) {
                    if (!fk.feasible) continue;
                    const int best = table.argmax(fk.key);
                    for (const auto& t : transitions(f, fk.key))
                        if (t.bit == best)
                            CHECK(close(t.reward + table.values().at(t.child), table.values().at(fk.key), 1e-12));
                }
        }
    }
    CHECK_THROWS_AS(build_table(ProblemInstance::black_box(BlackBoxData{21, std::vector<double>(1u << 21)})),
                    GuardError);
}

TEST_CASE("dp_knapsack_integer")
{
    CHECK(dp_knapsack_integer(KnapsackData{{10}, {3}, 2}) == 0.0);
    CHECK(dp_knapsack_integer(KnapsackData{{10}, {3}, 3}) == 10.0);
    CHECK_THROWS(dp_knapsack_integer(KnapsackData{{10}, {2.5}, 3}));
    CHECK_THROWS(dp_knapsack_integer(KnapsackData{{10}, {2}, -1}));

    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 40; ++trial) {
        GeneratorParams p;
        p.n = static_cast<int>(uniform_int(rng, 1, 12));
        p.capacity_ratio = uniform_real(rng, 0.05, 1.0);
        const auto f = generate(Family::KnapsackGuarded, p, rng, 1).front();
        CHECK(close(dp_knapsack_integer(f.knapsack_data()), brute_force_root(f)));
    }
}

TEST_CASE("alpha coefficients count recursion paths")
{
    SUBCASE("edgeless pair: both children of {1,2} are {1}")
    {
        const auto alpha = alpha_coefficients(MwisData::from_edges(2, {}, {1, 1}));
        CHECK(alpha == AlphaCoefficients{{0b11, 1}, {0b01, 2}, {0b00, 4}});
    }
    SUBCASE("single node")
    {
        const auto alpha = alpha_coefficients(MwisData::from_edges(1, {}, {1}));
        CHECK(alpha == AlphaCoefficients{{0b1, 1}, {0b0, 2}});
    }
    SUBCASE("path and triangle")
    {
        CHECK(alpha_coefficients(MwisData::from_edges(3, {{0, 1}, {1, 2}}, {1, 1, 1})) ==
              AlphaCoefficients{{0b111, 1}, {0b011, 1}, {0b001, 2}, {0b000, 5}});
        CHECK(alpha_coefficients(MwisData::from_edges(3, {{0, 1}, {1, 2}, {0, 2}}, {1, 1, 1})) ==
              AlphaCoefficients{{0b111, 1}, {0b011, 1}, {0b001, 1}, {0b000, 4}});
    }
    SUBCASE("DAG path counts equal unmemoized occurrence counts")
    {
        std::mt19937_64 rng(29);
        for (int trial = 0; trial < 20; ++trial) {
            const auto f = random_instance(Family::Mwis, static_cast<int>(uniform_int(rng, 1, 8)), rng);
            const auto alpha = alpha_coefficients(f.mwis_data());
            CHECK(alpha == unmemoized_occurrences(f.mwis_data()));
            CHECK(alpha.at(low_mask(f.dimension())) == 1);
        }
    }
    CHECK_THROWS_AS(unmemoized_occurrences(MwisData::from_edges(9, {}, std::vector<double>(9, 1.0))), GuardError);
    CHECK_THROWS_AS(alpha_coefficients(MwisData::from_edges(17, {}, std::vector<double>(17, 1.0))), GuardError);
}

TEST_CASE("sub-graph residual bound")
{
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        const auto f = random_instance(Family::Mwis, static_cast<int>(uniform_int(rng, 1, 8)), rng);
        const auto& data = f.mwis_data();
        const auto alpha = alpha_coefficients(data);
        std::vector<double> V(std::size_t{1} << data.size());
        for (auto& v : V) v = uniform_real(rng, -3, 3);
        const auto check = check_alpha_bound(data, alpha, V);
        CHECK(check.holds);
        CHECK(check.lhs <= check.rhs + 1e-9 * (1 + check.rhs));

        // The exact sub-graph values make every local residual vanish.
        const auto exact = check_alpha_bound(data, alpha, mwis_structural_values(data));
        CHECK(exact.lhs == 0.0);
        CHECK(exact.rhs <= 1e-12);
    }
}

TEST_CASE("mask_to_nodes")
{
    CHECK(mask_to_nodes(0b1011) == std::vector<int>{1, 2, 4});
    CHECK(mask_to_nodes(0).empty());
}
