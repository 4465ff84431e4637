#include <doctest.h>

#include <random>

#include "rsolve/decode.hpp"
#include "rsolve/model.hpp"
#include "support.hpp"

using namespace test;

TEST_CASE("greedy decode under exact values is optimal")
{
    std::mt19937_64 rng(41);
    for (Family family : kAllFamilies)
        for (int trial = 0; trial < 12; ++trial) {
            const auto f = random_instance(family, static_cast<int>(uniform_int(rng, 1, 12)), rng);
            const auto table = build_table(f);
            const auto result = greedy_solve(table, f);
            CHECK(result.feasible);
            CHECK(close(result.objective, brute_force_root(f), 1e-12));
            CHECK(result.objective == terminal_value(f, result.assignment));
        }
}

TEST_CASE("zero values on knapsack take every profitable item that fits")
{
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 50; ++trial) {
        const auto f = random_instance(Family::KnapsackGuarded, static_cast<int>(uniform_int(rng, 1, 12)), rng);
        const auto& d = f.knapsack_data();
        const auto result = greedy_solve(ZeroValue{}, f);
        double load = 0;
        for (int j = f.dimension() - 1; j >= 0; --j) {
            const bool take = d.c[j] > 0 && load + d.a[j] <= d.b;
            CHECK(result.assignment[j] == take);
            if (take) load += d.a[j];
        }
    }
}

TEST_CASE("single black-box variable")
{
    const auto f = ProblemInstance::black_box(BlackBoxData{1, {0.0, 5.0}});
    const auto result = greedy_solve(ZeroValue{}, f);
    CHECK(result.assignment == BitVector(1, 1));
    CHECK(result.objective == 5.0);
    REQUIRE(result.trace.size() == 1);
    CHECK(result.trace[0].branch_values[0] == 0.0);
    CHECK(result.trace[0].branch_values[1] == 5.0);
}

TEST_CASE("decode trace")
{
    std::mt19937_64 rng(47);
    const HashValue V(3, -2, 2);
    for (Family family : kAllFamilies)
        for (int trial = 0; trial < 10; ++trial) {
            const auto f = random_instance(family, static_cast<int>(uniform_int(rng, 1, 10)), rng);
            const int n = f.dimension();
            const auto result = greedy_solve(V, f);
            REQUIRE(static_cast<int>(result.trace.size()) == n);
            CHECK(result.feasible);
            CHECK(is_feasible(f, SubInstanceKey{0, result.assignment.mask()}));
            CHECK(result.objective == terminal_value(f, result.assignment));
            for (int i = 0; i < n; ++i) {
                const auto& step = result.trace[i];
                CHECK(step.key.free_count == n - i);
                CHECK(step.branch_values[step.chosen].has_value());
                CHECK(result.assignment[n - i - 1] == (step.chosen == 1));
                if (step.branch_values[0] && step.branch_values[1]) {
                    const int better = *step.branch_values[1] > *step.branch_values[0] ? 1 : 0;
                    CHECK(step.chosen == better);
                }
            }
            // The last step sees pinned leaves, so its branch values are objectives.
            const auto& last = result.trace.back();
            for (int b = 0; b < 2; ++b)
                if (last.branch_values[b])
                    CHECK(close(*last.branch_values[b],
                                terminal_value(f, BitVector(n, last.key.suffix | static_cast<std::uint64_t>(b))),
                                1e-12));
            const auto again = greedy_solve(V, f);
            CHECK(again.assignment == result.assignment);
        }
}

TEST_CASE("greedy_prefix follows the decode")
{
    std::mt19937_64 rng(53);
    const HashValue V(5, -1, 1);
    const auto f = random_instance(Family::Mwis, 9, rng);
    const auto result = greedy_solve(V, f);
    for (int k = 0; k <= 9; ++k) {
        const auto key = greedy_prefix(V, f, k);
        CHECK(key.free_count == k);
        CHECK(key.suffix == (result.assignment.mask() & ~low_mask(k)));
    }
    CHECK_THROWS(greedy_prefix(V, f, 10));
}

TEST_CASE("random policy")
{
    std::mt19937_64 rng(59);
    for (Family family : kAllFamilies) {
        const auto f = random_instance(family, 8, rng);
        const auto a = random_solve(f, 17);
        CHECK(a.feasible);
        CHECK(a.objective == terminal_value(f, a.assignment));
        CHECK(random_solve(f, 17).assignment == a.assignment);
    }
    const auto f = ProblemInstance::max_cut(MaxCutData{6, std::vector<double>(36, 1.0)});
    bool differs = false;
    for (std::uint64_t s = 1; s < 20 && !differs; ++s)
        differs = !(random_solve(f, s).assignment == random_solve(f, 0).assignment);
    CHECK(differs);
}

TEST_CASE("relative gap")
{
    CHECK(relative_gap(10, 7) == doctest::Approx(0.3));
    CHECK(relative_gap(0.5, 0) == 0.5);
    CHECK(relative_gap(-4, -6) == 0.5);
}

TEST_CASE("evaluate_gap")
{
    std::mt19937_64 rng(61);
    GeneratorParams p;
    p.n = 8;
    const auto instances = generate(Family::KnapsackGuarded, p, rng, 20);
    std::vector<OracleTable> tables;
    for (const auto& f : instances) tables.push_back(build_table(f));
    const ValueSelector oracle = [&](std::size_t i) -> const ValueFunction& { return tables[i]; };

    const auto report = evaluate_gap(oracle, instances, 1, 3);
    CHECK(report.mean_gap == 0.0);
    CHECK(report.max_gap == 0.0);
    REQUIRE(report.rows.size() == 20);
    CHECK(report.random_mean_gap > 0.0);

    SUBCASE("scaling profits keeps the oracle gap at zero")
    {
        std::vector<ProblemInstance> scaled;
        std::vector<OracleTable> scaled_tables;
        for (const auto& f : instances) {
            auto d = f.knapsack_data();
            for (auto& c : d.c) c *= 10;
            scaled.push_back(ProblemInstance::knapsack(Family::KnapsackGuarded, d));
            scaled_tables.push_back(build_table(scaled.back()));
        }
        const auto r = evaluate_gap([&](std::size_t i) -> const ValueFunction& { return scaled_tables[i]; }, scaled);
        CHECK(r.mean_gap == 0.0);
        for (std::size_t i = 0; i < 20; ++i) CHECK(close(r.rows[i].optimum, 10 * report.rows[i].optimum, 1e-12));
    }

    SUBCASE("random network vs random policy")
    {
        p.n = 10;
        const auto many = generate(Family::KnapsackGuarded, p, rng, 100);
        const auto params = init_params(Family::KnapsackGuarded, 3);
        const NetworkValue V(params);
        const auto r = evaluate_gap(V, many, 9);
        REQUIRE(r.rows.size() == 100);
        CHECK(std::isfinite(r.mean_gap));
        CHECK(std::isfinite(r.random_mean_gap));
        CHECK(r.max_gap >= r.mean_gap);
        CHECK(r.mean_gap >= 0.0);
        for (std::size_t i = 0; i < 100; ++i) {
            CHECK(r.rows[i].index == i);
            CHECK(r.rows[i].gap == relative_gap(r.rows[i].optimum, r.rows[i].objective));
            CHECK(r.rows[i].random_gap >= 0.0);
        }
    }

    SUBCASE("known optima and guard")
    {
        std::vector<double> optima;
        for (const auto& t : tables) optima.push_back(t.root_value());
        CHECK(evaluate_gap(oracle, instances, optima).mean_gap == 0.0);
        const auto empty = evaluate_gap(ZeroValue{}, std::span<const ProblemInstance>{});
        CHECK(empty.rows.empty());
        CHECK(empty.mean_gap == 0.0);
        GeneratorParams big;
        big.n = 25;
        const auto huge = generate(Family::MaxCut, big, rng, 1);
        CHECK_THROWS_AS(evaluate_gap(ZeroValue{}, huge), GuardError);
    }
}
