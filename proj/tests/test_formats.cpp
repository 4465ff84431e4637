#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "rsolve/checkpoint.hpp"
#include "rsolve/cli.hpp"
#include "rsolve/io.hpp"
#include "rsolve/training.hpp"
#include "support.hpp"

using namespace test;
namespace fs = std::filesystem;

// Set RSOLVE_UPDATE_GOLDEN=1 to rewrite the files after an intended format change.

namespace {

const fs::path kGolden = GOLDEN_DIR;

void check_golden(const std::string& name, const std::string& text)
{
    const auto path = kGolden / name;
    if (std::getenv("RSOLVE_UPDATE_GOLDEN")) write_text_file(path, text);
    REQUIRE(fs::exists(path));
    CHECK_MESSAGE(read_text_file(path) == text, "golden mismatch: " << name);
}

std::vector<ProblemInstance> fixed_instances()
{
    const KnapsackData knapsack{{3, 1, 2}, {2, 1, 2}, 3};
    return {
        ProblemInstance::knapsack(Family::KnapsackGuarded, knapsack),
        ProblemInstance::knapsack(Family::KnapsackArtificial, KnapsackData{{3, 1}, {2, 1}, 2}),
        ProblemInstance::knapsack(Family::KnapsackPenalty, knapsack, 0.5),
        ProblemInstance::max_sat(MaxSatData{3, {Clause{{1, -2}}, Clause{{3}}, Clause{{-1, 2, -3}}}, {1.5, 1, -0.5}}),
        ProblemInstance::mwis(MwisData::from_edges(3, {{0, 1}, {1, 2}}, {1, 2, 1.5})),
        ProblemInstance::max_cut(MaxCutData{3, {0, 2, -1, 0.5, 0, 3, 1, 1, 0}}),
        ProblemInstance::black_box(BlackBoxData{2, {0, 1.5, -2, 0.25}}),
    };
}

std::string cli_output(std::vector<std::string> args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    REQUIRE_MESSAGE(code <= kExitViolation, err.str());
    return out.str();
}

struct Scratch {
    fs::path dir = fs::temp_directory_path() / ("rsolve_golden_" + std::to_string(::getpid()));
    Scratch() { fs::create_directories(dir); }
    ~Scratch() { fs::remove_all(dir); }
};

}  // namespace

TEST_CASE("instance JSON lines")
{
    const auto instances = fixed_instances();
    const auto text = instances_to_jsonl(instances);
    check_golden("instances.jsonl", text);
    CHECK(read_instances(kGolden / "instances.jsonl") == instances);
}

TEST_CASE("instance CSV")
{
    check_golden("instances.csv", instances_to_csv(fixed_instances()));
}

TEST_CASE("checkpoint")
{
    Checkpoint cp;
    cp.params = init_params(Family::MaxCut, 7, {3});
    cp.params.seed = 7;
    TrainingState state;
    state.step = 12;
    state.loss_ma = 0.75;
    state.initial_loss = 2.5;
    state.initial_sampled_psi = 1.25;
    state.optimizer.slots = {std::vector<double>(cp.params.theta.size(), 0.125),
                             std::vector<double>(cp.params.theta.size(), 1e-9)};
    cp.training = state;
    Scratch scratch;
    save_checkpoint(scratch.dir / "cp.json", cp);
    check_golden("checkpoint.json", read_text_file(scratch.dir / "cp.json"));
    CHECK(load_checkpoint(kGolden / "checkpoint.json") == cp);
}

TEST_CASE("metrics CSV")
{
    MetricsLog log;
    log.rows.push_back({0, 0.0, 12.5, 3.25, 0.5, 1.0, 1.0, 1e-3});
    log.rows.push_back({100, 0.1 + 0.2, 1.0 / 3.0, 0.0625, 0.0, 2.5, 2.5, 9.9e-4});
    check_golden("metrics.csv", log.to_csv());
    CHECK(MetricsLog::from_csv(read_text_file(kGolden / "metrics.csv")) == log);
}

TEST_CASE("train config")
{
    TrainConfig config;
    config.generator.n = 8;
    config.steps = 500;
    config.optimizer = OptimizerKind::Adam;
    check_golden("train_config.json", to_json(config).dump(2) + "\n");
    CHECK(train_config_from_json(Json::parse(read_text_file(kGolden / "train_config.json"))) == config);
}

TEST_CASE("manifest")
{
    RunManifest m;
    m.command = "gen";
    m.config = Json{{"family", "mwis"}, {"count", 3}};
    m.seed = 42;
    m.inputs = {};
    m.outputs = {"instances.jsonl"};
    m.wall_clock_seconds = 0.5;
    m.started_at = "2026-01-01T00:00:00Z";
    check_golden("manifest.json", to_json(m).dump(2) + "\n");
    const auto parsed = manifest_from_json(Json::parse(read_text_file(kGolden / "manifest.json")));
    CHECK(to_json(parsed) == to_json(m));

    // A manifest written by the CLI has the same shape; time fields vary.
    Scratch scratch;
    const auto out = (scratch.dir / "i.jsonl").string();
    cli_output({"gen", "--family", "mwis", "--count", "3", "--seed", "42", "--out", out});
    auto written = Json::parse(read_text_file(manifest_path_for(out)));
    for (const char* key : {"wall_clock_seconds", "started_at"}) {
        REQUIRE(written.contains(key));
        written.erase(key);
    }
    written["outputs"] = Json::array({"instances.jsonl"});
    check_golden("manifest_gen.json", written.dump(2) + "\n");
}

TEST_CASE("command outputs")
{
    const auto instances = (kGolden / "instances.jsonl").string();
    check_golden("bound_report.json", cli_output({"verify-bound", "--instances", instances, "--value", "zero"}));
    check_golden("gap_report.json", cli_output({"eval", "--instances", instances, "--value", "zero", "--seed", "3"}));
    check_golden("gap_report.csv",
                 cli_output({"eval", "--instances", instances, "--value", "zero", "--seed", "3", "--format", "csv"}));
    check_golden("oracle.jsonl", cli_output({"oracle", "--instances", instances, "--table"}));
    check_golden("solve.jsonl", cli_output({"solve", "--instances", instances, "--value", "zero", "--trace"}));

    // Reports parse back into their documented fields.
    const auto bound = Json::parse(read_text_file(kGolden / "bound_report.json"));
    CHECK(bound.at("rows").size() == 7);
    for (const auto& row : bound.at("rows"))
        for (const char* key : {"index", "phi", "psi", "holds", "violations"}) CHECK(row.contains(key));
}
