#include "rsolve/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <memory>
#include <optional>
#include <random>

#include "rsolve/checkpoint.hpp"
#include "rsolve/core.hpp"
#include "rsolve/decode.hpp"
#include "rsolve/io.hpp"
#include "rsolve/oracle.hpp"
#include "rsolve/serialization.hpp"
#include "rsolve/training.hpp"

namespace rsolve {

namespace {

using Clock = std::chrono::steady_clock;

int resolve_threads(int flag)
{
    if (flag > 0) return flag;
    if (const char* env = std::getenv("RESIDUAL_SOLVE_THREADS")) {
        try {
            const int value = std::stoi(env);
            if (value > 0) return value;
        } catch (const std::exception&) {
        }
        throw std::invalid_argument("RESIDUAL_SOLVE_THREADS must be a positive integer");
    }
    return 1;
}

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void write_manifest(const std::filesystem::path& artifact, RunManifest manifest, Clock::time_point start)
{
    manifest.version = kLibraryVersion;
    manifest.wall_clock_seconds = seconds_since(start);
    write_text_file(manifest_path_for(artifact), to_json(manifest).dump(2) + "\n");
}

// Writes `text` to `path`, or to `out` when path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& out)
{
    if (path.empty())
        out << text;
    else
        write_text_file(path, text);
}

/// "zero", "oracle", or a checkpoint path.
class ValueSource {
public:
    explicit ValueSource(std::string spec) : spec_(std::move(spec))
    {
        if (spec_ != "zero" && spec_ != "oracle") {
            checkpoint_ = load_checkpoint(spec_);
            network_ = std::make_unique<NetworkValue>(checkpoint_->params);
        }
    }
    ValueSource(const ValueSource&) = delete;
    ValueSource& operator=(const ValueSource&) = delete;

    void prepare(std::span<const ProblemInstance> instances)
    {
        for (const auto& instance : instances) {
            if (checkpoint_ && instance.family() != checkpoint_->params.family)
                throw std::invalid_argument("checkpoint family " + std::string(family_name(checkpoint_->params.family)) +
                                            " does not match instance family " +
                                            std::string(family_name(instance.family())));
            if (spec_ == "oracle") tables_.push_back(build_table(instance));
        }
    }

    const ValueFunction& at(std::size_t index) const
    {
        if (network_) return *network_;
        if (spec_ == "oracle") return tables_.at(index);
        return zero_;
    }

    ValueSelector selector() const
    {
        return [this](std::size_t i) -> const ValueFunction& { return at(i); };
    }

    const std::string& spec() const { return spec_; }

private:
    std::string spec_;
    std::optional<Checkpoint> checkpoint_;
    std::unique_ptr<NetworkValue> network_;
    ZeroValue zero_;
    std::vector<OracleTable> tables_;
};

Json trace_to_json(const DecodeResult& result, int n)
{
    Json steps = Json::array();
    for (const auto& step : result.trace) {
        Json values = Json::array();
        for (const auto& v : step.branch_values) values.push_back(v ? Json(*v) : Json(nullptr));
        Json entry = key_to_json(step.key, n);
        entry["branch_values"] = values;
        entry["chosen"] = step.chosen;
        steps.push_back(entry);
    }
    return steps;
}

std::string gap_report_csv(const GapReport& report)
{
    std::string out = "index,n,optimum,objective,gap,random_objective,random_gap\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.index) + ',' + std::to_string(r.n);
        for (double v : {r.optimum, r.objective, r.gap, r.random_objective, r.random_gap}) out += ',' + format_double(v);
        out += '\n';
    }
    return out;
}

Json gap_report_json(const GapReport& report)
{
    Json rows = Json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"index", r.index},
                        {"n", r.n},
                        {"optimum", r.optimum},
                        {"objective", r.objective},
                        {"gap", r.gap},
                        {"random_objective", r.random_objective},
                        {"random_gap", r.random_gap}});
    return Json{{"instances", report.rows.size()},
                {"mean_gap", report.mean_gap},
                {"max_gap", report.max_gap},
                {"random_mean_gap", report.random_mean_gap},
                {"random_max_gap", report.random_max_gap},
                {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Subcommands

struct GenOptions {
    std::string family;
    int count = 1;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string params_path;
    std::optional<int> n;
    std::string format = "jsonl";
};

int cmd_gen(const GenOptions& o, std::ostream&)
{
    const auto start = Clock::now();
    const Family family = parse_family(o.family);
    GeneratorParams params;
    if (!o.params_path.empty()) params = generator_params_from_json(Json::parse(read_text_file(o.params_path)));
    if (o.n) params.n = *o.n;
    validate_generator_params(family, params);
    const std::uint64_t seed = o.seed ? *o.seed : std::random_device{}();

    std::mt19937_64 rng(seed);
    const auto instances = generate(family, params, rng, o.count);
    if (o.format == "jsonl")
        write_text_file(o.out, instances_to_jsonl(instances));
    else
        write_text_file(o.out, instances_to_csv(instances));

    RunManifest manifest;
    manifest.command = "gen";
    manifest.config = {{"family", o.family}, {"count", o.count}, {"generator", to_json(params)}, {"format", o.format}};
    manifest.seed = seed;
    manifest.outputs = {o.out};
    if (!o.params_path.empty()) manifest.inputs = {o.params_path};
    manifest.started_at = utc_timestamp();
    write_manifest(o.out, manifest, start);
    return kExitOk;
}

struct TrainOptions {
    std::string config_path;
    std::string out;
    std::string metrics;
    std::string resume;
    std::optional<std::int64_t> steps;
    std::optional<std::uint64_t> seed;
    std::optional<int> batch_size;
    std::optional<double> learning_rate;
    std::optional<std::string> family;
    std::optional<int> n;
    std::optional<std::int64_t> eval_interval;
    std::optional<std::string> optimizer;
    int threads = 0;
    bool quiet = false;
};

int cmd_train(const TrainOptions& o, std::ostream& err)
{
    const auto start = Clock::now();
    Json raw = o.config_path.empty() ? Json::object() : Json::parse(read_text_file(o.config_path));
    if (o.steps) raw["steps"] = *o.steps;
    if (o.seed) raw["seed"] = *o.seed;
    if (o.batch_size) raw["batch_size"] = *o.batch_size;
    if (o.learning_rate) raw["learning_rate"] = *o.learning_rate;
    if (o.family) raw["family"] = *o.family;
    if (o.n) raw["generator"]["n"] = *o.n;
    if (o.eval_interval) raw["eval_interval"] = *o.eval_interval;
    if (o.optimizer) raw["optimizer"] = *o.optimizer;
    TrainConfig config = train_config_from_json(raw);
    if (o.threads > 0 || std::getenv("RESIDUAL_SOLVE_THREADS")) config.threads = resolve_threads(o.threads);

    std::optional<Checkpoint> resume;
    if (!o.resume.empty()) resume = load_checkpoint(o.resume);

    ProgressFn progress;
    if (!o.quiet)
        progress = [&err](const MetricsRow& r) {
            err << "step " << r.step << "  loss_ma " << r.loss_ma << "  psi " << r.psi_exact_eval << "  phi "
                << r.phi_exact_eval << "  gap " << r.decode_gap_mean << '\n';
        };
    const TrainResult result = train(config, resume, progress);
    if (!o.quiet) err << "random-policy gap " << result.baseline_gap_mean << '\n';

    const std::string metrics_path = o.metrics.empty() ? o.out + ".metrics.csv" : o.metrics;
    save_checkpoint(o.out, result.checkpoint);
    write_text_file(metrics_path, result.metrics.to_csv());

    RunManifest manifest;
    manifest.command = "train";
    Json resolved = to_json(config);
    // Thread count never changes results; keep it out of the reproducible config.
    resolved.erase("threads");
    manifest.config = resolved;
    manifest.seed = config.seed;
    if (!o.config_path.empty()) manifest.inputs.push_back(o.config_path);
    if (!o.resume.empty()) manifest.inputs.push_back(o.resume);
    manifest.outputs = {o.out, metrics_path};
    manifest.started_at = utc_timestamp();
    write_manifest(o.out, manifest, start);
    write_manifest(metrics_path, manifest, start);
    return kExitOk;
}

struct SolveOptions {
    std::string instances;
    std::string value = "oracle";
    std::string out;
    bool trace = false;
};

int cmd_solve(const SolveOptions& o, std::ostream& out)
{
    const auto start = Clock::now();
    const auto instances = read_instances(o.instances);
    ValueSource source(o.value);
    source.prepare(instances);
    std::string text;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const DecodeResult result = greedy_solve(source.at(i), instances[i]);
        Json line{{"index", i},
                  {"assignment", result.assignment.to_vector()},
                  {"objective", result.objective},
                  {"feasible", result.feasible}};
        if (o.trace) line["trace"] = trace_to_json(result, instances[i].dimension());
        text += line.dump() + "\n";
    }
    emit(o.out, text, out);
    if (!o.out.empty()) {
        RunManifest manifest;
        manifest.command = "solve";
        manifest.config = {{"value", o.value}, {"trace", o.trace}};
        manifest.inputs = {o.instances};
        manifest.outputs = {o.out};
        manifest.started_at = utc_timestamp();
        write_manifest(o.out, manifest, start);
    }
    return kExitOk;
}

struct EvalOptions {
    std::string instances;
    std::string value = "oracle";
    std::string out;
    std::string format = "json";
    std::uint64_t seed = 0;
    int threads = 0;
};

int cmd_eval(const EvalOptions& o, std::ostream& out)
{
    const auto start = Clock::now();
    const auto instances = read_instances(o.instances);
    ValueSource source(o.value);
    source.prepare(instances);
    const GapReport report = evaluate_gap(source.selector(), instances, o.seed, resolve_threads(o.threads));
    emit(o.out, o.format == "csv" ? gap_report_csv(report) : gap_report_json(report).dump(2) + "\n", out);
    if (!o.out.empty()) {
        RunManifest manifest;
        manifest.command = "eval";
        manifest.config = {{"value", o.value}, {"format", o.format}};
        manifest.seed = o.seed;
        manifest.inputs = {o.instances};
        manifest.outputs = {o.out};
        manifest.started_at = utc_timestamp();
        write_manifest(o.out, manifest, start);
    }
    return kExitOk;
}

struct OracleOptions {
    std::string instances;
    std::string out;
    bool table = false;
};

int cmd_oracle(const OracleOptions& o, std::ostream& out)
{
    const auto start = Clock::now();
    const auto instances = read_instances(o.instances);
    std::string text;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const ProblemInstance& instance = instances[i];
        const int n = instance.dimension();
        Json line{{"index", i}, {"instance_id", instance_id(instance)}};
        if (o.table) {
            const OracleTable table = build_table(instance);
            line["root_value"] = table.root_value();
            line["assignment"] = greedy_solve(table, instance).assignment.to_vector();
            Json entries = Json::array();
            for (int k = n; k >= 0; --k)
                for (const auto& flagged : enumerate_keys(instance, k)) {
                    if (!flagged.feasible) continue;
                    Json entry = key_to_json(flagged.key, n);
                    entry["value"] = table.values().at(flagged.key);
                    entries.push_back(entry);
                }
            line["entries"] = entries;
        } else {
            line["root_value"] = brute_force_root(instance);
        }
        text += line.dump() + "\n";
    }
    emit(o.out, text, out);
    if (!o.out.empty()) {
        RunManifest manifest;
        manifest.command = "oracle";
        manifest.config = {{"table", o.table}};
        manifest.inputs = {o.instances};
        manifest.outputs = {o.out};
        manifest.started_at = utc_timestamp();
        write_manifest(o.out, manifest, start);
    }
    return kExitOk;
}

struct VerifyOptions {
    std::string instances;
    std::string value = "zero";
    std::string out;
};

int cmd_verify_bound(const VerifyOptions& o, std::ostream& out)
{
    const auto start = Clock::now();
    const auto instances = read_instances(o.instances);
    for (const auto& instance : instances) check_guard(instance.dimension(), kTableGuard, "verify-bound");
    ValueSource source(o.value);
    source.prepare(instances);
    Json rows = Json::array();
    std::size_t violations = 0;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const BoundReport report = verify_bound(instances[i], source.at(i));
        Json row = to_json(report, instances[i].dimension());
        row["index"] = i;
        if (!report.holds) ++violations;
        rows.push_back(row);
    }
    const Json summary{{"value", o.value}, {"instances", instances.size()}, {"violations", violations}, {"rows", rows}};
    emit(o.out, summary.dump(2) + "\n", out);
    if (!o.out.empty()) {
        RunManifest manifest;
        manifest.command = "verify-bound";
        manifest.config = {{"value", o.value}};
        manifest.inputs = {o.instances};
        manifest.outputs = {o.out};
        manifest.started_at = utc_timestamp();
        write_manifest(o.out, manifest, start);
    }
    return violations == 0 ? kExitOk : kExitViolation;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Residual-minimization value estimates for sequential combinatorial optimization", "rsolve"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kLibraryVersion));

    GenOptions gen;
    auto* gen_cmd = app.add_subcommand("gen", "Generate random instances as JSON lines");
    gen_cmd->add_option("--family", gen.family, "Problem family")->required();
    gen_cmd->add_option("--count", gen.count, "Number of instances")->check(CLI::NonNegativeNumber);
    gen_cmd->add_option("--seed", gen.seed, "RNG seed (random when omitted; recorded in the manifest)");
    gen_cmd->add_option("--out", gen.out, "Output path")->required();
    gen_cmd->add_option("--params", gen.params_path, "Generator parameters (JSON)");
    gen_cmd->add_option("--n", gen.n, "Instance dimension");
    gen_cmd->add_option("--format", gen.format, "jsonl or csv")->check(CLI::IsMember({"jsonl", "csv"}));

    TrainOptions tr;
    auto* train_cmd = app.add_subcommand("train", "Train a value network by residual minimization");
    train_cmd->add_option("--config", tr.config_path, "Training config (JSON); missing fields take defaults");
    train_cmd->add_option("--out", tr.out, "Checkpoint path")->required();
    train_cmd->add_option("--metrics", tr.metrics, "Metrics CSV path (default <out>.metrics.csv)");
    train_cmd->add_option("--resume", tr.resume, "Continue from a checkpoint");
    train_cmd->add_option("--steps", tr.steps);
    train_cmd->add_option("--seed", tr.seed);
    train_cmd->add_option("--batch-size", tr.batch_size);
    train_cmd->add_option("--learning-rate", tr.learning_rate);
    train_cmd->add_option("--family", tr.family);
    train_cmd->add_option("--n", tr.n);
    train_cmd->add_option("--eval-interval", tr.eval_interval);
    train_cmd->add_option("--optimizer", tr.optimizer);
    train_cmd->add_option("--threads", tr.threads, "Worker cap (default $RESIDUAL_SOLVE_THREADS or 1)");
    train_cmd->add_flag("--quiet", tr.quiet, "No progress lines");

    SolveOptions so;
    auto* solve_cmd = app.add_subcommand("solve", "Greedy decode under a value source");
    solve_cmd->add_option("--instances", so.instances)->required();
    solve_cmd->add_option("--value", so.value, "Checkpoint path, 'zero' or 'oracle'");
    solve_cmd->add_option("--out", so.out, "Output JSON lines (stdout when omitted)");
    solve_cmd->add_flag("--trace", so.trace, "Include the per-step trace");

    EvalOptions ev;
    auto* eval_cmd = app.add_subcommand("eval", "Decode gaps against the exact optimum");
    eval_cmd->add_option("--instances", ev.instances)->required();
    eval_cmd->add_option("--value", ev.value, "Checkpoint path, 'zero' or 'oracle'");
    eval_cmd->add_option("--out", ev.out, "Report path (stdout when omitted)");
    eval_cmd->add_option("--format", ev.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    eval_cmd->add_option("--seed", ev.seed, "Seed of the random-policy baseline");
    eval_cmd->add_option("--threads", ev.threads);

    OracleOptions orc;
    auto* oracle_cmd = app.add_subcommand("oracle", "Exact optimum and optional value table");
    oracle_cmd->add_option("--instances", orc.instances)->required();
    oracle_cmd->add_option("--out", orc.out, "Output JSON lines (stdout when omitted)");
    oracle_cmd->add_flag("--table", orc.table, "Emit every feasible key's optimal value");

    VerifyOptions vb;
    auto* verify_cmd = app.add_subcommand("verify-bound", "Check Phi <= Psi and the per-key bound");
    verify_cmd->add_option("--instances", vb.instances)->required();
    verify_cmd->add_option("--value", vb.value, "Checkpoint path, 'zero' or 'oracle'");
    verify_cmd->add_option("--out", vb.out, "Report path (stdout when omitted)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen_cmd) return cmd_gen(gen, out);
        if (*train_cmd) return cmd_train(tr, err);
        if (*solve_cmd) return cmd_solve(so, out);
        if (*eval_cmd) return cmd_eval(ev, out);
        if (*oracle_cmd) return cmd_oracle(orc, out);
        if (*verify_cmd) return cmd_verify_bound(vb, out);
    } catch (const GuardError& e) {
        err << "error: " << e.what() << '\n';
        return kExitGuard;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace rsolve
