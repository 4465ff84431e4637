#include "rsolve/training.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>
#include <stdexcept>

#include "parallel.hpp"
#include "rsolve/core.hpp"
#include "rsolve/decode.hpp"
#include "rsolve/io.hpp"
#include "rsolve/oracle.hpp"
#include "rsolve/random.hpp"

namespace rsolve {

namespace {

constexpr std::uint64_t kTrainStream = 1;
constexpr std::uint64_t kEvalStream = 2;
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kBaselineStream = 4;

constexpr const char* kMetricsHeader = "step,loss_ma,psi_exact_eval,phi_exact_eval,decode_gap_mean,alpha_max,alpha_abs,lr";

template <class T>
void read_field(const Json& j, const char* name, T& out)
{
    if (j.contains(name)) out = j.at(name).get<T>();
}

}  // namespace

std::string_view optimizer_name(OptimizerKind kind)
{
    switch (kind) {
    case OptimizerKind::Sgd: return "sgd";
    case OptimizerKind::Momentum: return "momentum";
    case OptimizerKind::Adam: return "adam";
    }
    return "sgd";
}

OptimizerKind parse_optimizer(std::string_view name)
{
    if (name == "sgd") return OptimizerKind::Sgd;
    if (name == "momentum") return OptimizerKind::Momentum;
    if (name == "adam") return OptimizerKind::Adam;
    throw std::invalid_argument("unknown optimizer: " + std::string(name));
}

int TrainConfig::resolved_n_eval() const
{
    return n_eval > 0 ? n_eval : std::min(generator.n, kMaxEvalDimension);
}

void TrainConfig::validate() const
{
    validate_generator_params(family, generator);
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (steps < 0) throw std::invalid_argument("steps must be >= 0");
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be > 0");
    if (!(lr_decay >= 0.0)) throw std::invalid_argument("lr_decay must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw std::invalid_argument("momentum must be in [0, 1)");
    if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
        throw std::invalid_argument("adam betas must be in [0, 1)");
    if (!(adam_epsilon > 0.0)) throw std::invalid_argument("adam_epsilon must be > 0");
    for (double a : {alpha_max_start, alpha_max_end, alpha_abs_start, alpha_abs_end})
        if (!(a > 0.0)) throw std::invalid_argument("alpha schedule values must be > 0");
    if (schedule_steps < 1) throw std::invalid_argument("schedule_steps must be >= 1");
    if (eval_size < 1) throw std::invalid_argument("eval_size must be >= 1");
    if (n_eval < 0 || resolved_n_eval() > kMaxEvalDimension)
        throw std::invalid_argument("n_eval must be in 1.." + std::to_string(kMaxEvalDimension));
    if (eval_interval < 1) throw std::invalid_argument("eval_interval must be >= 1");
    if (!(decode_mixture >= 0.0 && decode_mixture <= 1.0))
        throw std::invalid_argument("decode_mixture must be in [0, 1]");
    if (max_retries < 1) throw std::invalid_argument("max_retries must be >= 1");
    if (!(ma_decay >= 0.0 && ma_decay < 1.0)) throw std::invalid_argument("ma_decay must be in [0, 1)");
    if (!(divergence_factor > 1.0)) throw std::invalid_argument("divergence_factor must be > 1");
    if (hidden.empty()) throw std::invalid_argument("hidden must list at least one layer");
    for (int width : hidden)
        if (width < 1) throw std::invalid_argument("hidden widths must be >= 1");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
}

Json to_json(const TrainConfig& c)
{
    return Json{
        {"family", std::string(family_name(c.family))},
        {"generator", to_json(c.generator)},
        {"batch_size", c.batch_size},
        {"steps", c.steps},
        {"learning_rate", c.learning_rate},
        {"lr_decay", c.lr_decay},
        {"optimizer", std::string(optimizer_name(c.optimizer))},
        {"momentum", c.momentum},
        {"adam_beta1", c.adam_beta1},
        {"adam_beta2", c.adam_beta2},
        {"adam_epsilon", c.adam_epsilon},
        {"alpha_max_start", c.alpha_max_start},
        {"alpha_max_end", c.alpha_max_end},
        {"alpha_abs_start", c.alpha_abs_start},
        {"alpha_abs_end", c.alpha_abs_end},
        {"schedule_steps", c.schedule_steps},
        {"abs_kind", std::string(abs_kind_name(c.abs_kind))},
        {"loss_kind", std::string(loss_kind_name(c.loss_kind))},
        {"seed", c.seed},
        {"eval_size", c.eval_size},
        {"n_eval", c.n_eval},
        {"eval_interval", c.eval_interval},
        {"decode_mixture", c.decode_mixture},
        {"max_retries", c.max_retries},
        {"ma_decay", c.ma_decay},
        {"divergence_factor", c.divergence_factor},
        {"hidden", c.hidden},
        {"activation", std::string(activation_name(c.activation))},
        {"threads", c.threads},
    };
}

TrainConfig train_config_from_json(const Json& j)
{
    if (!j.is_object()) throw std::invalid_argument("train config must be a JSON object");
    const Json known = to_json(TrainConfig{});
    for (const auto& [name, value] : j.items())
        if (!known.contains(name)) throw std::invalid_argument("train config: unknown field '" + name + "'");
    TrainConfig c;
    try {
        if (j.contains("family")) c.family = parse_family(j.at("family").get<std::string>());
        if (j.contains("generator")) c.generator = generator_params_from_json(j.at("generator"));
        read_field(j, "batch_size", c.batch_size);
        read_field(j, "steps", c.steps);
        read_field(j, "learning_rate", c.learning_rate);
        read_field(j, "lr_decay", c.lr_decay);
        if (j.contains("optimizer")) c.optimizer = parse_optimizer(j.at("optimizer").get<std::string>());
        read_field(j, "momentum", c.momentum);
        read_field(j, "adam_beta1", c.adam_beta1);
        read_field(j, "adam_beta2", c.adam_beta2);
        read_field(j, "adam_epsilon", c.adam_epsilon);
        read_field(j, "alpha_max_start", c.alpha_max_start);
        read_field(j, "alpha_max_end", c.alpha_max_end);
        read_field(j, "alpha_abs_start", c.alpha_abs_start);
        read_field(j, "alpha_abs_end", c.alpha_abs_end);
        read_field(j, "schedule_steps", c.schedule_steps);
        if (j.contains("abs_kind")) c.abs_kind = parse_abs_kind(j.at("abs_kind").get<std::string>());
        if (j.contains("loss_kind")) c.loss_kind = parse_loss_kind(j.at("loss_kind").get<std::string>());
        read_field(j, "seed", c.seed);
        read_field(j, "eval_size", c.eval_size);
        read_field(j, "n_eval", c.n_eval);
        read_field(j, "eval_interval", c.eval_interval);
        read_field(j, "decode_mixture", c.decode_mixture);
        read_field(j, "max_retries", c.max_retries);
        read_field(j, "ma_decay", c.ma_decay);
        read_field(j, "divergence_factor", c.divergence_factor);
        read_field(j, "hidden", c.hidden);
        if (j.contains("activation")) c.activation = parse_activation(j.at("activation").get<std::string>());
        read_field(j, "threads", c.threads);
    } catch (const Json::exception& e) {
        throw std::invalid_argument(std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

double alpha_schedule(double start, double end, std::int64_t step, std::int64_t horizon)
{
    const double t = std::min(1.0, static_cast<double>(step) / static_cast<double>(horizon));
    return start * std::pow(end / start, t);
}

double learning_rate_at(const TrainConfig& config, std::int64_t step)
{
    return config.learning_rate / (1.0 + config.lr_decay * static_cast<double>(step));
}

// ---------------------------------------------------------------------------
// Sampling

SubInstanceKey sample_key(const ProblemInstance& instance, std::mt19937_64& rng, const SamplerSettings& settings,
                          const ValueFunction* policy)
{
    const int n = instance.dimension();
    if (!is_feasible(instance, root_key(n))) throw InfeasibleError("sampler: instance is infeasible at the root");
    for (int draw = 0; draw < settings.max_level_draws; ++draw) {
        const int k = static_cast<int>(uniform_int(rng, 1, n));
        if (policy && bernoulli(rng, settings.decode_mixture)) return greedy_prefix(*policy, instance, k);
        const int fixed = n - k;
        for (int attempt = 0; attempt < settings.max_retries; ++attempt) {
            const std::uint64_t bits = fixed == 0 ? 0 : rng() & low_mask(fixed);
            const SubInstanceKey key{k, bits << k};
            if (is_feasible(instance, key)) return key;
        }
    }
    throw Error("sampler: retry bound exceeded without a feasible suffix");
}

std::vector<ResidualSample> sample_batch(Family family, const GeneratorParams& generator, std::mt19937_64& rng,
                                         int r, const SamplerSettings& settings, const ValueFunction* policy,
                                         int threads)
{
    if (r < 1) throw std::invalid_argument("sample_batch: r must be >= 1");
    std::vector<std::uint64_t> seeds(r);
    for (auto& s : seeds) s = rng();
    std::vector<ResidualSample> batch(r);
    detail::parallel_for(static_cast<std::size_t>(r), threads, [&](std::size_t i) {
        std::mt19937_64 local(seeds[i]);
        auto drawn = generate(family, generator, local, 1);
        if (drawn.empty()) throw Error("sample_batch: generator exhausted");
        auto instance = std::make_shared<const ProblemInstance>(std::move(drawn.front()));
        const SubInstanceKey key = sample_key(*instance, local, settings, policy);
        batch[i] = ResidualSample{instance, key, instance->weight()};
    });
    return batch;
}

double loss(const ModelParams& params, std::span<const ResidualSample> batch, const LossSettings& settings)
{
    return batch_loss(NetworkValue(params), batch, settings);
}

// ---------------------------------------------------------------------------
// Metrics

std::string MetricsLog::to_csv() const
{
    std::string out = kMetricsHeader;
    out += '\n';
    for (const auto& r : rows) {
        out += std::to_string(r.step);
        for (double v : {r.loss_ma, r.psi_exact_eval, r.phi_exact_eval, r.decode_gap_mean, r.alpha_max, r.alpha_abs,
                         r.lr}) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

MetricsLog MetricsLog::from_csv(std::string_view text)
{
    std::istringstream in{std::string(text)};
    std::string line;
    if (!std::getline(in, line) || line != kMetricsHeader) throw std::invalid_argument("metrics: unexpected header");
    MetricsLog log;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) fields.push_back(cell);
        if (fields.size() != 8) throw std::invalid_argument("metrics: expected 8 columns");
        MetricsRow r;
        r.step = std::stoll(fields[0]);
        double* targets[] = {&r.loss_ma, &r.psi_exact_eval, &r.phi_exact_eval, &r.decode_gap_mean,
                             &r.alpha_max, &r.alpha_abs, &r.lr};
        for (int i = 0; i < 7; ++i) *targets[i] = std::stod(fields[i + 1]);
        log.rows.push_back(r);
    }
    return log;
}

// ---------------------------------------------------------------------------
// Training loop

namespace {

struct EvalSet {
    std::vector<ProblemInstance> instances;
    std::vector<OracleTable> tables;
    std::vector<double> optima;
};

EvalSet make_eval_set(const TrainConfig& config)
{
    GeneratorParams params = config.generator;
    params.n = config.resolved_n_eval();
    std::mt19937_64 rng(derive_seed(config.seed, kEvalStream));
    EvalSet set;
    set.instances = generate(config.family, params, rng, config.eval_size);
    for (const auto& instance : set.instances) {
        set.tables.push_back(build_table(instance));
        set.optima.push_back(set.tables.back().root_value());
    }
    return set;
}

struct EvalResult {
    double psi = 0.0;
    double phi = 0.0;
    double gap = 0.0;
};

EvalResult evaluate(const ValueFunction& V, const EvalSet& set, int threads)
{
    const std::size_t count = set.instances.size();
    std::vector<ValueTable> tables(count);
    std::vector<double> psi(count), phi(count);
    detail::parallel_for(count, threads, [&](std::size_t i) {
        const ProblemInstance& instance = set.instances[i];
        tables[i] = tabulate(V, instance);
        psi[i] = psi_from_table(tables[i], instance);
        phi[i] = phi_exact(TableValue(tables[i]), set.tables[i].values(), instance);
    });
    EvalResult out;
    for (std::size_t i = 0; i < count; ++i) {
        if (!within_bound(phi[i], psi[i]))
            throw Error("eval: exact Phi exceeds exact Psi on eval instance " + std::to_string(i));
        const double p = set.instances[i].weight();
        out.psi += p * psi[i];
        out.phi += p * phi[i];
    }
    std::vector<TableValue> views;
    views.reserve(count);
    for (const auto& t : tables) views.emplace_back(t);
    const GapReport gaps = evaluate_gap([&](std::size_t i) -> const ValueFunction& { return views[i]; },
                                        set.instances, set.optima, 0, threads);
    out.gap = gaps.mean_gap;
    return out;
}

void apply_update(const TrainConfig& config, std::int64_t step, double lr, std::vector<double>& theta,
                  const std::vector<double>& g, OptimizerState& state)
{
    const std::size_t p = theta.size();
    switch (config.optimizer) {
    case OptimizerKind::Sgd:
        for (std::size_t i = 0; i < p; ++i) theta[i] -= lr * g[i];
        break;
    case OptimizerKind::Momentum: {
        auto& v = state.slots.at(0);
        for (std::size_t i = 0; i < p; ++i) {
            v[i] = config.momentum * v[i] + g[i];
            theta[i] -= lr * v[i];
        }
        break;
    }
    case OptimizerKind::Adam: {
        auto& m = state.slots.at(0);
        auto& v = state.slots.at(1);
        const double t = static_cast<double>(step + 1);
        const double c1 = 1.0 - std::pow(config.adam_beta1, t);
        const double c2 = 1.0 - std::pow(config.adam_beta2, t);
        for (std::size_t i = 0; i < p; ++i) {
            m[i] = config.adam_beta1 * m[i] + (1.0 - config.adam_beta1) * g[i];
            v[i] = config.adam_beta2 * v[i] + (1.0 - config.adam_beta2) * g[i] * g[i];
            theta[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + config.adam_epsilon);
        }
        break;
    }
    }
}

std::size_t slot_count(OptimizerKind kind)
{
    return kind == OptimizerKind::Sgd ? 0 : (kind == OptimizerKind::Momentum ? 1 : 2);
}

}  // namespace

TrainResult train(const TrainConfig& config, const std::optional<Checkpoint>& resume, const ProgressFn& progress)
{
    config.validate();
    TrainResult result;
    ModelParams& params = result.checkpoint.params;
    TrainingState state;
    if (resume) {
        params = resume->params;
        if (params.family != config.family) throw std::invalid_argument("resume: checkpoint family differs");
        if (params.architecture.hidden != config.hidden || params.architecture.activation != config.activation)
            throw std::invalid_argument("resume: checkpoint architecture differs from config");
        if (resume->training) state = *resume->training;
    } else {
        params = init_params(config.family, derive_seed(config.seed, kInitStream), config.hidden, config.activation);
        params.seed = config.seed;
    }
    const std::size_t p = params.theta.size();
    if (state.optimizer.slots.empty()) state.optimizer.slots.assign(slot_count(config.optimizer), std::vector<double>(p));
    if (state.optimizer.slots.size() != slot_count(config.optimizer))
        throw std::invalid_argument("resume: optimizer state does not match the configured optimizer");
    if (state.step > config.steps) throw std::invalid_argument("resume: checkpoint is past the step budget");

    const EvalSet eval_set = make_eval_set(config);
    {
        const ZeroValue zero;
        const GapReport baseline = evaluate_gap([&](std::size_t) -> const ValueFunction& { return zero; },
                                                eval_set.instances, eval_set.optima,
                                                derive_seed(config.seed, kBaselineStream), config.threads);
        result.baseline_gap_mean = baseline.random_mean_gap;
    }

    const NetworkValue network(params);
    const SamplerSettings sampler{config.decode_mixture, config.max_retries};

    auto record = [&](std::int64_t step) {
        const EvalResult e = evaluate(network, eval_set, config.threads);
        MetricsRow row;
        row.step = step;
        row.loss_ma = state.loss_ma;
        row.psi_exact_eval = e.psi;
        row.phi_exact_eval = e.phi;
        row.decode_gap_mean = e.gap;
        row.alpha_max = alpha_schedule(config.alpha_max_start, config.alpha_max_end, step, config.schedule_steps);
        row.alpha_abs = alpha_schedule(config.alpha_abs_start, config.alpha_abs_end, step, config.schedule_steps);
        row.lr = learning_rate_at(config, step);
        result.metrics.rows.push_back(row);
        if (progress) progress(row);
    };

    const std::int64_t first = state.step;
    if (first == 0 || first == config.steps) record(first);
    for (std::int64_t t = first; t < config.steps; ++t) {
        LossSettings settings;
        settings.kind = config.loss_kind;
        settings.abs_kind = config.abs_kind;
        settings.alpha_max = alpha_schedule(config.alpha_max_start, config.alpha_max_end, t, config.schedule_steps);
        settings.alpha_abs = alpha_schedule(config.alpha_abs_start, config.alpha_abs_end, t, config.schedule_steps);
        const double lr = learning_rate_at(config, t);

        std::mt19937_64 rng(derive_seed(config.seed, kTrainStream, static_cast<std::uint64_t>(t)));
        const auto batch =
            sample_batch(config.family, config.generator, rng, config.batch_size, sampler, &network, config.threads);
        const LossEvaluation eval = loss_and_gradient(network, batch, settings, config.threads);
        const double sampled_psi = eval.exact_residual_sum / static_cast<double>(batch.size());

        if (t == 0) {
            state.initial_loss = eval.loss;
            state.initial_sampled_psi = sampled_psi;
            state.loss_ma = sampled_psi;
        } else {
            state.loss_ma = config.ma_decay * state.loss_ma + (1.0 - config.ma_decay) * sampled_psi;
            const double reference = std::max(std::abs(state.initial_loss), 1e-12);
            if (eval.loss > config.divergence_factor * reference)
                throw DivergenceError("training diverged at step " + std::to_string(t));
        }

        apply_update(config, t, lr, params.theta, eval.gradient, state.optimizer);
        params.alpha_max = settings.alpha_max;
        params.alpha_abs = settings.alpha_abs;
        state.step = t + 1;
        if (state.step % config.eval_interval == 0 || state.step == config.steps) record(state.step);
    }
    result.checkpoint.training = state;
    return result;
}

}  // namespace rsolve
