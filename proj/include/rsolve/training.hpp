#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rsolve/checkpoint.hpp"
#include "rsolve/model.hpp"
#include "rsolve/problems.hpp"
#include "rsolve/serialization.hpp"

namespace rsolve {

enum class OptimizerKind { Sgd, Momentum, Adam };

std::string_view optimizer_name(OptimizerKind kind);
OptimizerKind parse_optimizer(std::string_view name);

/// Largest eval dimension; exact Phi and Psi are enumerated at every eval.
inline constexpr int kMaxEvalDimension = 12;

struct TrainConfig {
    Family family = Family::KnapsackGuarded;
    GeneratorParams generator;
    int batch_size = 64;
    std::int64_t steps = 20000;
    // lr_t = learning_rate / (1 + lr_decay * t)
    double learning_rate = 1e-3;
    double lr_decay = 1e-4;
    OptimizerKind optimizer = OptimizerKind::Sgd;
    double momentum = 0.9;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    // Geometric interpolation from start to end over schedule_steps, then flat.
    double alpha_max_start = 1.0;
    double alpha_max_end = 50.0;
    double alpha_abs_start = 1.0;
    double alpha_abs_end = 50.0;
    std::int64_t schedule_steps = 20000;
    AbsKind abs_kind = AbsKind::Tanh;
    LossKind loss_kind = LossKind::Smoothed;
    std::uint64_t seed = 1;
    int eval_size = 32;
    int n_eval = 0;  // 0 means min(generator.n, kMaxEvalDimension)
    std::int64_t eval_interval = 1000;
    double decode_mixture = 0.5;
    int max_retries = 64;
    double ma_decay = 0.99;
    double divergence_factor = 1e6;
    std::vector<int> hidden{64, 64, 64};
    Activation activation = Activation::Tanh;
    int threads = 1;

    int resolved_n_eval() const;
    void validate() const;

    friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

/// Every field, defaults included.
Json to_json(const TrainConfig& config);
/// Missing fields take defaults; unknown fields are rejected.
TrainConfig train_config_from_json(const Json& j);

double alpha_schedule(double start, double end, std::int64_t step, std::int64_t horizon);
double learning_rate_at(const TrainConfig& config, std::int64_t step);

/// How sub-instance keys are drawn for one instance.
struct SamplerSettings {
    double decode_mixture = 0.5;  // probability of a greedy-decode-visited suffix
    int max_retries = 64;         // uniform suffix draws per k before k is redrawn
    int max_level_draws = 1024;   // k redraws before giving up
};

/// k uniform on 1..n; the suffix is either visited by greedy decode under
/// `policy` (probability decode_mixture, needs a policy) or uniform random
/// bits, redrawn until feasible.
SubInstanceKey sample_key(const ProblemInstance& instance, std::mt19937_64& rng, const SamplerSettings& settings,
                          const ValueFunction* policy = nullptr);

/// r samples, each from a fresh generated instance carrying weight p(f). Each
/// sample uses its own stream seeded from `rng`, so the batch does not depend
/// on `threads`.
std::vector<ResidualSample> sample_batch(Family family, const GeneratorParams& generator, std::mt19937_64& rng,
                                         int r, const SamplerSettings& settings = {},
                                         const ValueFunction* policy = nullptr, int threads = 1);

/// loss(params, batch) with the given loss settings.
double loss(const ModelParams& params, std::span<const ResidualSample> batch, const LossSettings& settings);

class DivergenceError : public Error {
public:
    using Error::Error;
};

struct MetricsRow {
    std::int64_t step = 0;
    double loss_ma = 0.0;
    double psi_exact_eval = 0.0;
    double phi_exact_eval = 0.0;
    double decode_gap_mean = 0.0;
    double alpha_max = 0.0;
    double alpha_abs = 0.0;
    double lr = 0.0;

    friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct MetricsLog {
    std::vector<MetricsRow> rows;

    std::string to_csv() const;
    static MetricsLog from_csv(std::string_view text);

    friend bool operator==(const MetricsLog&, const MetricsLog&) = default;
};

struct TrainResult {
    Checkpoint checkpoint;
    MetricsLog metrics;
    /// Mean random-policy decode gap on the eval set.
    double baseline_gap_mean = 0.0;
};

using ProgressFn = std::function<void(const MetricsRow&)>;

/// Runs config.steps updates (continuing from `resume` when given). Evaluates
/// at the start step, every eval_interval steps and at the end; throws Error
/// if an eval ever shows Phi > Psi, DivergenceError on blow-up.
TrainResult train(const TrainConfig& config, const std::optional<Checkpoint>& resume = std::nullopt,
                  const ProgressFn& progress = {});

}  // namespace rsolve
