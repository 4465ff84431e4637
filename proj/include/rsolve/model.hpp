#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "rsolve/core.hpp"
#include "rsolve/problems.hpp"

namespace rsolve {

// ---------------------------------------------------------------------------
// Smooth surrogates

/// Softmax-weighted mean (x e^{ax} + y e^{ay}) / (e^{ax} + e^{ay}), evaluated
/// with the larger argument factored out. Returns x exactly when x == y.
double smooth_max(double x, double y, double alpha);

struct SmoothMaxPartials {
    double value = 0.0;
    double dx = 0.0;
    double dy = 0.0;
};
SmoothMaxPartials smooth_max_partials(double x, double y, double alpha);

enum class AbsKind {
    Tanh,  // x * tanh(alpha x); zero at zero
    Sqrt,  // sqrt(x^2 + alpha^2); equals alpha at zero
};

double smooth_abs(double x, double alpha, AbsKind kind);
double smooth_abs_derivative(double x, double alpha, AbsKind kind);

std::string_view abs_kind_name(AbsKind kind);
AbsKind parse_abs_kind(std::string_view name);

// ---------------------------------------------------------------------------
// Features

/// Feature count of the default encoder for a family.
int feature_dim(Family family);

/// Deterministic fixed-length description of the sub-instance (instance, key).
std::vector<double> encode(const ProblemInstance& instance, SubInstanceKey key);
void encode_into(const ProblemInstance& instance, SubInstanceKey key, std::span<double> out);

// ---------------------------------------------------------------------------
// Parameterized value mapping

enum class Activation { Tanh, Softplus };

std::string_view activation_name(Activation activation);
Activation parse_activation(std::string_view name);

/// Feed-forward scorer shape: input -> hidden... -> scalar. Depth does not
/// depend on the instance dimension.
struct Architecture {
    int input_dim = 0;
    std::vector<int> hidden{64, 64, 64};
    Activation activation = Activation::Tanh;

    std::size_t parameter_count() const;

    friend bool operator==(const Architecture&, const Architecture&) = default;
};

/// theta holds, per layer, the row-major weight matrix followed by the bias.
struct ModelParams {
    Family family = Family::KnapsackGuarded;
    Architecture architecture;
    std::vector<double> theta;
    double alpha_max = 1.0;
    double alpha_abs = 1.0;
    std::uint64_t seed = 0;

    void validate() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

/// Weights uniform in +-1/sqrt(fan_in), biases zero.
ModelParams init_params(Family family, std::uint64_t seed, std::vector<int> hidden = {64, 64, 64},
                        Activation activation = Activation::Tanh);

/// Intermediate activations of one forward pass, reused by backward().
struct Tape {
    std::vector<double> buffer;
};

/// A value mapping differentiable in a flat parameter vector.
class ParametricValue : public ValueFunction {
public:
    virtual std::size_t parameter_count() const = 0;
    /// Estimate at a key with k >= 1, recording what backward() needs.
    virtual double forward(const ProblemInstance& instance, SubInstanceKey key, Tape& tape) const = 0;
    /// Adds upstream * dV/dtheta into grad.
    virtual void backward(const Tape& tape, double upstream, std::span<double> grad) const = 0;

    double estimate(const ProblemInstance& instance, SubInstanceKey key) const override;
};

/// The network value V(xi; f; theta). Holds a reference to the parameters.
class NetworkValue final : public ParametricValue {
public:
    explicit NetworkValue(const ModelParams& params);

    std::size_t parameter_count() const override { return params_.theta.size(); }
    double forward(const ProblemInstance& instance, SubInstanceKey key, Tape& tape) const override;
    void backward(const Tape& tape, double upstream, std::span<double> grad) const override;

    /// Network output on a raw feature vector.
    double evaluate_features(std::span<const double> features, Tape& tape) const;

private:
    const ModelParams& params_;
};

/// value(params, instance, key): leaf_value at k = 0, network output otherwise.
double value(const ModelParams& params, const ProblemInstance& instance, SubInstanceKey key);

// ---------------------------------------------------------------------------
// Residual loss

enum class LossKind {
    Smoothed,  // smooth_max over branches, smooth_abs of the residual
    Exact,     // true max and |.|, subgradient sgn with sgn(0) = 0
};

std::string_view loss_kind_name(LossKind kind);
LossKind parse_loss_kind(std::string_view name);

struct LossSettings {
    LossKind kind = LossKind::Smoothed;
    double alpha_max = 1.0;
    /// Sharpness of the absolute-value surrogate; the sqrt kind uses the
    /// offset 1 / alpha_abs so that larger values always mean a closer fit.
    double alpha_abs = 1.0;
    AbsKind abs_kind = AbsKind::Tanh;
};

/// One sub-instance (f, xi) drawn for a stochastic step, weighted by p(f).
struct ResidualSample {
    std::shared_ptr<const ProblemInstance> instance;
    SubInstanceKey key;
    double weight = 1.0;
};

struct SampleLoss {
    double loss = 0.0;          // weight * surrogate |delta|
    double exact_residual = 0.0;  // |delta| with true max, unweighted
};

struct LossEvaluation {
    double loss = 0.0;
    double exact_residual_sum = 0.0;  // sum of unweighted exact |delta|
    std::vector<double> gradient;
};

/// Loss of one sample for any value mapping (no gradient).
SampleLoss sample_loss(const ValueFunction& V, const ResidualSample& sample, const LossSettings& settings);

/// Sum over the batch of weight * surrogate |delta| (exact |delta| in exact mode).
double batch_loss(const ValueFunction& V, std::span<const ResidualSample> batch, const LossSettings& settings);

/// Loss and its reverse-mode gradient. Per-sample gradients are reduced in
/// batch order, so the result does not depend on `threads`.
LossEvaluation loss_and_gradient(const ParametricValue& V, std::span<const ResidualSample> batch,
                                 const LossSettings& settings, int threads = 1);

std::vector<double> gradient(const ParametricValue& V, std::span<const ResidualSample> batch,
                             const LossSettings& settings, int threads = 1);

}  // namespace rsolve
