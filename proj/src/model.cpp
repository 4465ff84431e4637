#include "rsolve/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

#include "parallel.hpp"
#include "rsolve/random.hpp"

namespace rsolve {

// ---------------------------------------------------------------------------
// Smooth surrogates

SmoothMaxPartials smooth_max_partials(double x, double y, double alpha)
{
    if (!(alpha > 0.0)) throw std::invalid_argument("smooth_max: alpha must be positive");
    if (x == y) return {x, 0.5, 0.5};
    // p = e^{ax} / (e^{ax} + e^{ay}) = 1 / (1 + e^{-a(x-y)})
    const double d = alpha * (x - y);
    const double p = d >= 0 ? 1.0 / (1.0 + std::exp(-d)) : std::exp(d) / (1.0 + std::exp(d));
    const double q = 1.0 - p;
    const double spread = alpha * p * q * (x - y);
    // Weight the larger argument by its own exponential factored out.
    const double value = x >= y ? x - q * (x - y) : y - p * (y - x);
    return {value, p + spread, q - spread};
}

double smooth_max(double x, double y, double alpha) { return smooth_max_partials(x, y, alpha).value; }

double smooth_abs(double x, double alpha, AbsKind kind)
{
    if (!(alpha > 0.0)) throw std::invalid_argument("smooth_abs: alpha must be positive");
    switch (kind) {
    case AbsKind::Tanh: return x * std::tanh(alpha * x);
    case AbsKind::Sqrt: return std::hypot(x, alpha);
    }
    return std::abs(x);
}

double smooth_abs_derivative(double x, double alpha, AbsKind kind)
{
    if (!(alpha > 0.0)) throw std::invalid_argument("smooth_abs: alpha must be positive");
    switch (kind) {
    case AbsKind::Tanh: {
        const double t = std::tanh(alpha * x);
        return t + alpha * x * (1.0 - t * t);
    }
    case AbsKind::Sqrt: return x / std::hypot(x, alpha);
    }
    return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0);
}

std::string_view abs_kind_name(AbsKind kind) { return kind == AbsKind::Tanh ? "tanh" : "sqrt"; }

AbsKind parse_abs_kind(std::string_view name)
{
    if (name == "tanh") return AbsKind::Tanh;
    if (name == "sqrt") return AbsKind::Sqrt;
    throw std::invalid_argument("unknown smooth-abs kind: " + std::string(name));
}

std::string_view activation_name(Activation activation)
{
    return activation == Activation::Tanh ? "tanh" : "softplus";
}

Activation parse_activation(std::string_view name)
{
    if (name == "tanh") return Activation::Tanh;
    if (name == "softplus") return Activation::Softplus;
    throw std::invalid_argument("unknown activation: " + std::string(name));
}

std::string_view loss_kind_name(LossKind kind) { return kind == LossKind::Smoothed ? "smoothed" : "exact"; }

LossKind parse_loss_kind(std::string_view name)
{
    if (name == "smoothed") return LossKind::Smoothed;
    if (name == "exact") return LossKind::Exact;
    throw std::invalid_argument("unknown loss kind: " + std::string(name));
}

// ---------------------------------------------------------------------------
// Features

namespace {

constexpr int kKnapsackFeatures = 12;
constexpr int kMaxSatFeatures = 7;
constexpr int kMwisFeatures = 7;
constexpr int kMaxCutFeatures = 6;
constexpr int kBlackBoxFeatures = 4;

bool bit_of(std::uint64_t mask, int position) { return (mask >> position) & 1u; }

void encode_knapsack(const ProblemInstance& instance, SubInstanceKey key, std::span<double> out)
{
    const auto& data = instance.knapsack_data();
    const int items = static_cast<int>(data.c.size());
    const bool artificial = instance.family() == Family::KnapsackArtificial;
    const int free_items = std::min(key.free_count, items);
    const bool x0_free = artificial && key.free_count == instance.dimension();
    const bool x0_on = artificial && !x0_free && bit_of(key.suffix, items);

    const double total_size = data.total_size();
    double total_abs_profit = 0.0;
    for (double c : data.c) total_abs_profit += std::abs(c);
    const double ratio_scale = total_abs_profit > 0 ? total_abs_profit / total_size : 1.0;

    double fixed_load = 0.0;
    double fixed_profit = 0.0;
    for (int j = free_items; j < items; ++j) {
        if (!bit_of(key.suffix, j)) continue;
        fixed_load += data.a[j];
        fixed_profit += data.c[j];
    }
    const double residual = data.b - fixed_load + (x0_on ? total_size : 0.0);

    double free_profit = 0.0;
    double free_size = 0.0;
    double max_ratio = 0.0;
    double sum_ratio = 0.0;
    int fitting = 0;
    double fitting_profit = 0.0;
    for (int j = 0; j < free_items; ++j) {
        free_profit += data.c[j];
        free_size += data.a[j];
        const double ratio = data.c[j] / data.a[j];
        max_ratio = j == 0 ? ratio : std::max(max_ratio, ratio);
        sum_ratio += ratio;
        if (data.a[j] <= residual) {
            ++fitting;
            fitting_profit += std::max(0.0, data.c[j]);
        }
    }

    // Fractional (LP) bound on the free items under the residual capacity.
    double lp_bound = 0.0;
    if (residual > 0 && free_items > 0) {
        std::vector<int> order;
        order.reserve(free_items);
        for (int j = 0; j < free_items; ++j)
            if (data.c[j] > 0) order.push_back(j);
        std::sort(order.begin(), order.end(), [&](int l, int r) {
            const double lr = data.c[l] / data.a[l];
            const double rr = data.c[r] / data.a[r];
            return lr != rr ? lr > rr : l < r;
        });
        double room = residual;
        for (int j : order) {
            if (data.a[j] <= room) {
                lp_bound += data.c[j];
                room -= data.a[j];
            } else {
                lp_bound += data.c[j] * room / data.a[j];
                break;
            }
        }
    }

    out[0] = static_cast<double>(free_items) / items;
    out[1] = residual / total_size;
    out[2] = free_profit;
    out[3] = free_size / total_size;
    out[4] = free_items > 0 ? max_ratio / ratio_scale : 0.0;
    out[5] = free_items > 0 ? sum_ratio / free_items / ratio_scale : 0.0;
    out[6] = static_cast<double>(fitting) / items;
    out[7] = fitting_profit;
    out[8] = lp_bound;
    out[9] = fixed_profit;
    out[10] = std::max(0.0, -residual) / total_size;
    out[11] = x0_free ? 1.0 : (x0_on ? -1.0 : 0.0);
}

void encode_max_sat(const ProblemInstance& instance, SubInstanceKey key, std::span<double> out)
{
    const auto& data = instance.max_sat_data();
    double satisfied = 0.0, undecided = 0.0, undecided_positive = 0.0, falsified = 0.0;
    double expected = 0.0, free_literals = 0.0;
    int undecided_count = 0;
    for (std::size_t i = 0; i < data.clauses.size(); ++i) {
        bool sat = false;
        int open = 0;
        for (int literal : data.clauses[i].literals) {
            const int position = std::abs(literal) - 1;
            if (position < key.free_count) {
                ++open;
            } else if (bit_of(key.suffix, position) == (literal > 0)) {
                sat = true;
            }
        }
        const double c = data.coeffs[i];
        if (sat) {
            satisfied += c;
        } else if (open > 0) {
            undecided += c;
            undecided_positive += std::max(0.0, c);
            expected += c * (1.0 - std::ldexp(1.0, -open));
            free_literals += open;
            ++undecided_count;
        } else {
            falsified += c;
        }
    }
    out[0] = static_cast<double>(key.free_count) / data.n;
    out[1] = satisfied;
    out[2] = undecided;
    out[3] = undecided_positive;
    out[4] = falsified;
    out[5] = undecided_count > 0 ? free_literals / undecided_count : 0.0;
    out[6] = satisfied + expected;
}

void encode_mwis(const ProblemInstance& instance, SubInstanceKey key, std::span<double> out)
{
    const auto& data = instance.mwis_data();
    const int n = data.size();
    std::uint64_t blocked = 0;
    for (std::uint64_t rest = key.suffix; rest != 0; rest &= rest - 1)
        blocked |= data.adjacency[std::countr_zero(rest)];
    const std::uint64_t available = low_mask(key.free_count) & ~blocked;

    double mass = 0.0;
    int edges = 0;
    int max_degree = 0;
    const int count = std::popcount(available);
    for (std::uint64_t rest = available; rest != 0; rest &= rest - 1) {
        const int i = std::countr_zero(rest);
        mass += std::max(0.0, data.w[i]);
        const int degree = std::popcount(data.adjacency[i] & available);
        edges += degree;
        max_degree = std::max(max_degree, degree);
    }
    edges /= 2;

    // Greedy independent set by weight on the available nodes.
    std::vector<int> order;
    for (std::uint64_t rest = available; rest != 0; rest &= rest - 1) order.push_back(std::countr_zero(rest));
    std::sort(order.begin(), order.end(), [&](int l, int r) {
        return data.w[l] != data.w[r] ? data.w[l] > data.w[r] : l < r;
    });
    double greedy = 0.0;
    std::uint64_t taken_block = 0;
    for (int i : order) {
        if (data.w[i] <= 0 || ((taken_block >> i) & 1u)) continue;
        greedy += data.w[i];
        taken_block |= data.closed_neighborhood(i);
    }

    out[0] = static_cast<double>(key.free_count) / n;
    out[1] = mass;
    out[2] = static_cast<double>(count) / n;
    out[3] = static_cast<double>(edges) / n;
    out[4] = count > 0 ? 2.0 * edges / count : 0.0;
    out[5] = static_cast<double>(max_degree) / n;
    out[6] = greedy;
}

void encode_max_cut(const ProblemInstance& instance, SubInstanceKey key, std::span<double> out)
{
    const auto& data = instance.max_cut_data();
    const int k = key.free_count;
    double gain_one = 0.0, gain_zero = 0.0, free_free = 0.0, greedy = 0.0;
    for (int i = 0; i < k; ++i) {
        double to_one = 0.0, to_zero = 0.0;
        for (int j = k; j < data.n; ++j) {
            if (bit_of(key.suffix, j))
                to_zero += data.at(j, i);
            else
                to_one += data.at(i, j);
        }
        for (int j = 0; j < k; ++j) free_free += data.at(i, j);
        gain_one += to_one;
        gain_zero += to_zero;
        greedy += std::max(to_one, to_zero);
    }
    out[0] = static_cast<double>(k) / data.n;
    out[1] = gain_one;
    out[2] = gain_zero;
    out[3] = free_free;
    out[4] = greedy;
    out[5] = greedy + 0.5 * free_free;
}

void encode_black_box(const ProblemInstance& instance, SubInstanceKey key, std::span<double> out)
{
    const auto& data = instance.black_box_data();
    const double zeros = data.values[key.suffix];
    const double ones = data.values[key.suffix | low_mask(key.free_count)];
    out[0] = static_cast<double>(key.free_count) / data.n;
    out[1] = zeros;
    out[2] = ones;
    out[3] = std::max(zeros, ones);
}

double activate(double z, Activation activation)
{
    if (activation == Activation::Tanh) return std::tanh(z);
    return z > 30 ? z : std::log1p(std::exp(z));
}

// Derivative given pre-activation z and activation h.
double activate_derivative(double z, double h, Activation activation)
{
    if (activation == Activation::Tanh) return 1.0 - h * h;
    return 1.0 / (1.0 + std::exp(-z));
}

}  // namespace

int feature_dim(Family family)
{
    switch (family) {
    case Family::KnapsackGuarded:
    case Family::KnapsackArtificial:
    case Family::KnapsackPenalty: return kKnapsackFeatures;
    case Family::MaxSat: return kMaxSatFeatures;
    case Family::Mwis: return kMwisFeatures;
    case Family::MaxCut: return kMaxCutFeatures;
    case Family::BlackBox: return kBlackBoxFeatures;
    }
    return 0;
}

void encode_into(const ProblemInstance& instance, SubInstanceKey key, std::span<double> out)
{
    if (static_cast<int>(out.size()) != feature_dim(instance.family()))
        throw std::invalid_argument("encode: output span has the wrong size");
    switch (instance.family()) {
    case Family::KnapsackGuarded:
    case Family::KnapsackArtificial:
    case Family::KnapsackPenalty: encode_knapsack(instance, key, out); break;
    case Family::MaxSat: encode_max_sat(instance, key, out); break;
    case Family::Mwis: encode_mwis(instance, key, out); break;
    case Family::MaxCut: encode_max_cut(instance, key, out); break;
    case Family::BlackBox: encode_black_box(instance, key, out); break;
    }
}

std::vector<double> encode(const ProblemInstance& instance, SubInstanceKey key)
{
    validate_key(key, instance.dimension());
    std::vector<double> out(feature_dim(instance.family()));
    encode_into(instance, key, out);
    return out;
}

// ---------------------------------------------------------------------------
// Network

std::size_t Architecture::parameter_count() const
{
    std::size_t count = 0;
    int in = input_dim;
    for (int width : hidden) {
        count += static_cast<std::size_t>(width) * in + width;
        in = width;
    }
    return count + in + 1;
}

void ModelParams::validate() const
{
    if (architecture.input_dim != feature_dim(family))
        throw std::invalid_argument("model: input dimension does not match the family encoder");
    for (int width : architecture.hidden)
        if (width < 1) throw std::invalid_argument("model: hidden widths must be positive");
    if (theta.size() != architecture.parameter_count())
        throw std::invalid_argument("model: theta length does not match the architecture");
    if (!(alpha_max > 0.0) || !(alpha_abs > 0.0))
        throw std::invalid_argument("model: smoothing alphas must be positive");
}

ModelParams init_params(Family family, std::uint64_t seed, std::vector<int> hidden, Activation activation)
{
    ModelParams params;
    params.family = family;
    params.seed = seed;
    params.architecture.input_dim = feature_dim(family);
    params.architecture.hidden = std::move(hidden);
    params.architecture.activation = activation;
    params.theta.assign(params.architecture.parameter_count(), 0.0);

    std::mt19937_64 rng(derive_seed(seed, 0x1417));
    std::size_t offset = 0;
    int in = params.architecture.input_dim;
    auto fill_layer = [&](int out) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(in));
        for (std::size_t i = 0; i < static_cast<std::size_t>(out) * in; ++i)
            params.theta[offset + i] = uniform_real(rng, -bound, bound);
        offset += static_cast<std::size_t>(out) * in + out;
        in = out;
    };
    for (int width : params.architecture.hidden) fill_layer(width);
    fill_layer(1);
    params.validate();
    return params;
}

double ParametricValue::estimate(const ProblemInstance& instance, SubInstanceKey key) const
{
    thread_local Tape tape;
    return forward(instance, key, tape);
}

NetworkValue::NetworkValue(const ModelParams& params) : params_(params) { params_.validate(); }

double NetworkValue::forward(const ProblemInstance& instance, SubInstanceKey key, Tape& tape) const
{
    if (instance.family() != params_.family && !(is_knapsack(instance.family()) && is_knapsack(params_.family)))
        throw std::invalid_argument("model: instance family does not match the model");
    const int d = params_.architecture.input_dim;
    std::size_t needed = d;
    for (int width : params_.architecture.hidden) needed += 2 * static_cast<std::size_t>(width);
    tape.buffer.resize(needed);
    encode_into(instance, key, std::span<double>(tape.buffer.data(), d));
    return evaluate_features(std::span<const double>(tape.buffer.data(), d), tape);
}

double NetworkValue::evaluate_features(std::span<const double> features, Tape& tape) const
{
    const auto& arch = params_.architecture;
    std::size_t needed = arch.input_dim;
    for (int width : arch.hidden) needed += 2 * static_cast<std::size_t>(width);
    tape.buffer.resize(needed);
    double* buffer = tape.buffer.data();
    if (features.data() != buffer) std::copy(features.begin(), features.end(), buffer);

    const double* theta = params_.theta.data();
    const double* input = buffer;
    double* cursor = buffer + arch.input_dim;
    int in = arch.input_dim;
    for (int width : arch.hidden) {
        double* z = cursor;
        double* h = cursor + width;
        const double* W = theta;
        const double* b = theta + static_cast<std::size_t>(width) * in;
        for (int o = 0; o < width; ++o) {
            const double* row = W + static_cast<std::size_t>(o) * in;
            double acc = b[o];
            for (int i = 0; i < in; ++i) acc += row[i] * input[i];
            z[o] = acc;
            h[o] = activate(acc, arch.activation);
        }
        theta = b + width;
        input = h;
        cursor += 2 * width;
        in = width;
    }
    double y = theta[in];
    for (int i = 0; i < in; ++i) y += theta[i] * input[i];
    return y;
}

void NetworkValue::backward(const Tape& tape, double upstream, std::span<double> grad) const
{
    const auto& arch = params_.architecture;
    if (grad.size() != params_.theta.size()) throw std::invalid_argument("backward: gradient size mismatch");
    const int layers = static_cast<int>(arch.hidden.size());

    // Offsets of each layer's weights and of its tape block.
    std::vector<std::size_t> theta_offset(layers + 1);
    std::vector<std::size_t> tape_offset(layers);
    std::size_t t_off = 0, b_off = arch.input_dim;
    int in = arch.input_dim;
    for (int l = 0; l < layers; ++l) {
        theta_offset[l] = t_off;
        tape_offset[l] = b_off;
        t_off += static_cast<std::size_t>(arch.hidden[l]) * in + arch.hidden[l];
        b_off += 2 * static_cast<std::size_t>(arch.hidden[l]);
        in = arch.hidden[l];
    }
    theta_offset[layers] = t_off;

    const double* theta = params_.theta.data();
    const double* buffer = tape.buffer.data();
    double* g = grad.data();

    // Output layer.
    const int last = layers > 0 ? arch.hidden.back() : arch.input_dim;
    const double* last_h = layers > 0 ? buffer + tape_offset[layers - 1] + last : buffer;
    const double* w_out = theta + theta_offset[layers];
    for (int i = 0; i < last; ++i) g[theta_offset[layers] + i] += upstream * last_h[i];
    g[theta_offset[layers] + last] += upstream;
    if (layers == 0) return;

    thread_local std::vector<double> g_h, g_z;
    g_h.assign(w_out, w_out + last);
    for (double& v : g_h) v *= upstream;

    for (int l = layers - 1; l >= 0; --l) {
        const int width = arch.hidden[l];
        const int fan_in = l == 0 ? arch.input_dim : arch.hidden[l - 1];
        const double* z = buffer + tape_offset[l];
        const double* h = z + width;
        const double* input = l == 0 ? buffer : buffer + tape_offset[l - 1] + fan_in;
        const double* W = theta + theta_offset[l];
        double* gW = g + theta_offset[l];
        double* gb = gW + static_cast<std::size_t>(width) * fan_in;

        g_z.resize(width);
        for (int o = 0; o < width; ++o) g_z[o] = g_h[o] * activate_derivative(z[o], h[o], arch.activation);
        for (int o = 0; o < width; ++o) {
            const double go = g_z[o];
            if (go == 0.0) continue;
            double* row = gW + static_cast<std::size_t>(o) * fan_in;
            for (int i = 0; i < fan_in; ++i) row[i] += go * input[i];
            gb[o] += go;
        }
        if (l > 0) {
            g_h.assign(fan_in, 0.0);
            for (int o = 0; o < width; ++o) {
                const double go = g_z[o];
                const double* row = W + static_cast<std::size_t>(o) * fan_in;
                for (int i = 0; i < fan_in; ++i) g_h[i] += row[i] * go;
            }
        }
    }
}

double value(const ModelParams& params, const ProblemInstance& instance, SubInstanceKey key)
{
    validate_key(key, instance.dimension());
    return value_at(NetworkValue(params), instance, key);
}

// ---------------------------------------------------------------------------
// Residual loss

namespace {

struct ResidualTerms {
    double loss = 0.0;      // surrogate |delta|, unweighted
    double slope = 0.0;     // d loss / d delta
    double exact = 0.0;     // |delta| with the true max
    double weights[2] = {1.0, 0.0};  // d bellman / d branch value
};

// Residual of one key given its own value and its branch values.
ResidualTerms residual_terms(double own, const double* branch, int count, const LossSettings& settings)
{
    ResidualTerms terms;
    double exact_max = branch[0];
    if (count == 2) exact_max = std::max(exact_max, branch[1]);
    terms.exact = std::abs(exact_max - own);

    double bellman = branch[0];
    if (count == 2) {
        if (settings.kind == LossKind::Smoothed) {
            const auto partials = smooth_max_partials(branch[0], branch[1], settings.alpha_max);
            bellman = partials.value;
            terms.weights[0] = partials.dx;
            terms.weights[1] = partials.dy;
        } else {
            const bool second = branch[1] > branch[0];
            bellman = second ? branch[1] : branch[0];
            terms.weights[0] = second ? 0.0 : 1.0;
            terms.weights[1] = second ? 1.0 : 0.0;
        }
    }

    const double delta = bellman - own;
    if (settings.kind == LossKind::Smoothed) {
        const double alpha = settings.abs_kind == AbsKind::Sqrt ? 1.0 / settings.alpha_abs : settings.alpha_abs;
        terms.loss = smooth_abs(delta, alpha, settings.abs_kind);
        terms.slope = smooth_abs_derivative(delta, alpha, settings.abs_kind);
    } else {
        terms.loss = std::abs(delta);
        terms.slope = delta > 0 ? 1.0 : (delta < 0 ? -1.0 : 0.0);
    }
    return terms;
}

std::string describe(const ResidualSample& sample)
{
    return "k=" + std::to_string(sample.key.free_count) + " xi=" +
           BitVector(sample.instance->dimension(), sample.key.suffix).to_string();
}

Transitions sample_branches(const ResidualSample& sample)
{
    if (sample.key.free_count < 1) throw std::invalid_argument("residual sample needs k >= 1");
    Transitions branches = transitions(*sample.instance, sample.key);
    if (branches.empty()) throw InfeasibleError("residual sample has no feasible branch: " + describe(sample));
    return branches;
}

SampleLoss finish(const ResidualSample& sample, const ResidualTerms& terms)
{
    SampleLoss result{sample.weight * terms.loss, terms.exact};
    if (!std::isfinite(result.loss) || !std::isfinite(result.exact_residual))
        throw NumericError("non-finite residual loss at " + describe(sample));
    return result;
}

// Evaluates one sample; when grad is non-empty, adds its gradient there.
SampleLoss evaluate_sample(const ParametricValue& V, const ResidualSample& sample, const LossSettings& settings,
                           std::span<double> grad)
{
    const ProblemInstance& instance = *sample.instance;
    const Transitions branches = sample_branches(sample);

    thread_local Tape key_tape;
    thread_local Tape branch_tape[2];
    const double own = V.forward(instance, sample.key, key_tape);
    double branch[2] = {0.0, 0.0};
    bool has_tape[2] = {false, false};
    for (int b = 0; b < branches.size(); ++b) {
        const auto& outcome = branches[b];
        if (outcome.child.free_count == 0) {
            branch[b] = outcome.reward + leaf_value(instance, outcome.child.suffix);
        } else {
            branch[b] = outcome.reward + V.forward(instance, outcome.child, branch_tape[b]);
            has_tape[b] = true;
        }
    }

    const ResidualTerms terms = residual_terms(own, branch, branches.size(), settings);
    const SampleLoss result = finish(sample, terms);
    if (!grad.empty()) {
        const double upstream = sample.weight * terms.slope;
        if (upstream != 0.0) {
            V.backward(key_tape, -upstream, grad);
            for (int b = 0; b < branches.size(); ++b)
                if (has_tape[b] && terms.weights[b] != 0.0)
                    V.backward(branch_tape[b], upstream * terms.weights[b], grad);
        }
    }
    return result;
}

}  // namespace

SampleLoss sample_loss(const ValueFunction& V, const ResidualSample& sample, const LossSettings& settings)
{
    const ProblemInstance& instance = *sample.instance;
    const Transitions branches = sample_branches(sample);
    double branch[2] = {0.0, 0.0};
    for (int b = 0; b < branches.size(); ++b)
        branch[b] = branches[b].reward + value_at(V, instance, branches[b].child);
    const double own = value_at(V, instance, sample.key);
    return finish(sample, residual_terms(own, branch, branches.size(), settings));
}

double batch_loss(const ValueFunction& V, std::span<const ResidualSample> batch, const LossSettings& settings)
{
    if (batch.empty()) throw std::invalid_argument("loss: batch must be nonempty");
    double total = 0.0;
    for (const auto& sample : batch) total += sample_loss(V, sample, settings).loss;
    if (!std::isfinite(total)) throw NumericError("non-finite batch loss");
    return total;
}

LossEvaluation loss_and_gradient(const ParametricValue& V, std::span<const ResidualSample> batch,
                                 const LossSettings& settings, int threads)
{
    if (batch.empty()) throw std::invalid_argument("loss: batch must be nonempty");
    const std::size_t p = V.parameter_count();
    LossEvaluation out;
    out.gradient.assign(p, 0.0);
    auto reduce = [&](const SampleLoss& loss, const std::vector<double>& g) {
        out.loss += loss.loss;
        out.exact_residual_sum += loss.exact_residual;
        for (std::size_t t = 0; t < p; ++t) out.gradient[t] += g[t];
    };

    if (threads <= 1 || batch.size() == 1) {
        thread_local std::vector<double> scratch;
        for (const auto& sample : batch) {
            scratch.assign(p, 0.0);
            reduce(evaluate_sample(V, sample, settings, scratch), scratch);
        }
    } else {
        std::vector<std::vector<double>> per_sample(batch.size());
        std::vector<SampleLoss> losses(batch.size());
        detail::parallel_for(batch.size(), threads, [&](std::size_t i) {
            per_sample[i].assign(p, 0.0);
            losses[i] = evaluate_sample(V, batch[i], settings, per_sample[i]);
        });
        for (std::size_t i = 0; i < batch.size(); ++i) reduce(losses[i], per_sample[i]);
    }
    for (std::size_t t = 0; t < p; ++t)
        if (!std::isfinite(out.gradient[t])) throw NumericError("non-finite gradient entry");
    return out;
}

std::vector<double> gradient(const ParametricValue& V, std::span<const ResidualSample> batch,
                             const LossSettings& settings, int threads)
{
    return loss_and_gradient(V, batch, settings, threads).gradient;
}

}  // namespace rsolve
