#include "bnn/model.hpp"

#include "bnn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace bnn {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::relu: return "relu";
        case Activation::tanh: return "tanh";
    }
    return "relu";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::relu;
    if (name == "tanh") return Activation::tanh;
    throw ArgumentError("unknown activation '" + std::string(name) + "'");
}

void ModelConfig::validate() const {
    if (hidden_size < 1) throw ArgumentError("hidden_size must be >= 1");
    if (!(prior_std > 0.0)) throw ArgumentError("prior_std must be > 0");
    if (input_dim < 1 || num_classes < 1) throw ArgumentError("input_dim and num_classes must be >= 1");
}

WeightSet::WeightSet(const Architecture& arch) : arch_(arch), params_(arch.flat_size(), 0.0) {}

WeightSet::WeightSet(const Architecture& arch, std::vector<double> flat)
    : arch_(arch), params_(std::move(flat)) {
    if (params_.size() != arch_.flat_size()) {
        throw ShapeError("WeightSet: flat length " + std::to_string(params_.size()) +
                         " does not match architecture (" + std::to_string(arch_.flat_size()) + ")");
    }
}

WeightSet WeightSet::unflatten(const Architecture& arch, std::span<const double> flat) {
    return WeightSet(arch, std::vector<double>(flat.begin(), flat.end()));
}

ConstMatrixView WeightSet::w1() const {
    return {std::span<const double>(params_).first(arch_.hidden * arch_.inputs), arch_.hidden,
            arch_.inputs};
}
MatrixView WeightSet::w1() {
    return {std::span<double>(params_).first(arch_.hidden * arch_.inputs), arch_.hidden,
            arch_.inputs};
}
std::span<const double> WeightSet::b1() const {
    return std::span<const double>(params_).subspan(arch_.hidden * arch_.inputs, arch_.hidden);
}
std::span<double> WeightSet::b1() {
    return std::span<double>(params_).subspan(arch_.hidden * arch_.inputs, arch_.hidden);
}
ConstMatrixView WeightSet::w2() const {
    const std::size_t offset = arch_.hidden * arch_.inputs + arch_.hidden;
    return {std::span<const double>(params_).subspan(offset, arch_.outputs * arch_.hidden),
            arch_.outputs, arch_.hidden};
}
MatrixView WeightSet::w2() {
    const std::size_t offset = arch_.hidden * arch_.inputs + arch_.hidden;
    return {std::span<double>(params_).subspan(offset, arch_.outputs * arch_.hidden),
            arch_.outputs, arch_.hidden};
}
std::span<const double> WeightSet::b2() const {
    return std::span<const double>(params_).last(arch_.outputs);
}
std::span<double> WeightSet::b2() { return std::span<double>(params_).last(arch_.outputs); }

WeightSet kaiming_init(const Architecture& arch, Rng& rng) {
    WeightSet w(arch);
    fill_gaussian(w.w1().data, rng, 0.0, std::sqrt(2.0 / static_cast<double>(arch.inputs)));
    fill_gaussian(w.w2().data, rng, 0.0, std::sqrt(2.0 / static_cast<double>(arch.hidden)));
    return w;
}

namespace {

void check_inputs(const WeightSet& w, ConstMatrixView x) {
    if (x.cols != w.architecture().inputs) {
        throw ShapeError("forward: input has " + std::to_string(x.cols) + " columns, network expects " +
                         std::to_string(w.architecture().inputs));
    }
}

void add_row_bias(Matrix& m, std::span<const double> bias) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) row[c] += bias[c];
    }
}

void column_sums(ConstMatrixView m, std::span<double> out) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t r = 0; r < m.rows; ++r) {
        auto row = m.row(r);
        for (std::size_t c = 0; c < m.cols; ++c) out[c] += row[c];
    }
}

void check_labels(std::span<const std::uint8_t> labels, std::size_t rows, std::size_t classes) {
    if (labels.size() != rows) throw ShapeError("label count does not match input rows");
    for (auto y : labels) {
        if (y >= classes) throw ArgumentError("label " + std::to_string(y) + " out of range");
    }
}

}  // namespace

ForwardPass forward(const WeightSet& w, ConstMatrixView x) {
    check_inputs(w, x);
    ForwardPass out;
    out.hidden = matmul_nt(x, w.w1());
    add_row_bias(out.hidden, w.b1());
    auto h = out.hidden.data();
    switch (w.architecture().activation) {
        case Activation::relu:
            for (double& v : h) v = v > 0.0 ? v : 0.0;
            break;
        case Activation::tanh:
            for (double& v : h) v = std::tanh(v);
            break;
    }
    out.logits = matmul_nt(out.hidden, w.w2());
    add_row_bias(out.logits, w.b2());
    return out;
}

Matrix predict_probs(const WeightSet& w, ConstMatrixView x) {
    return softmax_rows(forward(w, x).logits);
}

double cross_entropy_sum(const WeightSet& w, ConstMatrixView x,
                         std::span<const std::uint8_t> labels) {
    check_labels(labels, x.rows, w.architecture().outputs);
    const auto pass = forward(w, x);
    double total = 0.0;
    for (std::size_t n = 0; n < x.rows; ++n) {
        auto row = pass.logits.row(n);
        total += log_sum_exp(row) - row[labels[n]];
    }
    return total;
}

double mean_cross_entropy(const WeightSet& w, const Dataset& d) {
    if (d.empty()) return 0.0;
    return cross_entropy_sum(w, d.images, d.labels) / static_cast<double>(d.size());
}

double log_prior_penalty(std::span<const double> flat, double prior_std) {
    double sq = 0.0;
    for (double v : flat) sq += v * v;
    return sq / (2.0 * prior_std * prior_std);
}

double neg_log_posterior(const WeightSet& w, const Dataset& d, double prior_std) {
    return cross_entropy_sum(w, d.images, d.labels) + log_prior_penalty(w.flat(), prior_std);
}

LossAndGradient grad_neg_log_posterior(const WeightSet& w, ConstMatrixView x,
                                       std::span<const std::uint8_t> labels, double prior_std,
                                       ObjectiveScale scale) {
    const Architecture& arch = w.architecture();
    check_labels(labels, x.rows, arch.outputs);
    auto pass = forward(w, x);

    // dL/dlogits = softmax - onehot, reusing the logits buffer.
    double nll = 0.0;
    Matrix& delta_out = pass.logits;
    for (std::size_t n = 0; n < x.rows; ++n) {
        auto row = delta_out.row(n);
        const double lse = log_sum_exp(row);
        nll += lse - row[labels[n]];
        for (double& v : row) v = scale.likelihood * std::exp(v - lse);
        row[labels[n]] -= scale.likelihood;
    }

    LossAndGradient out{scale.likelihood * nll + scale.prior * log_prior_penalty(w.flat(), prior_std),
                        WeightSet(arch)};
    WeightSet& g = out.grad;

    const Matrix gw2 = matmul_tn(delta_out, pass.hidden);
    std::copy(gw2.data().begin(), gw2.data().end(), g.w2().data.begin());
    column_sums(delta_out, g.b2());

    Matrix delta_hidden = matmul(delta_out, w.w2());
    auto dh = delta_hidden.data();
    auto h = pass.hidden.data();
    switch (arch.activation) {
        case Activation::relu:
            for (std::size_t i = 0; i < dh.size(); ++i) {
                if (!(h[i] > 0.0)) dh[i] = 0.0;
            }
            break;
        case Activation::tanh:
            for (std::size_t i = 0; i < dh.size(); ++i) dh[i] *= 1.0 - h[i] * h[i];
            break;
    }
    const Matrix gw1 = matmul_tn(delta_hidden, x);
    std::copy(gw1.data().begin(), gw1.data().end(), g.w1().data.begin());
    column_sums(delta_hidden, g.b1());

    const double prior_coef = scale.prior / (prior_std * prior_std);
    auto gflat = g.flat();
    auto wflat = w.flat();
    for (std::size_t i = 0; i < gflat.size(); ++i) gflat[i] += prior_coef * wflat[i];
    return out;
}

double accuracy_from_probs(ConstMatrixView probs, std::span<const std::uint8_t> labels) {
    if (probs.rows != labels.size()) throw ShapeError("accuracy: row/label count mismatch");
    if (labels.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t n = 0; n < probs.rows; ++n) {
        if (argmax(probs.row(n)) == labels[n]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double accuracy(const WeightSet& w, const Dataset& d) {
    if (d.empty()) return 0.0;
    return accuracy_from_probs(forward(w, d.images).logits, d.labels);
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               double lr, const AdamConfig& cfg) {
    if (state.m.size() != params.size() || grad.size() != params.size()) {
        throw ShapeError("adam_step: state, params and grad lengths differ");
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(cfg.beta1, t);
    const double correction2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grad[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
        const double m_hat = state.m[i] / correction1;
        const double v_hat = state.v[i] / correction2;
        params[i] -= lr * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

}  // namespace bnn
