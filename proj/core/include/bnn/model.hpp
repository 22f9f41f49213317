#pragma once

#include "bnn/data.hpp"
#include "bnn/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bnn {

enum class Activation { relu, tanh };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

// Shape of the one-hidden-layer MLP.
struct Architecture {
    std::size_t inputs = 784;
    std::size_t hidden = 512;
    std::size_t outputs = 10;
    Activation activation = Activation::relu;

    // H*D + H + O*H + O
    std::size_t flat_size() const noexcept { return hidden * inputs + hidden + outputs * hidden + outputs; }
    bool operator==(const Architecture&) const = default;
};

struct ModelConfig {
    std::size_t hidden_size = 512;
    double prior_std = 1.0;
    Activation activation = Activation::relu;
    std::size_t input_dim = 784;
    std::size_t num_classes = 10;

    Architecture architecture() const { return {input_dim, hidden_size, num_classes, activation}; }
    void validate() const;
};

// All MLP parameters in one contiguous buffer laid out as w1 (H x D,
// row-major), b1 (H), w2 (O x H, row-major), b2 (O). The block accessors
// are views into that buffer, so flatten/unflatten is a plain copy.
class WeightSet {
public:
    WeightSet() = default;
    explicit WeightSet(const Architecture& arch);
    WeightSet(const Architecture& arch, std::vector<double> flat);

    static WeightSet unflatten(const Architecture& arch, std::span<const double> flat);

    const Architecture& architecture() const noexcept { return arch_; }
    std::size_t hidden_size() const noexcept { return arch_.hidden; }
    std::size_t size() const noexcept { return params_.size(); }

    ConstMatrixView w1() const;
    MatrixView w1();
    std::span<const double> b1() const;
    std::span<double> b1();
    ConstMatrixView w2() const;
    MatrixView w2();
    std::span<const double> b2() const;
    std::span<double> b2();

    std::span<const double> flat() const noexcept { return params_; }
    std::span<double> flat() noexcept { return params_; }
    std::vector<double> flatten() const { return params_; }

    bool operator==(const WeightSet&) const = default;

private:
    Architecture arch_{};
    std::vector<double> params_;
};

// Kaiming-normal weights (std = sqrt(2 / fan_in)), zero biases.
WeightSet kaiming_init(const Architecture& arch, Rng& rng);

struct ForwardPass {
    Matrix hidden;  // post-activation, N x H
    Matrix logits;  // N x O
};

ForwardPass forward(const WeightSet& w, ConstMatrixView x);
Matrix predict_probs(const WeightSet& w, ConstMatrixView x);

// Summed negative log-likelihood (natural log) of the labels under softmax.
double cross_entropy_sum(const WeightSet& w, ConstMatrixView x,
                         std::span<const std::uint8_t> labels);
double mean_cross_entropy(const WeightSet& w, const Dataset& d);

// ||w||² / (2 prior_std²)
double log_prior_penalty(std::span<const double> flat, double prior_std);

// Summed cross-entropy over d plus the Gaussian prior penalty; constants dropped.
double neg_log_posterior(const WeightSet& w, const Dataset& d, double prior_std);

// Multipliers on the two terms of the objective. Full posterior: {1, 1}.
// Minibatch estimate of the posterior: {N / B, 1}. Per-example mean: {1 / B, 1 / N}.
struct ObjectiveScale {
    double likelihood = 1.0;
    double prior = 1.0;
};

struct LossAndGradient {
    double loss = 0.0;
    WeightSet grad;
};

// Exact backprop gradient of
//   scale.likelihood * cross_entropy_sum(w, x, labels) + scale.prior * ||w||² / (2 prior_std²).
LossAndGradient grad_neg_log_posterior(const WeightSet& w, ConstMatrixView x,
                                       std::span<const std::uint8_t> labels, double prior_std,
                                       ObjectiveScale scale = {});

// Fraction of rows whose argmax logit (ties to the smaller class) equals the label.
double accuracy(const WeightSet& w, const Dataset& d);
double accuracy_from_probs(ConstMatrixView probs, std::span<const std::uint8_t> labels);

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}

    std::vector<double> m;
    std::vector<double> v;
    std::size_t step = 0;
};

// One bias-corrected Adam update of params in place.
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grad,
               double lr, const AdamConfig& cfg = {});

}  // namespace bnn
