#pragma once

#include "bnn/data.hpp"
#include "bnn/inference.hpp"
#include "bnn/model.hpp"
#include "bnn/numerics.hpp"
#include "bnn/posterior.hpp"
#include "bnn/rebasin.hpp"
#include "bnn/sample_set.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace bnn {

// Class-probability rows p(y | x, D), one per test input.
struct PredictiveTable {
    Matrix probs;
    std::string source;
    std::size_t n_mc = 1;

    std::size_t size() const noexcept { return probs.rows(); }
};

PredictiveTable predictive_of(const WeightSet& w, const Dataset& d);
// Bayesian model average: mean of per-sample softmax rows.
PredictiveTable predictive_from_samples(const SampleSet& s, const Dataset& d);

// Fraction of rows whose argmax classes coincide (ties to smallest index).
double agreement(const PredictiveTable& p, const PredictiveTable& q);
// Mean over rows of half the L1 distance between the two class distributions.
double total_variation(const PredictiveTable& p, const PredictiveTable& q);

// (1 - λ) W0 + λ W1 for every λ.
std::vector<WeightSet> interpolate(const WeightSet& w0, const WeightSet& w1,
                                   std::span<const double> lambdas);
WeightSet interpolate(const WeightSet& w0, const WeightSet& w1, double lambda);

// n evenly spaced points on [0, 1] including both endpoints.
std::vector<double> lambda_grid(std::size_t n);

// max over the grid of mean cross-entropy of W_λ minus the endpoint average.
double barrier(const WeightSet& w0, const WeightSet& w1, const Dataset& d, std::size_t grid = 25);

struct InterpolationCurve {
    std::vector<double> lambdas;
    std::vector<double> losses;
    std::vector<double> accuracies;
    std::vector<std::size_t> nots;
};

// Loss/accuracy of W_λ on `data`, plus NoT of the permutation matching W_λ back to w0.
InterpolationCurve not_along_path(const WeightSet& w0, const WeightSet& w1,
                                  std::span<const double> lambdas, MatchMethod method,
                                  const Dataset& data);

// Largest drop of the NoT sequence below its running maximum.
std::size_t max_not_regression(std::span<const std::size_t> nots);

struct NotExperimentConfig {
    ModelConfig model;
    TrainOptions train;
    MatchMethod method = MatchMethod::weight;
    std::size_t barrier_grid = 25;
};

struct NotExperimentRow {
    std::uint64_t seed = 0;
    std::size_t not_init = 0;
    std::size_t not_trained = 0;
    double l2_after_match = 0.0;
    double l2_before_match = 0.0;
    double barrier = 0.0;  // before matching
};

struct NotExperimentResult {
    std::vector<NotExperimentRow> rows;
    WeightSet reference;              // trained from W_init
    std::vector<WeightSet> permuted;  // trained from P_k W_init, one per row
};

// Trains W_init once and, for every k, a copy started from P W_init with
// NoT(P) = k on a different minibatch stream; rebasin then recovers P'.
NotExperimentResult not_stability_experiment(const Dataset& train, std::uint64_t base_seed,
                                             std::span<const std::size_t> not_values,
                                             const NotExperimentConfig& cfg);

struct SigmaHistogram {
    std::vector<double> edges;  // bins + 1
    std::vector<std::size_t> counts;
};

// Equal-width histogram of sqrt(sigma2) over [0, max σ].
SigmaHistogram sigma_histogram(const DiagGaussian& g, std::size_t bins);

// Fraction of coordinates with σ strictly inside (lo, hi).
double sigma_fraction_in(const DiagGaussian& g, double lo, double hi);

struct Table1Row {
    std::string method;          // hmc | ensemble | vi
    std::string representation;  // sample | q_d | q_r | q
    double agreement = 0.0;
    double tv = 0.0;
    double acc_samples = 0.0;    // mean of individual sample accuracies
    double acc_mean = 0.0;       // accuracy of the mean network; NaN for raw samples
    double acc_predictive = 0.0; // accuracy of the model-averaged predictive
};

struct Table1Inputs {
    const SampleSet* hmc = nullptr;
    const SampleSet* ensemble = nullptr;
    const ViPosterior* vi = nullptr;
    const Dataset* test = nullptr;
    const Dataset* probe = nullptr;  // activation matching inputs
    MatchMethod method = MatchMethod::activation;
    std::size_t n_draws = 100;
    std::uint64_t seed = 0;
};

// Agreement and TV against the raw HMC sample predictive.
std::vector<Table1Row> table1_rows(const Table1Inputs& in);

struct PruneVariant {
    std::string name;
    DiagGaussian gaussian;
};

struct PruneRow {
    std::string variant;
    double retain_fraction = 0.0;
    double accuracy = 0.0;
};

struct PruneEvalOptions {
    PruneOptions prune;
    // 0: evaluate the pruned mean network. k > 0: average the predictive of k
    // draws in which pruned coordinates are held at zero.
    std::size_t draw_average = 0;
    std::uint64_t seed = 0;
};

std::vector<PruneRow> prune_sweep(std::span<const PruneVariant> variants,
                                  std::span<const double> fractions, const Dataset& test,
                                  const PruneEvalOptions& opt = {});

}  // namespace bnn
