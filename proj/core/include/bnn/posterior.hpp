#pragma once

#include "bnn/data.hpp"
#include "bnn/inference.hpp"
#include "bnn/model.hpp"
#include "bnn/rebasin.hpp"
#include "bnn/sample_set.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bnn {

enum class GaussianKind { direct, rebasin, vi };

std::string_view to_string(GaussianKind k);
GaussianKind parse_gaussian_kind(std::string_view name);

// N(mu, diag(sigma2)) over the flat parameter vector of one architecture.
struct DiagGaussian {
    Architecture architecture;
    std::vector<double> mu;
    std::vector<double> sigma2;
    GaussianKind kind = GaussianKind::direct;
    std::string source_method;
    std::optional<std::size_t> reference_id;  // set for rebasin fits

    WeightSet mean_weights() const { return WeightSet(architecture, mu); }
    void validate() const;
};

// Per-coordinate mean and unbiased variance of the raw samples.
DiagGaussian fit_direct(const SampleSet& s);

// fit_direct after permuting every sample into the basin of sample 0.
DiagGaussian fit_rebasin(const SampleSet& s, MatchMethod method, const Dataset& probe);

DiagGaussian from_vi(const ViPosterior& q);

SampleSet draw(const DiagGaussian& g, std::size_t k, std::uint64_t seed);

// Means from `mu_from`, variances from `sigma_from` after permuting
// sigma_from's basin onto mu_from's (matching their mean networks).
DiagGaussian merge(const DiagGaussian& mu_from, const DiagGaussian& sigma_from,
                   MatchMethod method, const Dataset& probe);

struct PruneOptions {
    bool include_biases = true;  // false: biases always kept and not ranked
};

// Keeps the retain_fraction of coordinates with the smallest sigma2 (ties by
// index) at their mean; zeroes the rest.
WeightSet prune(const DiagGaussian& g, double retain_fraction, const PruneOptions& opt = {});

// Indices of bias coordinates in the flat layout.
std::vector<bool> bias_mask(const Architecture& arch);

}  // namespace bnn
