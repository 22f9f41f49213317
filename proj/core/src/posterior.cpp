#include "bnn/posterior.hpp"

#include "bnn/errors.hpp"
#include "bnn/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bnn {

std::string_view to_string(GaussianKind k) {
    switch (k) {
        case GaussianKind::direct: return "direct";
        case GaussianKind::rebasin: return "rebasin";
        case GaussianKind::vi: return "vi";
    }
    return "direct";
}

GaussianKind parse_gaussian_kind(std::string_view name) {
    if (name == "direct") return GaussianKind::direct;
    if (name == "rebasin") return GaussianKind::rebasin;
    if (name == "vi") return GaussianKind::vi;
    throw ArgumentError("unknown gaussian kind '" + std::string(name) + "'");
}

void DiagGaussian::validate() const {
    if (mu.size() != architecture.flat_size() || sigma2.size() != mu.size()) {
        throw ShapeError("DiagGaussian: mu/sigma2 lengths do not match the architecture");
    }
    for (double v : sigma2) {
        if (!(v >= 0.0)) throw ArgumentError("DiagGaussian: negative or NaN variance");
    }
}

DiagGaussian fit_direct(const SampleSet& s) {
    if (s.size() < 2) {
        throw ArgumentError("fit_direct: need at least 2 samples, got " + std::to_string(s.size()));
    }
    s.validate();
    std::vector<std::span<const double>> flats;
    flats.reserve(s.size());
    for (const auto& w : s.samples) flats.push_back(w.flat());
    auto mv = mean_var_per_coordinate(std::span<const std::span<const double>>(flats));
    DiagGaussian g;
    g.architecture = s.architecture();
    g.mu = std::move(mv.mean);
    g.sigma2 = std::move(mv.var);
    g.kind = GaussianKind::direct;
    g.source_method = s.method;
    return g;
}

DiagGaussian fit_rebasin(const SampleSet& s, MatchMethod method, const Dataset& probe) {
    if (s.size() < 2) {
        throw ArgumentError("fit_rebasin: need at least 2 samples, got " + std::to_string(s.size()));
    }
    auto g = fit_direct(align_sample_set(s, method, probe));
    g.kind = GaussianKind::rebasin;
    g.reference_id = 0;
    return g;
}

DiagGaussian from_vi(const ViPosterior& q) {
    q.validate();
    DiagGaussian g;
    g.architecture = q.architecture;
    g.mu = q.mu;
    g.sigma2 = q.sigma();
    for (double& v : g.sigma2) v *= v;
    g.kind = GaussianKind::vi;
    g.source_method = "vi";
    return g;
}

SampleSet draw(const DiagGaussian& g, std::size_t k, std::uint64_t seed) {
    g.validate();
    if (k < 1) throw ArgumentError("draw: k must be >= 1");
    std::vector<double> sd(g.sigma2.size());
    std::transform(g.sigma2.begin(), g.sigma2.end(), sd.begin(), [](double v) { return std::sqrt(v); });
    Rng rng(seed);
    SampleSet out;
    out.method = std::string(to_string(g.kind)) + "-draws";
    out.meta["seed"] = seed;
    out.meta["source_method"] = g.source_method;
    out.samples.reserve(k);
    for (std::size_t s = 0; s < k; ++s) {
        WeightSet w(g.architecture);
        auto flat = w.flat();
        for (std::size_t i = 0; i < flat.size(); ++i) {
            flat[i] = sd[i] == 0.0 ? g.mu[i] : g.mu[i] + sd[i] * rng.normal();
        }
        out.samples.push_back(std::move(w));
    }
    return out;
}

DiagGaussian merge(const DiagGaussian& mu_from, const DiagGaussian& sigma_from,
                   MatchMethod method, const Dataset& probe) {
    mu_from.validate();
    sigma_from.validate();
    if (mu_from.mu.size() != sigma_from.mu.size() || mu_from.architecture != sigma_from.architecture) {
        throw ArgumentError("merge: the two Gaussians have different lengths/architectures");
    }
    if (mu_from.kind != GaussianKind::rebasin || sigma_from.kind != GaussianKind::rebasin) {
        throw ArgumentError("merge: both inputs must be rebasin fits");
    }
    const auto report = match(method, mu_from.mean_weights(), sigma_from.mean_weights(), probe);
    DiagGaussian out;
    out.architecture = mu_from.architecture;
    out.mu = mu_from.mu;
    out.sigma2 = apply_to_flat(report.permutation, sigma_from.architecture, sigma_from.sigma2);
    out.kind = GaussianKind::rebasin;
    out.source_method = mu_from.source_method == sigma_from.source_method
                            ? mu_from.source_method
                            : mu_from.source_method + "+" + sigma_from.source_method;
    out.reference_id = mu_from.reference_id;
    return out;
}

std::vector<bool> bias_mask(const Architecture& arch) {
    std::vector<bool> mask(arch.flat_size(), false);
    const std::size_t b1_at = arch.hidden * arch.inputs;
    for (std::size_t i = 0; i < arch.hidden; ++i) mask[b1_at + i] = true;
    for (std::size_t i = 0; i < arch.outputs; ++i) mask[arch.flat_size() - arch.outputs + i] = true;
    return mask;
}

WeightSet prune(const DiagGaussian& g, double retain_fraction, const PruneOptions& opt) {
    g.validate();
    if (!(retain_fraction > 0.0 && retain_fraction <= 1.0)) {
        throw ArgumentError("prune: retain_fraction must lie in (0, 1]");
    }
    const auto biases = bias_mask(g.architecture);
    std::vector<std::size_t> ranked;
    ranked.reserve(g.mu.size());
    for (std::size_t i = 0; i < g.mu.size(); ++i) {
        if (opt.include_biases || !biases[i]) ranked.push_back(i);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&](std::size_t a, std::size_t b) { return g.sigma2[a] < g.sigma2[b]; });
    const auto keep = static_cast<std::size_t>(
        std::llround(retain_fraction * static_cast<double>(ranked.size())));

    WeightSet w(g.architecture);
    auto flat = w.flat();
    if (!opt.include_biases) {
        for (std::size_t i = 0; i < flat.size(); ++i) {
            if (biases[i]) flat[i] = g.mu[i];
        }
    }
    for (std::size_t r = 0; r < keep; ++r) flat[ranked[r]] = g.mu[ranked[r]];
    return w;
}

}  // namespace bnn
