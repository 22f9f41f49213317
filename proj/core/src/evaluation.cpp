#include "bnn/evaluation.hpp"

#include "bnn/errors.hpp"
#include "bnn/permutation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bnn {

PredictiveTable predictive_of(const WeightSet& w, const Dataset& d) {
    return {predict_probs(w, d.images), "weights", 1};
}

PredictiveTable predictive_from_samples(const SampleSet& s, const Dataset& d) {
    if (s.empty()) throw ArgumentError("predictive_from_samples: sample set is empty");
    s.validate();
    PredictiveTable out;
    out.source = s.method;
    out.n_mc = s.size();
    out.probs = Matrix(d.size(), s.architecture().outputs);
    auto acc = out.probs.data();
    for (const auto& w : s.samples) {
        const auto probs = predict_probs(w, d.images);
        const auto p = probs.data();
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i];
    }
    const double k = static_cast<double>(s.size());
    for (double& v : acc) v /= k;
    return out;
}

namespace {

void check_tables(const PredictiveTable& p, const PredictiveTable& q, const char* what) {
    if (p.probs.rows() != q.probs.rows() || p.probs.cols() != q.probs.cols()) {
        throw ArgumentError(std::string(what) + ": predictive tables have different shapes");
    }
}

}  // namespace

double agreement(const PredictiveTable& p, const PredictiveTable& q) {
    check_tables(p, q, "agreement");
    if (p.size() == 0) return 1.0;
    std::size_t same = 0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        if (argmax(p.probs.row(n)) == argmax(q.probs.row(n))) ++same;
    }
    return static_cast<double>(same) / static_cast<double>(p.size());
}

double total_variation(const PredictiveTable& p, const PredictiveTable& q) {
    check_tables(p, q, "total_variation");
    if (p.size() == 0) return 0.0;
    double total = 0.0;
    for (std::size_t n = 0; n < p.size(); ++n) {
        auto a = p.probs.row(n);
        auto b = q.probs.row(n);
        double l1 = 0.0;
        for (std::size_t c = 0; c < a.size(); ++c) l1 += std::abs(a[c] - b[c]);
        total += 0.5 * l1;
    }
    return total / static_cast<double>(p.size());
}

WeightSet interpolate(const WeightSet& w0, const WeightSet& w1, double lambda) {
    if (w0.architecture() != w1.architecture()) throw ArgumentError("interpolate: architectures differ");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ArgumentError("interpolate: lambda outside [0, 1]");
    if (lambda == 1.0) return w1;
    // w0 + λ (w1 - w0): exact at λ = 0 and along a constant path.
    WeightSet out = w0;
    auto dst = out.flat();
    auto a = w0.flat();
    auto b = w1.flat();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = a[i] + lambda * (b[i] - a[i]);
    return out;
}

std::vector<WeightSet> interpolate(const WeightSet& w0, const WeightSet& w1,
                                   std::span<const double> lambdas) {
    std::vector<WeightSet> out;
    out.reserve(lambdas.size());
    for (double l : lambdas) out.push_back(interpolate(w0, w1, l));
    return out;
}

std::vector<double> lambda_grid(std::size_t n) {
    if (n < 2) throw ArgumentError("lambda_grid: need at least 2 points");
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(i) / static_cast<double>(n - 1);
    return out;
}

double barrier(const WeightSet& w0, const WeightSet& w1, const Dataset& d, std::size_t grid) {
    if (grid < 3) throw ArgumentError("barrier: grid needs at least 3 points");
    const auto lambdas = lambda_grid(grid);
    const double end0 = mean_cross_entropy(w0, d);
    const double end1 = mean_cross_entropy(w1, d);
    double peak = std::max(end0, end1);
    for (std::size_t i = 1; i + 1 < lambdas.size(); ++i) {
        peak = std::max(peak, mean_cross_entropy(interpolate(w0, w1, lambdas[i]), d));
    }
    return peak - 0.5 * (end0 + end1);
}

InterpolationCurve not_along_path(const WeightSet& w0, const WeightSet& w1,
                                  std::span<const double> lambdas, MatchMethod method,
                                  const Dataset& data) {
    InterpolationCurve c;
    for (double l : lambdas) {
        const auto w = interpolate(w0, w1, l);
        c.lambdas.push_back(l);
        c.losses.push_back(mean_cross_entropy(w, data));
        c.accuracies.push_back(accuracy(w, data));
        c.nots.push_back(match(method, w0, w, data).not_count);
    }
    return c;
}

std::size_t max_not_regression(std::span<const std::size_t> nots) {
    std::size_t running = 0;
    std::size_t worst = 0;
    for (std::size_t v : nots) {
        running = std::max(running, v);
        worst = std::max(worst, running - v);
    }
    return worst;
}

NotExperimentResult not_stability_experiment(const Dataset& train, std::uint64_t base_seed,
                                             std::span<const std::size_t> not_values,
                                             const NotExperimentConfig& cfg) {
    cfg.model.validate();
    cfg.train.validate();
    const auto arch = cfg.model.architecture();
    for (auto k : not_values) {
        if (k >= arch.hidden) {
            throw ArgumentError("not_stability_experiment: NoT " + std::to_string(k) +
                                " outside [0, " + std::to_string(arch.hidden - 1) + "]");
        }
    }
    Rng init_rng = Rng::split(base_seed, "init");
    const WeightSet w_init = kaiming_init(arch, init_rng);

    NotExperimentResult out;
    out.reference = train_from(w_init, train, cfg.model.prior_std, cfg.train,
                               Rng::derive(base_seed, "reference-batches"));
    for (std::size_t idx = 0; idx < not_values.size(); ++idx) {
        const std::size_t k = not_values[idx];
        Rng perm_rng = Rng::split(Rng::derive(base_seed, "permutation"), idx);
        const auto p = random_with_not(arch.hidden, k, perm_rng);
        auto trained = train_from(apply_to_weights(p, w_init), train, cfg.model.prior_std, cfg.train,
                                  Rng::derive(Rng::derive(base_seed, "permuted-batches"), idx));
        const auto report = match(cfg.method, out.reference, trained, train);

        NotExperimentRow row;
        row.seed = base_seed;
        row.not_init = not_count(p);
        row.not_trained = report.not_count;
        row.l2_after_match = report.l2_after;
        row.l2_before_match = report.l2_before;
        row.barrier = barrier(out.reference, trained, train, cfg.barrier_grid);
        out.rows.push_back(row);
        out.permuted.push_back(std::move(trained));
    }
    return out;
}

SigmaHistogram sigma_histogram(const DiagGaussian& g, std::size_t bins) {
    if (bins < 1) throw ArgumentError("sigma_histogram: bins must be >= 1");
    g.validate();
    std::vector<double> sd(g.sigma2.size());
    std::transform(g.sigma2.begin(), g.sigma2.end(), sd.begin(), [](double v) { return std::sqrt(v); });
    const double top = sd.empty() ? 0.0 : *std::max_element(sd.begin(), sd.end());

    SigmaHistogram h;
    h.edges.resize(bins + 1);
    for (std::size_t b = 0; b <= bins; ++b) h.edges[b] = top * static_cast<double>(b) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double s : sd) {
        std::size_t b = top > 0.0 ? static_cast<std::size_t>(s / top * static_cast<double>(bins)) : 0;
        h.counts[std::min(b, bins - 1)]++;
    }
    return h;
}

double sigma_fraction_in(const DiagGaussian& g, double lo, double hi) {
    if (g.sigma2.empty()) return 0.0;
    std::size_t inside = 0;
    for (double v : g.sigma2) {
        const double s = std::sqrt(v);
        if (s > lo && s < hi) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(g.sigma2.size());
}

namespace {

double mean_sample_accuracy(const SampleSet& s, const Dataset& d) {
    double total = 0.0;
    for (const auto& w : s.samples) total += accuracy(w, d);
    return total / static_cast<double>(s.size());
}

Table1Row sample_row(const std::string& method, const std::string& representation,
                     const SampleSet& s, const Dataset& test, const PredictiveTable& baseline,
                     double acc_mean) {
    const auto pred = predictive_from_samples(s, test);
    Table1Row row;
    row.method = method;
    row.representation = representation;
    row.agreement = agreement(pred, baseline);
    row.tv = total_variation(pred, baseline);
    row.acc_samples = mean_sample_accuracy(s, test);
    row.acc_mean = acc_mean;
    row.acc_predictive = accuracy_from_probs(pred.probs, test.labels);
    return row;
}

void gaussian_rows(const std::string& method, const SampleSet& s, const Table1Inputs& in,
                   const PredictiveTable& baseline, std::vector<Table1Row>& out) {
    const auto& test = *in.test;
    const auto& probe = in.probe ? *in.probe : test;
    const auto qd = fit_direct(s);
    const auto qr = fit_rebasin(s, in.method, probe);
    const auto draws_d = draw(qd, in.n_draws, Rng::derive(in.seed, method + "/q_d"));
    const auto draws_r = draw(qr, in.n_draws, Rng::derive(in.seed, method + "/q_r"));
    out.push_back(sample_row(method, "q_d", draws_d, test, baseline, accuracy(qd.mean_weights(), test)));
    out.push_back(sample_row(method, "q_r", draws_r, test, baseline, accuracy(qr.mean_weights(), test)));
}

}  // namespace

std::vector<Table1Row> table1_rows(const Table1Inputs& in) {
    if (!in.hmc || !in.test) throw ArgumentError("table1_rows: HMC samples and test data are required");
    if (in.n_draws < 1) throw ArgumentError("table1_rows: n_draws must be >= 1");
    const auto& test = *in.test;
    const auto baseline = predictive_from_samples(*in.hmc, test);
    const double na = std::numeric_limits<double>::quiet_NaN();

    std::vector<Table1Row> rows;
    rows.push_back(sample_row("hmc", "sample", *in.hmc, test, baseline, na));
    gaussian_rows("hmc", *in.hmc, in, baseline, rows);
    if (in.ensemble) {
        rows.push_back(sample_row("ensemble", "sample", *in.ensemble, test, baseline, na));
        gaussian_rows("ensemble", *in.ensemble, in, baseline, rows);
    }
    if (in.vi) {
        const auto draws = vi_draws(*in.vi, in.n_draws, Rng::derive(in.seed, "vi/q"));
        rows.push_back(sample_row("vi", "q", draws, test, baseline, accuracy(vi_mean(*in.vi), test)));
    }
    return rows;
}

std::vector<PruneRow> prune_sweep(std::span<const PruneVariant> variants,
                                  std::span<const double> fractions, const Dataset& test,
                                  const PruneEvalOptions& opt) {
    std::vector<PruneRow> rows;
    for (const auto& v : variants) {
        for (double f : fractions) {
            const WeightSet pruned = prune(v.gaussian, f, opt.prune);
            double acc;
            if (opt.draw_average == 0) {
                acc = accuracy(pruned, test);
            } else {
                DiagGaussian masked = v.gaussian;
                masked.mu = pruned.flatten();
                for (std::size_t i = 0; i < masked.mu.size(); ++i) {
                    if (masked.mu[i] == 0.0 && v.gaussian.mu[i] != 0.0) masked.sigma2[i] = 0.0;
                }
                const auto draws = draw(masked, opt.draw_average, Rng::derive(opt.seed, v.name));
                acc = accuracy_from_probs(predictive_from_samples(draws, test).probs, test.labels);
            }
            rows.push_back({v.name, f, acc});
        }
    }
    return rows;
}

}  // namespace bnn
