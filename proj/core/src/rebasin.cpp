#include "bnn/rebasin.hpp"

#include "bnn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace bnn {

std::string_view to_string(MatchMethod m) {
    return m == MatchMethod::weight ? "weight" : "activation";
}

MatchMethod parse_match_method(std::string_view name) {
    if (name == "weight") return MatchMethod::weight;
    if (name == "activation") return MatchMethod::activation;
    throw ArgumentError("unknown match method '" + std::string(name) + "'");
}

void SampleSet::validate() const {
    if (samples.empty()) throw ArgumentError("SampleSet is empty");
    for (const auto& s : samples) {
        if (s.architecture() != samples.front().architecture()) {
            throw ArgumentError("SampleSet: samples have different architectures");
        }
    }
}

Permutation solve_lap_max(const CostMatrix& c) {
    if (c.rows() != c.cols()) {
        throw ArgumentError("solve_lap_max: cost matrix is " + std::to_string(c.rows()) + "x" +
                            std::to_string(c.cols()) + ", expected square");
    }
    if (!all_finite(c.data())) throw ArgumentError("solve_lap_max: non-finite cost");
    const std::size_t n = c.rows();
    if (n == 0) return Permutation::identity(0);

    // Minimize -c. Indices are 1-based; column 0 is the virtual start column.
    constexpr double kInf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), min_slack(n + 1);
    std::vector<std::size_t> row_of(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);

    for (std::size_t i = 1; i <= n; ++i) {
        row_of[0] = i;
        std::size_t col = 0;
        std::fill(min_slack.begin(), min_slack.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[col] = 1;
            const std::size_t row = row_of[col];
            double delta = kInf;
            std::size_t next = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double slack = -c(row - 1, j - 1) - u[row] - v[j];
                if (slack < min_slack[j]) {
                    min_slack[j] = slack;
                    way[j] = col;
                }
                if (min_slack[j] < delta) {
                    delta = min_slack[j];
                    next = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            col = next;
        } while (row_of[col] != 0);
        do {
            const std::size_t prev = way[col];
            row_of[col] = row_of[prev];
            col = prev;
        } while (col != 0);
    }

    std::vector<std::size_t> map(n);
    for (std::size_t j = 1; j <= n; ++j) map[row_of[j] - 1] = j - 1;
    return Permutation(std::move(map));
}

double assignment_objective(const CostMatrix& c, const Permutation& p) {
    double total = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) total += c(i, p[i]);
    return total;
}

nlohmann::json to_json(const AlignmentReport& r) {
    return {{"permutation", std::vector<std::size_t>(r.permutation.map().begin(),
                                                     r.permutation.map().end())},
            {"not", r.not_count},
            {"l2_before", r.l2_before},
            {"l2_after", r.l2_after},
            {"objective", r.objective}};
}

namespace {

void check_same_architecture(const WeightSet& a, const WeightSet& b, const char* what) {
    if (a.architecture() != b.architecture()) {
        throw ArgumentError(std::string(what) + ": architectures differ");
    }
}

Matrix unit_features(const WeightSet& w) {
    const auto& arch = w.architecture();
    const std::size_t width = arch.inputs + 1 + arch.outputs;
    Matrix out(arch.hidden, width);
    const auto w1 = w.w1();
    const auto b1 = w.b1();
    const auto w2 = w.w2();
    for (std::size_t i = 0; i < arch.hidden; ++i) {
        auto row = out.row(i);
        auto src = w1.row(i);
        std::copy(src.begin(), src.end(), row.begin());
        row[arch.inputs] = b1[i];
        for (std::size_t r = 0; r < arch.outputs; ++r) row[arch.inputs + 1 + r] = w2(r, i);
    }
    return out;
}

// Mean-centres every column and scales it to unit norm; constant columns become
// zero and are flagged in the result.
std::vector<bool> standardize_columns(Matrix& m) {
    const std::size_t n = m.rows();
    std::vector<bool> constant(m.cols(), false);
    for (std::size_t c = 0; c < m.cols(); ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += m(r, c);
        mean /= static_cast<double>(n);
        double sq = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            m(r, c) -= mean;
            sq += m(r, c) * m(r, c);
        }
        const double norm = std::sqrt(sq);
        const double scale = norm > 1e-12 * std::sqrt(static_cast<double>(n)) ? 1.0 / norm : 0.0;
        constant[c] = scale == 0.0;
        for (std::size_t r = 0; r < n; ++r) m(r, c) *= scale;
    }
    return constant;
}

double cosine(std::span<const double> a, std::span<const double> b) {
    const double na = std::sqrt(dot(a, a));
    const double nb = std::sqrt(dot(b, b));
    if (na == 0.0 || nb == 0.0) return na == nb ? 1.0 : 0.0;
    return dot(a, b) / (na * nb);
}

AlignmentReport finish_report(const CostMatrix& cost, const WeightSet& reference,
                              const WeightSet& candidate) {
    AlignmentReport r;
    r.permutation = solve_lap_max(cost);
    r.not_count = not_count(r.permutation);
    r.objective = assignment_objective(cost, r.permutation);
    r.l2_before = std::sqrt(squared_l2_distance(reference.flat(), candidate.flat()));
    const auto aligned = apply_to_weights(r.permutation, candidate);
    r.l2_after = std::sqrt(squared_l2_distance(reference.flat(), aligned.flat()));
    return r;
}

}  // namespace

CostMatrix weight_matching_cost(const WeightSet& reference, const WeightSet& candidate) {
    check_same_architecture(reference, candidate, "weight_match");
    return matmul_nt(unit_features(reference), unit_features(candidate));
}

AlignmentReport weight_match(const WeightSet& reference, const WeightSet& candidate) {
    return finish_report(weight_matching_cost(reference, candidate), reference, candidate);
}

CostMatrix activation_matching_cost(const WeightSet& reference, const WeightSet& candidate,
                                    ConstMatrixView probe) {
    check_same_architecture(reference, candidate, "activation_match");
    if (probe.rows == 0) throw ArgumentError("activation_match: probe set is empty");
    Matrix ref_hidden = forward(reference, probe).hidden;
    Matrix cand_hidden = forward(candidate, probe).hidden;
    const auto ref_const = standardize_columns(ref_hidden);
    const auto cand_const = standardize_columns(cand_hidden);
    CostMatrix cost = matmul_tn(ref_hidden, cand_hidden);

    // Units that are constant on the probe carry no correlation signal. Pairs of
    // such units are scored by weight-feature cosine mapped into [0, 1].
    const bool any_ref = std::find(ref_const.begin(), ref_const.end(), true) != ref_const.end();
    const bool any_cand = std::find(cand_const.begin(), cand_const.end(), true) != cand_const.end();
    if (any_ref && any_cand) {
        const Matrix fr = unit_features(reference);
        const Matrix fc = unit_features(candidate);
        for (std::size_t i = 0; i < ref_const.size(); ++i) {
            if (!ref_const[i]) continue;
            for (std::size_t j = 0; j < cand_const.size(); ++j) {
                if (cand_const[j]) cost(i, j) = 0.5 * (1.0 + cosine(fr.row(i), fc.row(j)));
            }
        }
    }
    return cost;
}

AlignmentReport activation_match(const WeightSet& reference, const WeightSet& candidate,
                                 const Dataset& probe) {
    return finish_report(activation_matching_cost(reference, candidate, probe.images), reference,
                         candidate);
}

AlignmentReport match(MatchMethod method, const WeightSet& reference,
                      const WeightSet& candidate, const Dataset& probe) {
    return method == MatchMethod::weight ? weight_match(reference, candidate)
                                         : activation_match(reference, candidate, probe);
}

AlignedSamples align_samples(const SampleSet& s, MatchMethod method, const Dataset& probe) {
    if (s.size() < 2) {
        throw ArgumentError("align_sample_set: need at least 2 samples, got " +
                            std::to_string(s.size()));
    }
    s.validate();
    AlignedSamples out;
    out.samples.method = s.method;
    out.samples.meta = s.meta;
    out.samples.meta["aligned"] = {{"method", to_string(method)}, {"reference", 0}};
    out.samples.samples.reserve(s.size());
    out.reports.reserve(s.size());

    const WeightSet& reference = s.samples.front();
    out.samples.samples.push_back(reference);
    AlignmentReport self;
    self.permutation = Permutation::identity(reference.hidden_size());
    out.reports.push_back(self);
    for (std::size_t k = 1; k < s.size(); ++k) {
        auto report = match(method, reference, s.samples[k], probe);
        out.samples.samples.push_back(apply_to_weights(report.permutation, s.samples[k]));
        out.reports.push_back(std::move(report));
    }
    return out;
}

SampleSet align_sample_set(const SampleSet& s, MatchMethod method, const Dataset& probe) {
    return align_samples(s, method, probe).samples;
}

}  // namespace bnn
