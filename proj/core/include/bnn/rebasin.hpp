#pragma once

#include "bnn/data.hpp"
#include "bnn/model.hpp"
#include "bnn/numerics.hpp"
#include "bnn/permutation.hpp"
#include "bnn/sample_set.hpp"

#include <nlohmann/json.hpp>

#include <string_view>

namespace bnn {

enum class MatchMethod { weight, activation };

std::string_view to_string(MatchMethod m);
MatchMethod parse_match_method(std::string_view name);

// Square similarity matrix, higher is a better match; maximized by the LAP solver.
using CostMatrix = Matrix;

// Hungarian algorithm (shortest augmenting path with potentials), O(n³).
// Returns map with map[i] = column assigned to row i, maximizing
// Σ c(i, map[i]).
Permutation solve_lap_max(const CostMatrix& c);

double assignment_objective(const CostMatrix& c, const Permutation& p);

struct AlignmentReport {
    Permutation permutation;
    std::size_t not_count = 0;
    double l2_before = 0.0;  // ‖ref - cand‖₂ over all parameters
    double l2_after = 0.0;   // ‖ref - apply(p, cand)‖₂
    double objective = 0.0;
};

nlohmann::json to_json(const AlignmentReport& r);

// Per-unit feature rows [w1 row i, b1 i, w2 column i]; cost is their inner
// product. With one hidden layer this minimizes the permuted L2 distance exactly.
CostMatrix weight_matching_cost(const WeightSet& reference, const WeightSet& candidate);
AlignmentReport weight_match(const WeightSet& reference, const WeightSet& candidate);

// Correlation of hidden activations on the probe inputs. Units with zero
// variance on the probe get an all-zero row/column.
CostMatrix activation_matching_cost(const WeightSet& reference, const WeightSet& candidate,
                                    ConstMatrixView probe);
AlignmentReport activation_match(const WeightSet& reference, const WeightSet& candidate,
                                 const Dataset& probe);

AlignmentReport match(MatchMethod method, const WeightSet& reference,
                      const WeightSet& candidate, const Dataset& probe);

struct AlignedSamples {
    SampleSet samples;
    std::vector<AlignmentReport> reports;  // one per sample, identity for the reference
};

// Sample 0 is the reference and stays untouched; every other sample is
// permuted into its basin. `probe` is only read by activation matching.
AlignedSamples align_samples(const SampleSet& s, MatchMethod method, const Dataset& probe);
SampleSet align_sample_set(const SampleSet& s, MatchMethod method, const Dataset& probe);

}  // namespace bnn
