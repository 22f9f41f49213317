#pragma once

#include "bnn/model.hpp"
#include "bnn/numerics.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace bnn {

// Bijection on hidden-unit indices. map[i] is the source unit that feeds
// target slot i, i.e. the permutation matrix P has P[i, map[i]] = 1 and
// applying it to weights yields W1' = P W1.
class Permutation {
public:
    Permutation() = default;
    // Throws ArgumentError if `map` is not a bijection on {0..n-1}.
    explicit Permutation(std::vector<std::size_t> map);

    static Permutation identity(std::size_t n);

    std::size_t size() const noexcept { return map_.size(); }
    std::size_t operator[](std::size_t i) const { return map_[i]; }
    std::span<const std::size_t> map() const noexcept { return map_; }
    bool is_identity() const noexcept;

    bool operator==(const Permutation&) const = default;

private:
    std::vector<std::size_t> map_;
};

using Cycle = std::vector<std::size_t>;

// Disjoint cycles following i -> map[i], fixed points included. Each cycle
// starts at its smallest element; cycles are ordered by that element.
std::vector<Cycle> cycle_decompose(const Permutation& p);

// Number of transpositions: size minus the number of cycles.
std::size_t not_count(const Permutation& p);

// A permutation with not_count exactly k, built from k cycle-merging swaps.
Permutation random_with_not(std::size_t h, std::size_t k, Rng& rng);

// Uniformly random permutation.
Permutation random_permutation(std::size_t n, Rng& rng);

// Index composition: compose(p, q)[i] = p[q[i]] (q first, then p).
// On weights: apply_to_weights(compose(p, q), w) == apply_to_weights(q, apply_to_weights(p, w)).
Permutation compose(const Permutation& p, const Permutation& q);
Permutation invert(const Permutation& p);

// W1' = P W1, b1' = P b1, W2' = W2 P⁻¹; b2 untouched.
WeightSet apply_to_weights(const Permutation& p, const WeightSet& w);

// Same reindexing on a flat per-parameter vector laid out like a WeightSet
// (used for variances that travel with their weights).
std::vector<double> apply_to_flat(const Permutation& p, const Architecture& arch,
                                  std::span<const double> flat);

}  // namespace bnn
