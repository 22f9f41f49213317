#include "bnn/permutation.hpp"

#include "bnn/errors.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace bnn {

Permutation::Permutation(std::vector<std::size_t> map) : map_(std::move(map)) {
    std::vector<bool> seen(map_.size(), false);
    for (std::size_t v : map_) {
        if (v >= map_.size() || seen[v]) {
            throw ArgumentError("Permutation: map is not a bijection on 0.." +
                                std::to_string(map_.size()));
        }
        seen[v] = true;
    }
}

Permutation Permutation::identity(std::size_t n) {
    std::vector<std::size_t> map(n);
    std::iota(map.begin(), map.end(), std::size_t{0});
    return Permutation(std::move(map));
}

bool Permutation::is_identity() const noexcept {
    for (std::size_t i = 0; i < map_.size(); ++i) {
        if (map_[i] != i) return false;
    }
    return true;
}

std::vector<Cycle> cycle_decompose(const Permutation& p) {
    std::vector<Cycle> cycles;
    std::vector<bool> visited(p.size(), false);
    // Scanning starts in increasing order, so each cycle begins at its minimum
    // and the list comes out sorted.
    for (std::size_t start = 0; start < p.size(); ++start) {
        if (visited[start]) continue;
        Cycle cycle;
        for (std::size_t i = start; !visited[i]; i = p[i]) {
            visited[i] = true;
            cycle.push_back(i);
        }
        cycles.push_back(std::move(cycle));
    }
    return cycles;
}

std::size_t not_count(const Permutation& p) {
    std::vector<bool> visited(p.size(), false);
    std::size_t cycles = 0;
    for (std::size_t start = 0; start < p.size(); ++start) {
        if (visited[start]) continue;
        ++cycles;
        for (std::size_t i = start; !visited[i]; i = p[i]) visited[i] = true;
    }
    return p.size() - cycles;
}

Permutation random_with_not(std::size_t h, std::size_t k, Rng& rng) {
    if (h == 0 ? k != 0 : k > h - 1) {
        throw ArgumentError("random_with_not: k=" + std::to_string(k) + " outside [0, " +
                            std::to_string(h == 0 ? 0 : h - 1) + "]");
    }
    std::vector<std::size_t> map(h);
    std::iota(map.begin(), map.end(), std::size_t{0});
    std::vector<std::size_t> cycle_id(h);
    std::iota(cycle_id.begin(), cycle_id.end(), std::size_t{0});
    std::vector<std::size_t> outside;
    outside.reserve(h);

    for (std::size_t step = 0; step < k; ++step) {
        const std::size_t a = rng.uniform_index(h);
        outside.clear();
        for (std::size_t j = 0; j < h; ++j) {
            if (cycle_id[j] != cycle_id[a]) outside.push_back(j);
        }
        // At least two cycles remain because step < k <= h - 1.
        const std::size_t b = outside[rng.uniform_index(outside.size())];
        // Swapping the images of elements in different cycles joins them.
        std::swap(map[a], map[b]);
        const std::size_t merged = cycle_id[a];
        const std::size_t absorbed = cycle_id[b];
        for (auto& id : cycle_id) {
            if (id == absorbed) id = merged;
        }
    }
    return Permutation(std::move(map));
}

Permutation random_permutation(std::size_t n, Rng& rng) {
    return Permutation(random_order(n, rng));
}

Permutation compose(const Permutation& p, const Permutation& q) {
    if (p.size() != q.size()) throw ArgumentError("compose: permutation sizes differ");
    std::vector<std::size_t> map(p.size());
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = p[q[i]];
    return Permutation(std::move(map));
}

Permutation invert(const Permutation& p) {
    std::vector<std::size_t> map(p.size());
    for (std::size_t i = 0; i < map.size(); ++i) map[p[i]] = i;
    return Permutation(std::move(map));
}

std::vector<double> apply_to_flat(const Permutation& p, const Architecture& arch,
                                  std::span<const double> flat) {
    if (p.size() != arch.hidden) {
        throw ArgumentError("apply_to_weights: permutation size " + std::to_string(p.size()) +
                            " != hidden size " + std::to_string(arch.hidden));
    }
    if (flat.size() != arch.flat_size()) throw ShapeError("apply_to_weights: flat length mismatch");
    const std::size_t h = arch.hidden;
    const std::size_t d = arch.inputs;
    const std::size_t o = arch.outputs;
    const std::size_t b1_at = h * d;
    const std::size_t w2_at = b1_at + h;

    std::vector<double> out(flat.begin(), flat.end());
    for (std::size_t i = 0; i < h; ++i) {
        const std::size_t src = p[i];
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(src * d), d,
                    out.begin() + static_cast<std::ptrdiff_t>(i * d));
        out[b1_at + i] = flat[b1_at + src];
        for (std::size_t r = 0; r < o; ++r) out[w2_at + r * h + i] = flat[w2_at + r * h + src];
    }
    return out;
}

WeightSet apply_to_weights(const Permutation& p, const WeightSet& w) {
    return WeightSet(w.architecture(), apply_to_flat(p, w.architecture(), w.flat()));
}

}  // namespace bnn
