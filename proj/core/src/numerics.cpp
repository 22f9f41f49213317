#include "bnn/numerics.hpp"

#include "bnn/errors.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace bnn {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using Map = Eigen::Map<RowMajor>;

ConstMap as_eigen(ConstMatrixView v) { return ConstMap(v.data.data(), v.rows, v.cols); }

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t hash_tag(std::string_view tag) noexcept {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void check_view(ConstMatrixView v, const char* name) {
    if (v.data.size() != v.rows * v.cols) {
        throw ShapeError(std::string(name) + ": view length does not match rows*cols");
    }
}

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) {
        throw ShapeError("Matrix: data length " + std::to_string(data_.size()) + " != " +
                         std::to_string(rows) + "x" + std::to_string(cols));
    }
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Rng::Rng(std::uint64_t seed) noexcept : seed_(seed), counter_(mix64(seed ^ kGolden)) {}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t tag) noexcept {
    return mix64(mix64(seed) ^ mix64(tag + kGolden));
}

std::uint64_t Rng::derive(std::uint64_t seed, std::string_view tag) noexcept {
    return derive(seed, hash_tag(tag));
}

Rng Rng::split(std::uint64_t seed, std::uint64_t tag) noexcept { return Rng(derive(seed, tag)); }

Rng Rng::split(std::uint64_t seed, std::string_view tag) noexcept {
    return Rng(derive(seed, tag));
}

std::uint64_t Rng::next_u64() noexcept {
    counter_ += kGolden;
    return mix64(counter_);
}

double Rng::uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Rng::uniform_index(std::size_t n) noexcept {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x >= limit);
    return static_cast<std::size_t>(x % bound);
}

double Rng::normal() noexcept {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_normal_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
}

std::vector<std::size_t> random_order(std::size_t n, Rng& rng) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    shuffle(std::span<std::size_t>(order), rng);
    return order;
}

Matrix matmul(ConstMatrixView a, ConstMatrixView b) {
    check_view(a, "matmul");
    check_view(b, "matmul");
    if (a.cols != b.rows) {
        throw ShapeError("matmul: " + std::to_string(a.rows) + "x" + std::to_string(a.cols) +
                         " times " + std::to_string(b.rows) + "x" + std::to_string(b.cols));
    }
    Matrix out(a.rows, b.cols);
    if (out.empty()) return out;
    Map(out.data().data(), a.rows, b.cols).noalias() = as_eigen(a) * as_eigen(b);
    return out;
}

Matrix matmul_nt(ConstMatrixView a, ConstMatrixView b) {
    check_view(a, "matmul_nt");
    check_view(b, "matmul_nt");
    if (a.cols != b.cols) {
        throw ShapeError("matmul_nt: inner dimensions " + std::to_string(a.cols) + " and " +
                         std::to_string(b.cols) + " differ");
    }
    Matrix out(a.rows, b.rows);
    if (out.empty()) return out;
    Map(out.data().data(), a.rows, b.rows).noalias() = as_eigen(a) * as_eigen(b).transpose();
    return out;
}

Matrix matmul_tn(ConstMatrixView a, ConstMatrixView b) {
    check_view(a, "matmul_tn");
    check_view(b, "matmul_tn");
    if (a.rows != b.rows) {
        throw ShapeError("matmul_tn: row counts " + std::to_string(a.rows) + " and " +
                         std::to_string(b.rows) + " differ");
    }
    Matrix out(a.cols, b.cols);
    if (out.empty()) return out;
    Map(out.data().data(), a.cols, b.cols).noalias() = as_eigen(a).transpose() * as_eigen(b);
    return out;
}

Matrix transpose(ConstMatrixView a) {
    Matrix out(a.cols, a.rows);
    for (std::size_t r = 0; r < a.rows; ++r) {
        for (std::size_t c = 0; c < a.cols; ++c) out(c, r) = a(r, c);
    }
    return out;
}

void fill_gaussian(std::span<double> out, Rng& rng, double mean, double std) {
    if (!(std >= 0.0)) throw ArgumentError("sample_gaussian: std must be >= 0");
    if (std == 0.0) {
        std::fill(out.begin(), out.end(), mean);
        return;
    }
    for (double& v : out) v = mean + std * rng.normal();
}

Matrix sample_gaussian(Rng& rng, std::size_t rows, std::size_t cols, double mean, double std) {
    Matrix out(rows, cols);
    fill_gaussian(out.data(), rng, mean, std);
    return out;
}

double log_sum_exp(std::span<const double> values) {
    if (values.empty()) return -INFINITY;
    const double peak = *std::max_element(values.begin(), values.end());
    double total = 0.0;
    for (double v : values) total += std::exp(v - peak);
    return peak + std::log(total);
}

Matrix softmax_rows(ConstMatrixView logits) {
    Matrix out(logits.rows, logits.cols);
    for (std::size_t r = 0; r < logits.rows; ++r) {
        auto in = logits.row(r);
        auto dst = out.row(r);
        const double peak = *std::max_element(in.begin(), in.end());
        double total = 0.0;
        for (std::size_t c = 0; c < in.size(); ++c) {
            dst[c] = std::exp(in[c] - peak);
            total += dst[c];
        }
        for (double& v : dst) v /= total;
    }
    return out;
}

std::size_t argmax(std::span<const double> values) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < values.size(); ++i) {
        if (values[i] > values[best]) best = i;
    }
    return best;
}

MeanVar mean_var_per_coordinate(std::span<const std::span<const double>> samples) {
    if (samples.size() < 2) {
        throw ArgumentError("mean_var_per_coordinate: need at least 2 samples, got " +
                            std::to_string(samples.size()));
    }
    const std::size_t length = samples.front().size();
    for (const auto& s : samples) {
        if (s.size() != length) throw ShapeError("mean_var_per_coordinate: unequal sample lengths");
    }
    // Welford: identical samples give an exactly unchanged mean and zero M2.
    MeanVar out{std::vector<double>(samples.front().begin(), samples.front().end()),
                std::vector<double>(length, 0.0)};
    std::vector<double>& m2 = out.var;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double count = static_cast<double>(k + 1);
        const auto& s = samples[k];
        for (std::size_t i = 0; i < length; ++i) {
            const double delta = s[i] - out.mean[i];
            out.mean[i] += delta / count;
            m2[i] += delta * (s[i] - out.mean[i]);
        }
    }
    const double denom = static_cast<double>(samples.size() - 1);
    for (double& v : m2) v = std::max(0.0, v / denom);
    return out;
}

MeanVar mean_var_per_coordinate(std::span<const std::vector<double>> samples) {
    std::vector<std::span<const double>> views(samples.begin(), samples.end());
    return mean_var_per_coordinate(std::span<const std::span<const double>>(views));
}

double squared_l2_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("squared_l2_distance: length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        total += d * d;
    }
    return total;
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) total += a[i] * b[i];
    return total;
}

bool all_finite(std::span<const double> values) {
    return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace bnn
