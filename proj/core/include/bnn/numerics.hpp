#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace bnn {

// Non-owning row-major view. Weight blocks inside a WeightSet and dense
// Matrix values both hand these out so the kernels take one type.
struct ConstMatrixView {
    std::span<const double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return data.subspan(r * cols, cols); }
};

struct MatrixView {
    std::span<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::span<double> row(std::size_t r) const { return data.subspan(r * cols, cols); }
    operator ConstMatrixView() const { return {data, rows, cols}; }
};

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }
    const std::vector<double>& values() const noexcept { return data_; }

    MatrixView view() { return {data_, rows_, cols_}; }
    ConstMatrixView view() const { return {data_, rows_, cols_}; }
    operator ConstMatrixView() const { return view(); }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// SplitMix64 stream: a counter advanced by a fixed odd increment and passed
// through a bijective finalizer. Child streams are keyed by hashing the
// parent seed with a tag.
class Rng {
public:
    explicit Rng(std::uint64_t seed) noexcept;

    static Rng split(std::uint64_t seed, std::uint64_t tag) noexcept;
    static Rng split(std::uint64_t seed, std::string_view tag) noexcept;
    // Derived seed for a child stream, usable where a plain seed is stored.
    static std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) noexcept;
    static std::uint64_t derive(std::uint64_t seed, std::string_view tag) noexcept;

    std::uint64_t next_u64() noexcept;
    // Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    // Uniform on [0, n) without modulo bias. n must be > 0.
    std::size_t uniform_index(std::size_t n) noexcept;
    double normal() noexcept;

    std::uint64_t seed() const noexcept { return seed_; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

// Fisher-Yates shuffle driven by Rng, identical on every platform
// (std::shuffle is implementation-defined).
template <typename T>
void shuffle(std::span<T> values, Rng& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::size_t j = rng.uniform_index(i);
        std::swap(values[i - 1], values[j]);
    }
}

std::vector<std::size_t> random_order(std::size_t n, Rng& rng);

Matrix matmul(ConstMatrixView a, ConstMatrixView b);
// a · bᵀ
Matrix matmul_nt(ConstMatrixView a, ConstMatrixView b);
// aᵀ · b
Matrix matmul_tn(ConstMatrixView a, ConstMatrixView b);

Matrix transpose(ConstMatrixView a);

Matrix sample_gaussian(Rng& rng, std::size_t rows, std::size_t cols, double mean, double std);
void fill_gaussian(std::span<double> out, Rng& rng, double mean, double std);

// Row-wise softmax with per-row max subtraction.
Matrix softmax_rows(ConstMatrixView logits);
double log_sum_exp(std::span<const double> values);

// Index of the largest entry; ties resolve to the smallest index.
std::size_t argmax(std::span<const double> values);

struct MeanVar {
    std::vector<double> mean;
    std::vector<double> var;
};

// Per-coordinate sample mean and unbiased (K-1) variance.
MeanVar mean_var_per_coordinate(std::span<const std::vector<double>> samples);
MeanVar mean_var_per_coordinate(std::span<const std::span<const double>> samples);

double squared_l2_distance(std::span<const double> a, std::span<const double> b);
double dot(std::span<const double> a, std::span<const double> b);
bool all_finite(std::span<const double> values);

}  // namespace bnn
