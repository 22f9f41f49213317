#pragma once

#include "bnn/numerics.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace bnn {

// Images are N x D with every pixel in [0, 1]; labels are class indices.
struct Dataset {
    Matrix images;
    std::vector<std::uint8_t> labels;
    std::size_t num_classes = 10;
    std::string name;

    std::size_t size() const noexcept { return labels.size(); }
    std::size_t input_dim() const noexcept { return images.cols(); }
    bool empty() const noexcept { return labels.empty(); }
};

// Reads an IDX image file (magic 0x00000803) and label file (0x00000801).
// Pixels are scaled by 1/255 and flattened row-major.
Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path);

struct MnistFiles {
    std::filesystem::path train_images;
    std::filesystem::path train_labels;
    std::filesystem::path test_images;
    std::filesystem::path test_labels;
};

// Conventional file names inside a directory.
MnistFiles mnist_files(const std::filesystem::path& dir);
Dataset load_mnist_train(const std::filesystem::path& dir);
Dataset load_mnist_test(const std::filesystem::path& dir);

// Rows selected by index, in the given order.
Dataset select_rows(const Dataset& d, const std::vector<std::size_t>& rows);

// n rows drawn without replacement.
Dataset subset(const Dataset& d, std::size_t n, Rng& rng);

// One Gaussian cluster per class, clamped to [0, 1].
Dataset synthetic_blobs(std::size_t classes, std::size_t per_class, std::size_t dim, Rng& rng,
                        double spread = 0.05);

struct Batch {
    Matrix inputs;
    std::vector<std::uint8_t> labels;
    std::vector<std::size_t> indices;
};

// One epoch: a seeded shuffle cut into consecutive batches; the last may be short.
std::vector<Batch> batches(const Dataset& d, std::size_t batch_size, Rng& rng);

// Index partition of one shuffled epoch without copying rows.
std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    Rng& rng);

}  // namespace bnn
