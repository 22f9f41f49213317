#include "bnn/data.hpp"

#include "bnn/errors.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

namespace bnn {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string(), 0);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& bytes, std::size_t offset,
                        const std::string& what) {
    if (offset + 4 > bytes.size()) throw FormatError(what + ": truncated header", bytes.size());
    return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
           (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images_path,
                 const std::filesystem::path& labels_path) {
    const auto image_bytes = read_file(images_path);
    const auto label_bytes = read_file(labels_path);
    const std::string image_name = images_path.filename().string();
    const std::string label_name = labels_path.filename().string();

    if (read_be32(image_bytes, 0, image_name) != kImageMagic) {
        throw FormatError(image_name + ": bad IDX image magic", 0);
    }
    const std::size_t count = read_be32(image_bytes, 4, image_name);
    const std::size_t height = read_be32(image_bytes, 8, image_name);
    const std::size_t width = read_be32(image_bytes, 12, image_name);
    const std::size_t pixels = height * width;
    constexpr std::size_t kImageHeader = 16;
    if (image_bytes.size() < kImageHeader + count * pixels) {
        throw FormatError(image_name + ": truncated pixel data, expected " +
                              std::to_string(count * pixels) + " bytes",
                          image_bytes.size());
    }

    if (read_be32(label_bytes, 0, label_name) != kLabelMagic) {
        throw FormatError(label_name + ": bad IDX label magic", 0);
    }
    const std::size_t label_count = read_be32(label_bytes, 4, label_name);
    if (label_count != count) {
        throw FormatError(label_name + ": " + std::to_string(label_count) +
                              " labels for " + std::to_string(count) + " images",
                          4);
    }
    constexpr std::size_t kLabelHeader = 8;
    if (label_bytes.size() < kLabelHeader + count) {
        throw FormatError(label_name + ": truncated label data", label_bytes.size());
    }

    Dataset out;
    out.name = image_name;
    out.images = Matrix(count, pixels);
    auto dst = out.images.data();
    for (std::size_t i = 0; i < count * pixels; ++i) {
        dst[i] = static_cast<double>(image_bytes[kImageHeader + i]) / 255.0;
    }
    out.labels.assign(label_bytes.begin() + kLabelHeader,
                      label_bytes.begin() + kLabelHeader + static_cast<std::ptrdiff_t>(count));
    for (std::size_t i = 0; i < count; ++i) {
        if (out.labels[i] >= out.num_classes) {
            throw FormatError(label_name + ": label " + std::to_string(out.labels[i]) +
                                  " out of range",
                              kLabelHeader + i);
        }
    }
    return out;
}

MnistFiles mnist_files(const std::filesystem::path& dir) {
    return {dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte",
            dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte"};
}

Dataset load_mnist_train(const std::filesystem::path& dir) {
    const auto files = mnist_files(dir);
    auto d = load_idx(files.train_images, files.train_labels);
    d.name = "mnist-train";
    return d;
}

Dataset load_mnist_test(const std::filesystem::path& dir) {
    const auto files = mnist_files(dir);
    auto d = load_idx(files.test_images, files.test_labels);
    d.name = "mnist-test";
    return d;
}

Dataset select_rows(const Dataset& d, const std::vector<std::size_t>& rows) {
    Dataset out;
    out.name = d.name;
    out.num_classes = d.num_classes;
    out.images = Matrix(rows.size(), d.input_dim());
    out.labels.resize(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= d.size()) throw ArgumentError("select_rows: index out of range");
        auto src = d.images.row(rows[i]);
        std::copy(src.begin(), src.end(), out.images.row(i).begin());
        out.labels[i] = d.labels[rows[i]];
    }
    return out;
}

Dataset subset(const Dataset& d, std::size_t n, Rng& rng) {
    if (n > d.size()) {
        throw ArgumentError("subset: requested " + std::to_string(n) + " rows from " +
                            std::to_string(d.size()));
    }
    auto order = random_order(d.size(), rng);
    order.resize(n);
    auto out = select_rows(d, order);
    out.name = d.name + "[" + std::to_string(n) + "]";
    return out;
}

Dataset synthetic_blobs(std::size_t classes, std::size_t per_class, std::size_t dim, Rng& rng,
                        double spread) {
    if (dim < 1) throw ArgumentError("synthetic_blobs: dim must be >= 1");
    if (classes < 1) throw ArgumentError("synthetic_blobs: classes must be >= 1");
    Matrix centroids(classes, dim);
    for (double& v : centroids.data()) v = 0.15 + 0.7 * rng.uniform();

    Dataset out;
    out.name = "blobs";
    out.num_classes = classes;
    out.images = Matrix(classes * per_class, dim);
    out.labels.resize(classes * per_class);
    std::size_t row = 0;
    for (std::size_t c = 0; c < classes; ++c) {
        for (std::size_t k = 0; k < per_class; ++k, ++row) {
            auto dst = out.images.row(row);
            for (std::size_t j = 0; j < dim; ++j) {
                dst[j] = std::clamp(centroids(c, j) + spread * rng.normal(), 0.0, 1.0);
            }
            out.labels[row] = static_cast<std::uint8_t>(c);
        }
    }
    return out;
}

std::vector<std::vector<std::size_t>> batch_indices(std::size_t n, std::size_t batch_size,
                                                    Rng& rng) {
    if (batch_size < 1) throw ArgumentError("batches: batch_size must be >= 1");
    const auto order = random_order(n, rng);
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t start = 0; start < n; start += batch_size) {
        const std::size_t stop = std::min(n, start + batch_size);
        out.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(start),
                         order.begin() + static_cast<std::ptrdiff_t>(stop));
    }
    return out;
}

std::vector<Batch> batches(const Dataset& d, std::size_t batch_size, Rng& rng) {
    std::vector<Batch> out;
    for (auto& idx : batch_indices(d.size(), batch_size, rng)) {
        auto rows = select_rows(d, idx);
        out.push_back({std::move(rows.images), std::move(rows.labels), std::move(idx)});
    }
    return out;
}

}  // namespace bnn
