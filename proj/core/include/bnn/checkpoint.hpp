#pragma once

#include "bnn/inference.hpp"
#include "bnn/model.hpp"
#include "bnn/posterior.hpp"
#include "bnn/sample_set.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bnn {

struct Tensor {
    std::string name;
    std::vector<std::uint32_t> shape;
    std::vector<float> values;

    std::size_t element_count() const;
};

// Named float32 tensors plus a JSON metadata blob.
//
// File layout (little-endian):
//   "BNC1" | u32 tensor count
//   per tensor: u16 name length | name bytes | u8 ndims | u32 dims[ndims] | f32 data (row-major)
//   u32 meta length | meta JSON bytes
struct Checkpoint {
    std::vector<Tensor> tensors;
    std::string meta = "{}";

    const Tensor& at(std::string_view name) const;
    bool contains(std::string_view name) const;
    nlohmann::json meta_json() const;

    // Names unique, counts consistent with shapes, names and dims fit their fields.
    void validate() const;

    // Bitwise comparison of the float payloads.
    bool operator==(const Checkpoint& other) const;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);

// Written to a temporary sibling and renamed into place.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::filesystem::path& path);

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_atomic(const std::filesystem::path& path, std::string_view text);

nlohmann::json to_json(const Architecture& a);
Architecture architecture_from_json(const nlohmann::json& j);

// Kind tags stored under meta["kind"]: weights | samples | gaussian | vi.
Checkpoint to_checkpoint(const WeightSet& w, nlohmann::json meta = nlohmann::json::object());
WeightSet weights_from_checkpoint(const Checkpoint& c);

// Tensors "sample_0000.w1", "sample_0000.b1", ... one group per sample.
Checkpoint to_checkpoint(const SampleSet& s);
SampleSet samples_from_checkpoint(const Checkpoint& c);

Checkpoint to_checkpoint(const DiagGaussian& g);
DiagGaussian gaussian_from_checkpoint(const Checkpoint& c);

Checkpoint to_checkpoint(const ViPosterior& q, nlohmann::json meta = nlohmann::json::object());
ViPosterior vi_from_checkpoint(const Checkpoint& c);

std::string checkpoint_kind(const Checkpoint& c);

}  // namespace bnn
