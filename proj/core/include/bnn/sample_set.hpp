#pragma once

#include "bnn/model.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace bnn {

// Ordered weight samples from one inference run ("hmc", "ensemble",
// "vi-draws", ...). All samples share one architecture.
struct SampleSet {
    std::vector<WeightSet> samples;
    std::string method;
    nlohmann::json meta = nlohmann::json::object();

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
    const Architecture& architecture() const { return samples.front().architecture(); }

    // Throws ArgumentError when empty or architectures differ.
    void validate() const;
};

}  // namespace bnn
