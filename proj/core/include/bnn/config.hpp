#pragma once

#include "bnn/data.hpp"
#include "bnn/inference.hpp"
#include "bnn/model.hpp"
#include "bnn/rebasin.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace bnn {

struct DataConfig {
    std::string dir;              // MNIST IDX directory; empty -> $BNN_DATA_DIR
    bool synthetic = false;       // Gaussian blobs instead of MNIST
    std::size_t train_subset = 0; // 0 keeps every training row
    std::size_t test_subset = 0;  // 0 keeps every test row
    std::size_t probe_size = 4096;
    std::size_t synthetic_per_class = 200;
    std::uint64_t seed = 0;       // drives subsets and the probe set, independent of training seeds
};

// Everything a pipeline stage needs. JSON documents are checked against the
// schema (known keys, types, ranges) before any work starts.
struct ExperimentConfig {
    std::optional<std::uint64_t> seed;
    ModelConfig model;
    DataConfig data;
    TrainOptions train;
    std::size_t members = 5;
    ViOptions vi;
    HmcConfig hmc = HmcConfig::desk_scale();
    MatchMethod rebasin_method = MatchMethod::activation;
    std::size_t draws = 100;
    std::size_t barrier_grid = 25;
    bool loss_on_test = false;
    std::size_t hist_bins = 50;
    std::string output_dir = ".";

    void validate() const;
    std::uint64_t require_seed() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& c);

// Resolves the MNIST directory: explicit path, then $BNN_DATA_DIR.
std::string resolve_data_dir(const DataConfig& d);

struct LoadedData {
    Dataset train;
    Dataset test;
    Dataset probe;  // seeded subset of train used by activation matching
};

LoadedData load_data(const ExperimentConfig& c);

}  // namespace bnn
