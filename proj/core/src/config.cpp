#include "bnn/config.hpp"

#include "bnn/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

namespace bnn {

namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> known) {
    if (!j.is_object()) throw ArgumentError("config: '" + where + "' must be an object");
    std::set<std::string> allowed(known.begin(), known.end());
    for (const auto& [key, _] : j.items()) {
        if (!allowed.count(key)) throw ArgumentError("config: unknown key '" + where + "." + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    const auto& v = j.at(key);
    const std::string path = where + "." + key;
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ArgumentError("config: '" + path + "' must be a boolean");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw ArgumentError("config: '" + path + "' must be a non-negative integer");
        }
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) throw ArgumentError("config: '" + path + "' must be a number");
    } else {
        if (!v.is_string()) throw ArgumentError("config: '" + path + "' must be a string");
    }
    out = v.get<T>();
}

void read_train(const json& j, TrainOptions& t, const std::string& where) {
    reject_unknown(j, where, {"epochs", "learning_rate", "batch_size", "init_sigma", "members"});
    read(j, "epochs", t.epochs, where);
    read(j, "learning_rate", t.learning_rate, where);
    read(j, "batch_size", t.batch_size, where);
}

}  // namespace

void ExperimentConfig::validate() const {
    model.validate();
    train.validate();
    vi.train.validate();
    hmc.validate();
    if (members < 2) throw ArgumentError("config: ensemble.members must be >= 2");
    if (!(vi.init_sigma > 0.0)) throw ArgumentError("config: vi.init_sigma must be > 0");
    if (draws < 1) throw ArgumentError("config: eval.draws must be >= 1");
    if (barrier_grid < 3) throw ArgumentError("config: eval.barrier_grid must be >= 3");
    if (hist_bins < 1) throw ArgumentError("config: eval.hist_bins must be >= 1");
    if (data.probe_size < 1) throw ArgumentError("config: data.probe_size must be >= 1");
    if (data.synthetic && data.synthetic_per_class < 1) {
        throw ArgumentError("config: data.synthetic_per_class must be >= 1");
    }
}

std::uint64_t ExperimentConfig::require_seed() const {
    if (!seed) throw ArgumentError("--seed is required for this command");
    return *seed;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
    reject_unknown(j, "config",
                   {"seed", "model", "data", "train", "ensemble", "vi", "hmc", "rebasin", "eval", "output_dir"});
    if (j.contains("seed")) {
        std::uint64_t s = 0;
        read(j, "seed", s, "config");
        c.seed = s;
    }
    read(j, "output_dir", c.output_dir, "config");
    if (j.contains("model")) {
        const auto& m = j.at("model");
        reject_unknown(m, "model", {"hidden_size", "prior_std", "activation", "input_dim", "num_classes"});
        read(m, "hidden_size", c.model.hidden_size, "model");
        read(m, "prior_std", c.model.prior_std, "model");
        read(m, "input_dim", c.model.input_dim, "model");
        read(m, "num_classes", c.model.num_classes, "model");
        std::string act(to_string(c.model.activation));
        read(m, "activation", act, "model");
        c.model.activation = parse_activation(act);
    }
    if (j.contains("data")) {
        const auto& d = j.at("data");
        reject_unknown(d, "data", {"dir", "synthetic", "train_subset", "test_subset", "probe_size",
                                   "synthetic_per_class", "seed"});
        read(d, "dir", c.data.dir, "data");
        read(d, "synthetic", c.data.synthetic, "data");
        read(d, "train_subset", c.data.train_subset, "data");
        read(d, "test_subset", c.data.test_subset, "data");
        read(d, "probe_size", c.data.probe_size, "data");
        read(d, "synthetic_per_class", c.data.synthetic_per_class, "data");
        read(d, "seed", c.data.seed, "data");
    }
    if (j.contains("train")) read_train(j.at("train"), c.train, "train");
    if (j.contains("ensemble")) {
        const auto& e = j.at("ensemble");
        reject_unknown(e, "ensemble", {"members"});
        read(e, "members", c.members, "ensemble");
    }
    if (j.contains("vi")) {
        read_train(j.at("vi"), c.vi.train, "vi");
        read(j.at("vi"), "init_sigma", c.vi.init_sigma, "vi");
    }
    if (j.contains("hmc")) {
        const auto& h = j.at("hmc");
        reject_unknown(h, "hmc", {"burn_in_epochs", "thin", "leapfrog_steps", "step_size", "target_samples",
                                  "step_size_adapt", "target_acceptance", "max_consecutive_rejections",
                                  "chains"});
        read(h, "burn_in_epochs", c.hmc.burn_in_epochs, "hmc");
        read(h, "thin", c.hmc.thin, "hmc");
        read(h, "leapfrog_steps", c.hmc.leapfrog_steps, "hmc");
        read(h, "step_size", c.hmc.step_size, "hmc");
        read(h, "target_samples", c.hmc.target_samples, "hmc");
        read(h, "step_size_adapt", c.hmc.step_size_adapt, "hmc");
        read(h, "target_acceptance", c.hmc.target_acceptance, "hmc");
        read(h, "max_consecutive_rejections", c.hmc.max_consecutive_rejections, "hmc");
        read(h, "chains", c.hmc.chains, "hmc");
    }
    if (j.contains("rebasin")) {
        const auto& r = j.at("rebasin");
        reject_unknown(r, "rebasin", {"method"});
        std::string method(to_string(c.rebasin_method));
        read(r, "method", method, "rebasin");
        c.rebasin_method = parse_match_method(method);
    }
    if (j.contains("eval")) {
        const auto& e = j.at("eval");
        reject_unknown(e, "eval", {"draws", "barrier_grid", "loss_on_test", "hist_bins"});
        read(e, "draws", c.draws, "eval");
        read(e, "barrier_grid", c.barrier_grid, "eval");
        read(e, "loss_on_test", c.loss_on_test, "eval");
        read(e, "hist_bins", c.hist_bins, "eval");
    }
    c.validate();
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ArgumentError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ArgumentError("config " + path + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

nlohmann::json to_json(const ExperimentConfig& c) {
    json j = {
        {"model",
         {{"hidden_size", c.model.hidden_size},
          {"prior_std", c.model.prior_std},
          {"activation", std::string(to_string(c.model.activation))},
          {"input_dim", c.model.input_dim},
          {"num_classes", c.model.num_classes}}},
        {"data",
         {{"dir", c.data.dir},
          {"synthetic", c.data.synthetic},
          {"train_subset", c.data.train_subset},
          {"test_subset", c.data.test_subset},
          {"probe_size", c.data.probe_size},
          {"synthetic_per_class", c.data.synthetic_per_class},
          {"seed", c.data.seed}}},
        {"train",
         {{"epochs", c.train.epochs},
          {"learning_rate", c.train.learning_rate},
          {"batch_size", c.train.batch_size}}},
        {"ensemble", {{"members", c.members}}},
        {"vi",
         {{"epochs", c.vi.train.epochs},
          {"learning_rate", c.vi.train.learning_rate},
          {"batch_size", c.vi.train.batch_size},
          {"init_sigma", c.vi.init_sigma}}},
        {"hmc", to_json(c.hmc)},
        {"rebasin", {{"method", std::string(to_string(c.rebasin_method))}}},
        {"eval",
         {{"draws", c.draws},
          {"barrier_grid", c.barrier_grid},
          {"loss_on_test", c.loss_on_test},
          {"hist_bins", c.hist_bins}}},
        {"output_dir", c.output_dir}};
    if (c.seed) j["seed"] = *c.seed;
    return j;
}

std::string resolve_data_dir(const DataConfig& d) {
    if (!d.dir.empty()) return d.dir;
    if (const char* env = std::getenv("BNN_DATA_DIR"); env && *env) return env;
    throw ArgumentError("no MNIST directory: pass --data-dir or set BNN_DATA_DIR");
}

LoadedData load_data(const ExperimentConfig& c) {
    c.validate();
    LoadedData out;
    if (c.data.synthetic) {
        Rng rng = Rng::split(c.data.seed, "synthetic");
        const auto all = synthetic_blobs(c.model.num_classes, 2 * c.data.synthetic_per_class,
                                         c.model.input_dim, rng);
        std::vector<std::size_t> even, odd;
        for (std::size_t i = 0; i < all.size(); ++i) (i % 2 == 0 ? even : odd).push_back(i);
        out.train = select_rows(all, even);
        out.test = select_rows(all, odd);
        out.train.name = "blobs-train";
        out.test.name = "blobs-test";
    } else {
        const auto dir = resolve_data_dir(c.data);
        out.train = load_mnist_train(dir);
        out.test = load_mnist_test(dir);
        if (out.train.input_dim() != c.model.input_dim) {
            throw ArgumentError("model.input_dim does not match the MNIST image size");
        }
    }
    if (c.data.train_subset > 0 && c.data.train_subset < out.train.size()) {
        Rng rng = Rng::split(c.data.seed, "train-subset");
        out.train = subset(out.train, c.data.train_subset, rng);
    }
    if (c.data.test_subset > 0 && c.data.test_subset < out.test.size()) {
        Rng rng = Rng::split(c.data.seed, "test-subset");
        out.test = subset(out.test, c.data.test_subset, rng);
    }
    Rng probe_rng = Rng::split(c.data.seed, "probe");
    out.probe = subset(out.train, std::min(c.data.probe_size, out.train.size()), probe_rng);
    return out;
}

}  // namespace bnn
