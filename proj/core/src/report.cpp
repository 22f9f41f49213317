#include "bnn/report.hpp"

#include "bnn/errors.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace bnn {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string interp_csv(const InterpolationCurve& c) {
    std::string out = "lambda,loss,accuracy,not\n";
    for (std::size_t i = 0; i < c.lambdas.size(); ++i) {
        out += format_number(c.lambdas[i]) + ',' + format_number(c.losses[i]) + ',' +
               format_number(c.accuracies[i]) + ',' + std::to_string(c.nots[i]) + '\n';
    }
    return out;
}

std::string not_experiment_csv(std::span<const NotExperimentRow> rows) {
    std::string out = "seed,not_init,not_trained,l2_after_match,barrier\n";
    for (const auto& r : rows) {
        out += std::to_string(r.seed) + ',' + std::to_string(r.not_init) + ',' +
               std::to_string(r.not_trained) + ',' + format_number(r.l2_after_match) + ',' +
               format_number(r.barrier) + '\n';
    }
    return out;
}

std::string table1_csv(std::span<const Table1Row> rows) {
    std::string out = "method,representation,agreement,tv,acc_samples,acc_mean\n";
    for (const auto& r : rows) {
        out += r.method + ',' + r.representation + ',' + format_number(r.agreement) + ',' +
               format_number(r.tv) + ',' + format_number(r.acc_samples) + ',' +
               format_number(r.acc_mean) + '\n';
    }
    return out;
}

std::string sigma_hist_csv(std::span<const SigmaHistogramEntry> entries) {
    std::string out = "method,representation,bin_lo,bin_hi,count\n";
    for (const auto& e : entries) {
        const auto& h = e.histogram;
        for (std::size_t b = 0; b < h.counts.size(); ++b) {
            out += e.method + ',' + e.representation + ',' + format_number(h.edges[b]) + ',' +
                   format_number(h.edges[b + 1]) + ',' + std::to_string(h.counts[b]) + '\n';
        }
    }
    return out;
}

std::string prune_csv(std::span<const PruneRow> rows) {
    std::string out = "variant,retain_fraction,accuracy\n";
    for (const auto& r : rows) {
        out += r.variant + ',' + format_number(r.retain_fraction) + ',' + format_number(r.accuracy) + '\n';
    }
    return out;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != item.size()) throw ArgumentError("not a number: '" + item + "'");
        out.push_back(v);
    }
    return out;
}

std::vector<std::size_t> parse_count_list(const std::string& text) {
    std::vector<std::size_t> out;
    for (double v : parse_number_list(text)) {
        if (v < 0 || v != std::floor(v)) throw ArgumentError("not a non-negative integer: " + format_number(v));
        out.push_back(static_cast<std::size_t>(v));
    }
    return out;
}

}  // namespace bnn
