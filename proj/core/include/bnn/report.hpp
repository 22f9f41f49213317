#pragma once

#include "bnn/evaluation.hpp"

#include <span>
#include <string>
#include <vector>

namespace bnn {

// CSV renderings of the experiment outputs. Numbers use "%.10g"; NaN is "nan".

std::string format_number(double v);

// lambda,loss,accuracy,not
std::string interp_csv(const InterpolationCurve& c);
// seed,not_init,not_trained,l2_after_match,barrier
std::string not_experiment_csv(std::span<const NotExperimentRow> rows);
// method,representation,agreement,tv,acc_samples,acc_mean
std::string table1_csv(std::span<const Table1Row> rows);

struct SigmaHistogramEntry {
    std::string method;
    std::string representation;
    SigmaHistogram histogram;
};

// method,representation,bin_lo,bin_hi,count
std::string sigma_hist_csv(std::span<const SigmaHistogramEntry> entries);
// variant,retain_fraction,accuracy
std::string prune_csv(std::span<const PruneRow> rows);

// Splits "0,8,16" style lists.
std::vector<double> parse_number_list(const std::string& text);
std::vector<std::size_t> parse_count_list(const std::string& text);

}  // namespace bnn
