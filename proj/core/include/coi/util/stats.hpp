#pragma once

#include <cstddef>
#include <span>

#include <nlohmann/json_fwd.hpp>

namespace coi {

/// Column summary in the shape of the descriptive tables we report:
/// count, mean, sample standard deviation, min, median, 75th percentile, max.
struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;
  double min = 0.0;
  double median = 0.0;
  double p75 = 0.0;
  double max = 0.0;
};

/// Sample (n-1) standard deviation; 0 for fewer than two values.
Summary describe(std::span<const double> values);

/// Linear-interpolated quantile, q in [0, 1], over an ascending range.
double quantile_sorted(std::span<const double> sorted, double q);

double mean_of(std::span<const double> values);
double sample_std(std::span<const double> values);

void to_json(nlohmann::json& j, const Summary& s);

}  // namespace coi
