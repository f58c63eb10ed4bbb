#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/eval/metrics.hpp"

namespace softid::eval {

inline constexpr std::uint64_t kDefaultSeed = 42;

struct BootstrapConfig {
  std::size_t iterations = 1000;
  double level = 0.95;
  std::uint64_t seed = kDefaultSeed;
};

/// Percentile bootstrap summary. `point` is the metric on the original
/// sample, `mean` the average over resamples.
struct MetricCI {
  bool defined = false;
  double point = 0.0;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;

  bool operator==(const MetricCI&) const = default;
};

void to_json(nlohmann::json& j, const MetricCI& m);
void from_json(const nlohmann::json& j, MetricCI& m);

/// Seed of the generator for iteration `i` (splitmix64 of seed and index), so
/// each replicate is independent of scheduling.
std::uint64_t iteration_seed(std::uint64_t seed, std::size_t i);

/// Uniform integer in [0, n) from a 64-bit engine by rejection; identical on
/// every platform, unlike std::uniform_int_distribution.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t n);

/// Linear-interpolation quantile of sorted values, q in [0, 1].
double quantile_sorted(const std::vector<double>& sorted, double q);

/// Summarizes replicate values into mean and percentile CI.
MetricCI summarize(double point, std::vector<double> replicates, double level);

using CaseMetric = std::function<double(const std::vector<ResolvedCase>&)>;

/// Resamples `cases` with replacement `iterations` times. Undefined for
/// empty input. Bit-reproducible for a fixed seed.
MetricCI bootstrap_ci(const CaseMetric& metric, const std::vector<ResolvedCase>& cases,
                      const BootstrapConfig& config);

/// Same resampling for several metrics at once; replicate i of every metric
/// uses the same resample, and each matches bootstrap_ci for that metric.
std::vector<MetricCI> bootstrap_many(const std::vector<CaseMetric>& metrics,
                                     const std::vector<ResolvedCase>& cases,
                                     const BootstrapConfig& config);

/// Bootstrap of the mean of plain numbers (e.g. annotation seconds).
MetricCI bootstrap_mean(const std::vector<double>& values, const BootstrapConfig& config);

struct StratumError {
  std::size_t n = 0;
  /// error_rate over the stratum, with within-stratum bootstrap CI.
  MetricCI error;

  bool operator==(const StratumError&) const = default;
};

struct StratifiedResult {
  StratumError easy;
  StratumError hard;
  /// Fraction of replicates with hard_error - easy_error <= 0. Omitted when a
  /// stratum is empty.
  std::optional<double> p_value;

  bool operator==(const StratifiedResult&) const = default;
};

void to_json(nlohmann::json& j, const StratifiedResult& s);
void from_json(const nlohmann::json& j, StratifiedResult& s);

/// One-sided bootstrap test that hard cases are answered worse than easy
/// ones. Each replicate resamples both strata independently.
StratifiedResult stratified_error_test(const std::vector<ResolvedCase>& cases,
                                       const BootstrapConfig& config);

}  // namespace softid::eval
