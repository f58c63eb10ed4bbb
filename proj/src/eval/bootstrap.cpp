#include "softid/eval/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace softid::eval {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

void check_config(const BootstrapConfig& config) {
  if (config.iterations == 0) throw ValidationError("bootstrap needs at least one iteration");
  if (!(config.level > 0.0 && config.level < 1.0))
    throw ValidationError("bootstrap level must lie in (0, 1)");
}

template <class T>
std::vector<T> resample(const std::vector<T>& values, std::mt19937_64& rng) {
  std::vector<T> out;
  out.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) out.push_back(values[uniform_index(rng, values.size())]);
  return out;
}

MetricCI stratum_ci(const std::vector<ResolvedCase>& cases, std::vector<double> replicates,
                    double level) {
  if (cases.empty()) return MetricCI{};
  return summarize(error_rate(cases), std::move(replicates), level);
}

}  // namespace

void to_json(nlohmann::json& j, const MetricCI& m) {
  j = nlohmann::json{{"defined", m.defined},
                     {"point", m.point},
                     {"mean", m.mean},
                     {"ci_low", m.ci_low},
                     {"ci_high", m.ci_high}};
}

void from_json(const nlohmann::json& j, MetricCI& m) {
  try {
    m.defined = j.at("defined").get<bool>();
    m.point = j.at("point").get<double>();
    m.mean = j.at("mean").get<double>();
    m.ci_low = j.at("ci_low").get<double>();
    m.ci_high = j.at("ci_high").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed metric: ") + e.what());
  }
}

std::uint64_t iteration_seed(std::uint64_t seed, std::size_t i) {
  return splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(i));
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  if (n == 0) throw ValidationError("uniform_index over an empty range");
  const std::uint64_t bound = static_cast<std::uint64_t>(n);
  // Largest multiple of bound that fits; values at or above it are redrawn.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

MetricCI summarize(double point, std::vector<double> replicates, double level) {
  MetricCI out;
  if (replicates.empty()) return out;
  out.defined = true;
  out.point = point;
  double sum = 0.0;
  for (double v : replicates) sum += v;
  out.mean = sum / static_cast<double>(replicates.size());
  std::sort(replicates.begin(), replicates.end());
  const double alpha = 1.0 - level;
  out.ci_low = quantile_sorted(replicates, alpha / 2.0);
  out.ci_high = quantile_sorted(replicates, 1.0 - alpha / 2.0);
  return out;
}

std::vector<MetricCI> bootstrap_many(const std::vector<CaseMetric>& metrics,
                                     const std::vector<ResolvedCase>& cases,
                                     const BootstrapConfig& config) {
  check_config(config);
  if (cases.empty()) return std::vector<MetricCI>(metrics.size());
  std::vector<std::vector<double>> replicates(metrics.size());
  for (auto& r : replicates) r.reserve(config.iterations);
  for (std::size_t i = 0; i < config.iterations; ++i) {
    std::mt19937_64 rng(iteration_seed(config.seed, i));
    const auto sample = resample(cases, rng);
    for (std::size_t m = 0; m < metrics.size(); ++m) replicates[m].push_back(metrics[m](sample));
  }
  std::vector<MetricCI> out;
  out.reserve(metrics.size());
  for (std::size_t m = 0; m < metrics.size(); ++m)
    out.push_back(summarize(metrics[m](cases), std::move(replicates[m]), config.level));
  return out;
}

MetricCI bootstrap_ci(const CaseMetric& metric, const std::vector<ResolvedCase>& cases,
                      const BootstrapConfig& config) {
  return bootstrap_many({metric}, cases, config).front();
}

MetricCI bootstrap_mean(const std::vector<double>& values, const BootstrapConfig& config) {
  check_config(config);
  if (values.empty()) return MetricCI{};
  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  std::vector<double> replicates;
  replicates.reserve(config.iterations);
  for (std::size_t i = 0; i < config.iterations; ++i) {
    std::mt19937_64 rng(iteration_seed(config.seed, i));
    replicates.push_back(mean_of(resample(values, rng)));
  }
  return summarize(mean_of(values), std::move(replicates), config.level);
}

void to_json(nlohmann::json& j, const StratifiedResult& s) {
  j = nlohmann::json{{"easy", {{"n", s.easy.n}, {"error_rate", s.easy.error}}},
                     {"hard", {{"n", s.hard.n}, {"error_rate", s.hard.error}}}};
  j["p_value"] = s.p_value ? nlohmann::json(*s.p_value) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, StratifiedResult& s) {
  try {
    s.easy = StratumError{j.at("easy").at("n").get<std::size_t>(),
                          j.at("easy").at("error_rate").get<MetricCI>()};
    s.hard = StratumError{j.at("hard").at("n").get<std::size_t>(),
                          j.at("hard").at("error_rate").get<MetricCI>()};
    s.p_value.reset();
    if (!j.at("p_value").is_null()) s.p_value = j.at("p_value").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed stratified result: ") + e.what());
  }
}

StratifiedResult stratified_error_test(const std::vector<ResolvedCase>& cases,
                                       const BootstrapConfig& config) {
  check_config(config);
  std::vector<ResolvedCase> easy;
  std::vector<ResolvedCase> hard;
  for (const auto& c : cases) (c.difficulty == Difficulty::kEasy ? easy : hard).push_back(c);

  std::vector<double> easy_reps;
  std::vector<double> hard_reps;
  std::size_t not_worse = 0;
  for (std::size_t i = 0; i < config.iterations; ++i) {
    std::mt19937_64 rng(iteration_seed(config.seed, i));
    const double e = easy.empty() ? 0.0 : error_rate(resample(easy, rng));
    const double h = hard.empty() ? 0.0 : error_rate(resample(hard, rng));
    if (!easy.empty()) easy_reps.push_back(e);
    if (!hard.empty()) hard_reps.push_back(h);
    if (h - e <= 0.0) ++not_worse;
  }

  StratifiedResult out;
  out.easy = StratumError{easy.size(), stratum_ci(easy, std::move(easy_reps), config.level)};
  out.hard = StratumError{hard.size(), stratum_ci(hard, std::move(hard_reps), config.level)};
  if (!easy.empty() && !hard.empty())
    out.p_value = static_cast<double>(not_worse) / static_cast<double>(config.iterations);
  return out;
}

}  // namespace softid::eval
