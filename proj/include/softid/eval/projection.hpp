#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

namespace softid::eval {

struct ProjectionPoint {
  std::size_t n_cases = 0;
  double human_total = 0.0;
  /// Human band: n times the per-case CI bounds (equal to human_total when no
  /// CI was supplied).
  double human_low = 0.0;
  double human_high = 0.0;
  /// One model answering every case.
  double model_total = 0.0;
  /// k models on every case plus humans on the deferred share.
  double proxy_total = 0.0;

  bool operator==(const ProjectionPoint&) const = default;
};

/// Linear annotation-time curves, all in seconds.
struct TimeProjection {
  double human_seconds_per_case = 0.0;
  double model_seconds_per_case = 0.0;
  double deferral_fraction = 0.0;
  std::size_t k_members = 0;
  std::vector<ProjectionPoint> points;

  bool operator==(const TimeProjection&) const = default;
};

void to_json(nlohmann::json& j, const TimeProjection& t);
void from_json(const nlohmann::json& j, TimeProjection& t);

/// proxy_total(n) = n * (k * model + deferral * human). Throws
/// ValidationError for non-positive rates, deferral outside [0, 1] or k = 0.
TimeProjection project_time(double human_seconds_per_case, double model_seconds_per_case,
                            double deferral_fraction, std::size_t k_members,
                            const std::vector<std::size_t>& n_grid,
                            std::optional<std::pair<double, double>> human_ci = std::nullopt);

/// 0, step, 2 * step, ... up to `max_cases`.
std::vector<std::size_t> default_grid(std::size_t max_cases = 10000, std::size_t step = 1000);

}  // namespace softid::eval
