#include "softid/eval/projection.hpp"

#include "softid/core/errors.hpp"

namespace softid::eval {

void to_json(nlohmann::json& j, const TimeProjection& t) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : t.points) {
    points.push_back({{"n_cases", p.n_cases},
                      {"human_total", p.human_total},
                      {"human_low", p.human_low},
                      {"human_high", p.human_high},
                      {"model_total", p.model_total},
                      {"proxy_total", p.proxy_total}});
  }
  j = nlohmann::json{{"human_seconds_per_case", t.human_seconds_per_case},
                     {"model_seconds_per_case", t.model_seconds_per_case},
                     {"deferral_fraction", t.deferral_fraction},
                     {"k_members", t.k_members},
                     {"points", points}};
}

void from_json(const nlohmann::json& j, TimeProjection& t) {
  try {
    t.human_seconds_per_case = j.at("human_seconds_per_case").get<double>();
    t.model_seconds_per_case = j.at("model_seconds_per_case").get<double>();
    t.deferral_fraction = j.at("deferral_fraction").get<double>();
    t.k_members = j.at("k_members").get<std::size_t>();
    t.points.clear();
    for (const auto& p : j.at("points")) {
      t.points.push_back(ProjectionPoint{p.at("n_cases").get<std::size_t>(),
                                         p.at("human_total").get<double>(),
                                         p.at("human_low").get<double>(),
                                         p.at("human_high").get<double>(),
                                         p.at("model_total").get<double>(),
                                         p.at("proxy_total").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed time projection: ") + e.what());
  }
}

TimeProjection project_time(double human_seconds_per_case, double model_seconds_per_case,
                            double deferral_fraction, std::size_t k_members,
                            const std::vector<std::size_t>& n_grid,
                            std::optional<std::pair<double, double>> human_ci) {
  if (!(human_seconds_per_case > 0.0) || !(model_seconds_per_case > 0.0))
    throw ValidationError("per-case times must be positive");
  if (!(deferral_fraction >= 0.0 && deferral_fraction <= 1.0))
    throw ValidationError("deferral fraction must lie in [0, 1]");
  if (k_members == 0) throw ValidationError("a proxy needs at least one member");

  TimeProjection t{human_seconds_per_case, model_seconds_per_case, deferral_fraction, k_members, {}};
  const double k = static_cast<double>(k_members);
  const double proxy_rate = k * model_seconds_per_case + deferral_fraction * human_seconds_per_case;
  const double low = human_ci ? human_ci->first : human_seconds_per_case;
  const double high = human_ci ? human_ci->second : human_seconds_per_case;
  for (std::size_t n : n_grid) {
    const double nd = static_cast<double>(n);
    t.points.push_back(ProjectionPoint{n, nd * human_seconds_per_case, nd * low, nd * high,
                                       nd * model_seconds_per_case, nd * proxy_rate});
  }
  return t;
}

std::vector<std::size_t> default_grid(std::size_t max_cases, std::size_t step) {
  std::vector<std::size_t> out;
  if (step == 0) step = 1;
  for (std::size_t n = 0; n <= max_cases; n += step) out.push_back(n);
  return out;
}

}  // namespace softid::eval
