#include "softid/harvest/decision.hpp"

namespace softid {

std::string_view to_string(Origin origin) {
  switch (origin) {
    case Origin::kAuto: return "auto";
    case Origin::kModelProxy: return "model_proxy";
    case Origin::kHuman: return "human";
  }
  return "?";
}

std::optional<Origin> parse_origin(std::string_view text) {
  if (text == "auto") return Origin::kAuto;
  if (text == "model_proxy") return Origin::kModelProxy;
  if (text == "human") return Origin::kHuman;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const ResolutionDecision& d) {
  j = nlohmann::json{
      {"schema", kSchemaVersion}, {"type", "resolution"},
      {"pair_id", d.pair_id},     {"record_a", d.record_a},
      {"record_b", d.record_b},   {"outcome", to_string(d.outcome)},
      {"origin", to_string(d.origin)}, {"provenance", d.provenance},
  };
}

void from_json(const nlohmann::json& j, ResolutionDecision& d) {
  check_schema(j);
  try {
    d.pair_id = j.at("pair_id").get<std::string>();
    d.record_a = j.at("record_a").get<std::string>();
    d.record_b = j.at("record_b").get<std::string>();
    auto outcome = parse_label(j.at("outcome").get<std::string>());
    auto origin = parse_origin(j.at("origin").get<std::string>());
    if (!outcome || !origin) throw ValidationError("decision '" + d.pair_id + "' has bad enums");
    d.outcome = *outcome;
    d.origin = *origin;
    d.provenance = j.value("provenance", "");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed resolution decision: ") + e.what());
  }
}

}  // namespace softid
