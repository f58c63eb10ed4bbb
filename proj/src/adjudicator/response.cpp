#include "softid/adjudicator/response.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <nlohmann/json.hpp>

namespace softid::adjudicator {

namespace {

constexpr std::array<std::pair<std::string_view, SkipReason>, 6> kReasonNames{{
    {"no_json", SkipReason::kNoJson},
    {"bad_label", SkipReason::kBadLabel},
    {"missing_field", SkipReason::kMissingField},
    {"transport", SkipReason::kTransport},
    {"protocol", SkipReason::kProtocol},
    {"cassette_miss", SkipReason::kCassetteMiss},
}};

// End (exclusive) of the balanced object opening at text[start], or npos.
std::size_t balanced_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

const nlohmann::json* find_key(const nlohmann::json& obj, std::string_view key) {
  if (auto it = obj.find(std::string(key)); it != obj.end()) return &*it;
  for (const auto& [k, v] : obj.items()) {
    if (k.size() == key.size() &&
        std::equal(k.begin(), k.end(), key.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) == b;
        })) {
      return &v;
    }
  }
  return nullptr;
}

bool blank(const std::string& s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

std::string_view to_string(SkipReason reason) {
  for (const auto& [name, value] : kReasonNames)
    if (value == reason) return name;
  return "protocol";
}

std::optional<SkipReason> parse_skip_reason(std::string_view text) {
  for (const auto& [name, value] : kReasonNames)
    if (name == text) return value;
  return std::nullopt;
}

std::optional<std::string_view> find_first_json_object(std::string_view text) {
  for (std::size_t start = text.find('{'); start != std::string_view::npos;
       start = text.find('{', start + 1)) {
    const std::size_t end = balanced_end(text, start);
    if (end == std::string_view::npos) continue;
    const auto candidate = text.substr(start, end - start);
    if (nlohmann::json::accept(candidate)) return candidate;
  }
  return std::nullopt;
}

ParseOutcome parse_response(std::string_view raw) {
  const auto object = find_first_json_object(raw);
  if (!object) return Skipped{SkipReason::kNoJson, "no JSON object found in the completion"};
  const auto j = nlohmann::json::parse(*object);

  const nlohmann::json* verdict = find_key(j, "verdict");
  const nlohmann::json* confidence = find_key(j, "confidence");
  const nlohmann::json* explanation = find_key(j, "explanation");
  for (auto [field, name] : {std::pair{verdict, "verdict"}, std::pair{confidence, "confidence"},
                             std::pair{explanation, "explanation"}}) {
    if (field == nullptr || field->is_null())
      return Skipped{SkipReason::kMissingField, std::string("missing field '") + name + "'"};
  }
  if (!explanation->is_string() || blank(explanation->get<std::string>()))
    return Skipped{SkipReason::kMissingField, "field 'explanation' must be a non-empty string"};

  std::optional<Label> label;
  if (verdict->is_string()) label = parse_label(verdict->get<std::string>());
  if (!label) return Skipped{SkipReason::kBadLabel, "verdict " + verdict->dump() + " is not a label"};
  std::optional<Confidence> conf;
  if (confidence->is_string()) conf = parse_confidence(confidence->get<std::string>());
  if (!conf)
    return Skipped{SkipReason::kBadLabel, "confidence " + confidence->dump() + " is not a level"};

  return Verdict{*label, *conf, explanation->get<std::string>()};
}

std::string serialize_verdict(const Verdict& v) {
  nlohmann::json j = v;
  return j.dump();
}

}  // namespace softid::adjudicator
