#include "softid/core/model.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "softid/core/url.hpp"

namespace softid {

namespace {

std::string normalize_token(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

template <class Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view text,
                               const std::array<std::pair<std::string_view, Enum>, N>& table) {
  const std::string token = normalize_token(text);
  for (const auto& [name, value] : table) {
    if (token == name) return value;
  }
  return std::nullopt;
}

constexpr std::array<std::pair<std::string_view, Label>, 3> kLabelNames{{
    {"same", Label::kSame},
    {"different", Label::kDifferent},
    {"unclear", Label::kUnclear},
}};
constexpr std::array<std::pair<std::string_view, Confidence>, 3> kConfidenceNames{{
    {"low", Confidence::kLow},
    {"medium", Confidence::kMedium},
    {"high", Confidence::kHigh},
}};
constexpr std::array<std::pair<std::string_view, PersonRole>, 3> kRoleNames{{
    {"author", PersonRole::kAuthor},
    {"developer", PersonRole::kDeveloper},
    {"maintainer", PersonRole::kMaintainer},
}};
constexpr std::array<std::pair<std::string_view, ConflictKind>, 2> kKindNames{{
    {"name_collision", ConflictKind::kNameCollision},
    {"url_collision", ConflictKind::kUrlCollision},
}};
constexpr std::array<std::pair<std::string_view, PairStatus>, 5> kStatusNames{{
    {"pending", PairStatus::kPending},
    {"auto_resolved", PairStatus::kAutoResolved},
    {"model_resolved", PairStatus::kModelResolved},
    {"deferred", PairStatus::kDeferred},
    {"human_resolved", PairStatus::kHumanResolved},
}};

template <class Enum, std::size_t N>
std::string_view name_of(Enum value,
                         const std::array<std::pair<std::string_view, Enum>, N>& table) {
  for (const auto& [name, v] : table) {
    if (v == value) return name;
  }
  return "?";
}

// Field accessors that report schema problems as ValidationError instead of
// leaking nlohmann exception types.
const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  if (!j.is_object()) throw ValidationError("expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ValidationError(std::string("missing field '") + key + "'");
  return *it;
}

std::string require_string(const nlohmann::json& j, const char* key) {
  const auto& v = require(j, key);
  if (!v.is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::string optional_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return out;
  if (!it->is_array()) throw ValidationError(std::string("field '") + key + "' must be a list");
  for (const auto& v : *it) {
    if (!v.is_string())
      throw ValidationError(std::string("field '") + key + "' must contain strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::string_view to_string(Label label) { return name_of(label, kLabelNames); }
std::string_view to_string(Confidence c) { return name_of(c, kConfidenceNames); }
std::string_view to_string(PersonRole role) { return name_of(role, kRoleNames); }
std::string_view to_string(ConflictKind kind) { return name_of(kind, kKindNames); }
std::string_view to_string(PairStatus status) { return name_of(status, kStatusNames); }
std::string_view to_string(Difficulty d) { return d == Difficulty::kHard ? "hard" : "easy"; }

std::optional<Label> parse_label(std::string_view text) { return parse_enum(text, kLabelNames); }
std::optional<Confidence> parse_confidence(std::string_view text) {
  return parse_enum(text, kConfidenceNames);
}
std::optional<PersonRole> parse_role(std::string_view text) { return parse_enum(text, kRoleNames); }
std::optional<ConflictKind> parse_conflict_kind(std::string_view text) {
  return parse_enum(text, kKindNames);
}
std::optional<PairStatus> parse_pair_status(std::string_view text) {
  return parse_enum(text, kStatusNames);
}

void validate(const SoftwareMetadataRecord& record) {
  if (record.record_id.empty()) throw ValidationError("record_id must not be empty");
  if (record.name.empty())
    throw ValidationError("record '" + record.record_id + "' has an empty name");
  for (const auto* list : {&record.repository_urls, &record.webpage_urls}) {
    for (const auto& url : *list) {
      try {
        normalize_url(url);
      } catch (const MalformedUrlError& e) {
        throw ValidationError("record '" + record.record_id + "': " + e.what());
      }
    }
  }
  if (!record.extras.is_object())
    throw ValidationError("record '" + record.record_id + "': extras must be an object");
}

void validate_corpus(const std::vector<SoftwareMetadataRecord>& corpus) {
  std::set<std::string_view> seen;
  for (const auto& r : corpus) {
    validate(r);
    if (!seen.insert(r.record_id).second)
      throw ValidationError("duplicate record_id '" + r.record_id + "'");
  }
}

void validate(const ConflictPair& pair) {
  if (pair.pair_id.empty()) throw ValidationError("pair_id must not be empty");
  validate(pair.record_a);
  validate(pair.record_b);
  if (pair.record_a.record_id == pair.record_b.record_id)
    throw ValidationError("pair '" + pair.pair_id + "' links a record to itself");
}

void validate(const Verdict& verdict) {
  if (verdict.explanation.empty()) throw ValidationError("verdict explanation must not be empty");
}

void validate_human_verdict(const Verdict& verdict) {
  validate(verdict);
  if (verdict.label == Label::kUnclear && verdict.confidence)
    throw ValidationError("an unclear verdict carries no confidence");
  if (verdict.label != Label::kUnclear && !verdict.confidence)
    throw ValidationError("a same/different verdict requires a confidence");
}

Difficulty derive_difficulty(const Verdict& verdict) {
  if (verdict.label == Label::kUnclear) return Difficulty::kHard;
  if (!verdict.confidence)
    throw ValidationError("difficulty is undefined for a verdict without confidence");
  return *verdict.confidence == Confidence::kLow ? Difficulty::kHard : Difficulty::kEasy;
}

void validate(const GoldCase& gold) {
  if (gold.pair_id.empty()) throw ValidationError("gold case without pair_id");
  validate_human_verdict(gold.verdict);
  if (gold.annotation_seconds < 0)
    throw ValidationError("gold case '" + gold.pair_id + "' has negative annotation time");
}

void check_schema(const nlohmann::json& j) {
  auto it = j.find("schema");
  if (it == j.end()) return;
  if (!it->is_string() || it->get<std::string>() != kSchemaVersion)
    throw ValidationError("unsupported schema version " + it->dump());
}

void to_json(nlohmann::json& j, const Person& p) {
  j = nlohmann::json{{"name", p.name}, {"role", to_string(p.role)}};
}

void from_json(const nlohmann::json& j, Person& p) {
  p.name = require_string(j, "name");
  auto role = parse_role(optional_string(j, "role"));
  if (!role) throw ValidationError("person '" + p.name + "' has an unknown role");
  p.role = *role;
}

void to_json(nlohmann::json& j, const SoftwareMetadataRecord& r) {
  j = nlohmann::json{
      {"schema", kSchemaVersion},
      {"record_id", r.record_id},
      {"source", r.source},
      {"name", r.name},
      {"repository_urls", r.repository_urls},
      {"webpage_urls", r.webpage_urls},
      {"publications", r.publications},
      {"people", r.people},
      {"extras", r.extras},
  };
  if (r.description) j["description"] = *r.description;
}

void from_json(const nlohmann::json& j, SoftwareMetadataRecord& r) {
  check_schema(j);
  r.record_id = require_string(j, "record_id");
  r.source = optional_string(j, "source");
  r.name = require_string(j, "name");
  r.description.reset();
  if (auto it = j.find("description"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("field 'description' must be a string");
    r.description = it->get<std::string>();
  }
  r.repository_urls = string_list(j, "repository_urls");
  r.webpage_urls = string_list(j, "webpage_urls");
  r.publications = string_list(j, "publications");
  r.people.clear();
  if (auto it = j.find("people"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw ValidationError("field 'people' must be a list");
    for (const auto& p : *it) r.people.push_back(p.get<Person>());
  }
  r.extras = nlohmann::json::object();
  if (auto it = j.find("extras"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) throw ValidationError("field 'extras' must be an object");
    r.extras = *it;
  }
}

void to_json(nlohmann::json& j, const ConflictPair& p) {
  j = nlohmann::json{
      {"schema", kSchemaVersion}, {"pair_id", p.pair_id},   {"kind", to_string(p.kind)},
      {"status", to_string(p.status)}, {"record_a", p.record_a}, {"record_b", p.record_b},
  };
}

void from_json(const nlohmann::json& j, ConflictPair& p) {
  check_schema(j);
  p.pair_id = require_string(j, "pair_id");
  auto kind = parse_conflict_kind(require_string(j, "kind"));
  if (!kind) throw ValidationError("pair '" + p.pair_id + "' has an unknown kind");
  p.kind = *kind;
  auto status = parse_pair_status(optional_string(j, "status").empty()
                                      ? "pending"
                                      : optional_string(j, "status"));
  if (!status) throw ValidationError("pair '" + p.pair_id + "' has an unknown status");
  p.status = *status;
  p.record_a = require(j, "record_a").get<SoftwareMetadataRecord>();
  p.record_b = require(j, "record_b").get<SoftwareMetadataRecord>();
}

void to_json(nlohmann::json& j, const Verdict& v) {
  j = nlohmann::json{{"verdict", to_string(v.label)}, {"explanation", v.explanation}};
  if (v.confidence) j["confidence"] = to_string(*v.confidence);
}

void from_json(const nlohmann::json& j, Verdict& v) {
  auto label = parse_label(require_string(j, "verdict"));
  if (!label) throw ValidationError("unknown verdict label " + require(j, "verdict").dump());
  v.label = *label;
  v.confidence.reset();
  if (auto it = j.find("confidence"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("field 'confidence' must be a string");
    auto c = parse_confidence(it->get<std::string>());
    if (!c) throw ValidationError("unknown confidence " + it->dump());
    v.confidence = *c;
  }
  v.explanation = require_string(j, "explanation");
}

void to_json(nlohmann::json& j, const GoldCase& g) {
  j = nlohmann::json{
      {"schema", kSchemaVersion},
      {"pair_id", g.pair_id},
      {"verdict", g.verdict},
      {"rationale", g.rationale},
      {"annotation_seconds", g.annotation_seconds},
      {"difficulty", to_string(g.difficulty())},
  };
}

void from_json(const nlohmann::json& j, GoldCase& g) {
  check_schema(j);
  g.pair_id = require_string(j, "pair_id");
  g.verdict = require(j, "verdict").get<Verdict>();
  g.rationale = optional_string(j, "rationale");
  g.annotation_seconds = 0.0;
  if (auto it = j.find("annotation_seconds"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw ValidationError("annotation_seconds must be a number");
    g.annotation_seconds = it->get<double>();
  }
  validate(g);
  if (auto it = j.find("difficulty"); it != j.end() && !it->is_null()) {
    if (!it->is_string() || it->get<std::string>() != to_string(g.difficulty()))
      throw ValidationError("gold case '" + g.pair_id +
                            "' stores a difficulty inconsistent with its verdict");
  }
}

}  // namespace softid
