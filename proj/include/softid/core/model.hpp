#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/core/errors.hpp"

namespace softid {

inline constexpr std::string_view kSchemaVersion = "v1";

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

enum class Label { kSame = 0, kDifferent = 1, kUnclear = 2 };
inline constexpr std::size_t kLabelCount = 3;
inline constexpr Label kAllLabels[kLabelCount] = {Label::kSame, Label::kDifferent,
                                                   Label::kUnclear};

enum class Confidence { kLow = 0, kMedium = 1, kHigh = 2 };

enum class Difficulty { kEasy, kHard };

enum class PersonRole { kAuthor, kDeveloper, kMaintainer };

std::string_view to_string(Label label);
std::string_view to_string(Confidence confidence);
std::string_view to_string(Difficulty difficulty);
std::string_view to_string(PersonRole role);

// Parsers accept any casing and surrounding whitespace; nullopt on anything
// outside the fixed set.
std::optional<Label> parse_label(std::string_view text);
std::optional<Confidence> parse_confidence(std::string_view text);
std::optional<PersonRole> parse_role(std::string_view text);

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct Person {
  std::string name;
  PersonRole role = PersonRole::kAuthor;

  bool operator==(const Person&) const = default;
};

/// One registry's description of a tool.
struct SoftwareMetadataRecord {
  std::string record_id;
  std::string source;
  std::string name;
  std::optional<std::string> description;
  std::vector<std::string> repository_urls;
  std::vector<std::string> webpage_urls;
  std::vector<std::string> publications;
  std::vector<Person> people;
  /// Source-specific fields without a typed slot. Always a JSON object.
  nlohmann::json extras = nlohmann::json::object();

  bool operator==(const SoftwareMetadataRecord&) const = default;
};

/// Checks record-level invariants (ids, names, URL syntax).
void validate(const SoftwareMetadataRecord& record);

/// Checks per-record invariants plus record_id uniqueness.
void validate_corpus(const std::vector<SoftwareMetadataRecord>& corpus);

// ---------------------------------------------------------------------------
// Conflicts
// ---------------------------------------------------------------------------

enum class ConflictKind { kNameCollision, kUrlCollision };

enum class PairStatus {
  kPending,
  kAutoResolved,
  kModelResolved,
  kDeferred,
  kHumanResolved
};

std::string_view to_string(ConflictKind kind);
std::string_view to_string(PairStatus status);
std::optional<ConflictKind> parse_conflict_kind(std::string_view text);
std::optional<PairStatus> parse_pair_status(std::string_view text);

struct ConflictPair {
  std::string pair_id;
  SoftwareMetadataRecord record_a;
  SoftwareMetadataRecord record_b;
  ConflictKind kind = ConflictKind::kNameCollision;
  PairStatus status = PairStatus::kPending;

  bool operator==(const ConflictPair&) const = default;
};

void validate(const ConflictPair& pair);

// ---------------------------------------------------------------------------
// Verdicts
// ---------------------------------------------------------------------------

struct Verdict {
  Label label = Label::kUnclear;
  std::optional<Confidence> confidence;
  std::string explanation;

  bool operator==(const Verdict&) const = default;
};

/// Structural checks shared by every producer: explanation is non-empty.
void validate(const Verdict& verdict);

/// Human annotations: confidence is required for same/different and
/// forbidden for unclear.
void validate_human_verdict(const Verdict& verdict);

/// hard iff unclear or low confidence. Throws ValidationError for a
/// same/different verdict that carries no confidence.
Difficulty derive_difficulty(const Verdict& verdict);

struct GoldCase {
  std::string pair_id;
  Verdict verdict;
  std::string rationale;
  double annotation_seconds = 0.0;

  Difficulty difficulty() const { return derive_difficulty(verdict); }

  bool operator==(const GoldCase&) const = default;
};

void validate(const GoldCase& gold);

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

void to_json(nlohmann::json& j, const Person& p);
void from_json(const nlohmann::json& j, Person& p);
void to_json(nlohmann::json& j, const SoftwareMetadataRecord& r);
void from_json(const nlohmann::json& j, SoftwareMetadataRecord& r);
void to_json(nlohmann::json& j, const ConflictPair& p);
void from_json(const nlohmann::json& j, ConflictPair& p);
void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);
void to_json(nlohmann::json& j, const GoldCase& g);
void from_json(const nlohmann::json& j, GoldCase& g);

/// Throws ValidationError unless j carries `"schema": "v1"` (a missing field
/// is accepted as v1).
void check_schema(const nlohmann::json& j);

}  // namespace softid
