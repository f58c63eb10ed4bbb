#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "softid/core/model.hpp"

namespace softid::adjudicator {

enum class SkipReason {
  kNoJson,
  kBadLabel,
  kMissingField,
  kTransport,
  kProtocol,
  /// Replay mode found no recorded exchange for the request.
  kCassetteMiss,
};

std::string_view to_string(SkipReason reason);
std::optional<SkipReason> parse_skip_reason(std::string_view text);

struct Skipped {
  SkipReason reason = SkipReason::kNoJson;
  std::string detail;

  bool operator==(const Skipped&) const = default;
};

using ParseOutcome = std::variant<Verdict, Skipped>;

/// Extent of the first balanced `{...}` in `text` that parses as a JSON
/// object. Braces inside JSON strings are ignored while balancing.
std::optional<std::string_view> find_first_json_object(std::string_view text);

/// Reads a model completion.
///
/// The first balanced JSON object must carry `verdict` (same, different or
/// unclear, any casing), `confidence` (low, medium or high) and a non-empty
/// `explanation` string. Key lookup ignores case; extra keys are ignored.
/// Missing fields are reported before bad labels. Never throws.
ParseOutcome parse_response(std::string_view raw);

/// Compact JSON a model would emit for `v`; inverse of parse_response for
/// verdicts that carry a confidence.
std::string serialize_verdict(const Verdict& v);

}  // namespace softid::adjudicator
