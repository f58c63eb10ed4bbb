#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/adjudicator/cassette.hpp"
#include "softid/adjudicator/prompt.hpp"
#include "softid/adjudicator/provider.hpp"
#include "softid/adjudicator/response.hpp"

namespace softid::adjudicator {

struct AdjudicationResult {
  std::string pair_id;
  std::string record_a;
  std::string record_b;
  std::string model_id;
  std::string raw_output;
  ParseOutcome parsed = Skipped{};
  /// From first request submission to final response receipt, retries included.
  double latency_total_ms = 0.0;
  std::optional<double> latency_provider_ms;
  int retries = 0;
  std::string prompt_sha256;

  bool skipped() const { return std::holds_alternative<Skipped>(parsed); }
  const Verdict* verdict() const { return std::get_if<Verdict>(&parsed); }
  const Skipped* skip() const { return std::get_if<Skipped>(&parsed); }

  bool operator==(const AdjudicationResult&) const = default;
};

void to_json(nlohmann::json& j, const AdjudicationResult& r);
void from_json(const nlohmann::json& j, AdjudicationResult& r);

enum class CassetteMode {
  kOff,
  /// Call the provider and append every exchange to the cassette.
  kRecord,
  /// Never call the provider; a missing entry yields skipped(cassette_miss).
  kReplay,
};

std::optional<CassetteMode> parse_cassette_mode(std::string_view text);

struct AdjudicateOptions {
  RetryPolicy retry;
  CassetteStore* cassette = nullptr;
  CassetteMode mode = CassetteMode::kOff;
  /// Backoff sleeper; tests substitute a recorder.
  std::function<void(std::chrono::milliseconds)> sleep;
};

/// Runs one prompt against one model. Failures never throw; they become
/// skipped results.
AdjudicationResult adjudicate(const PromptBundle& bundle, Provider* provider,
                              const std::string& model_id, const DecodingConfig& config,
                              const AdjudicateOptions& options);

struct BatchOptions {
  AdjudicateOptions adjudicate;
  std::size_t parallel = 4;
  /// Per model id; 0 or absent means unlimited.
  std::map<std::string, double> requests_per_minute;
  std::size_t token_warning = 32000;
  std::function<void(const std::string&)> warn;
  ForgeHosts forges = ForgeHosts::defaults();
};

/// Every pair against every model. Results are ordered by pair order, then
/// model order, independent of scheduling. `providers` may map a model to
/// nullptr in replay mode.
std::vector<AdjudicationResult> adjudicate_all(const std::vector<ConflictPair>& pairs,
                                               const ContentMap& contents,
                                               const std::vector<std::string>& model_ids,
                                               const std::map<std::string, Provider*>& providers,
                                               const DecodingConfig& decoding,
                                               const BatchOptions& options);

}  // namespace softid::adjudicator
