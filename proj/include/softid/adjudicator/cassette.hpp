#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/adjudicator/prompt.hpp"

namespace softid::adjudicator {

/// One recorded provider exchange.
struct CassetteEntry {
  std::string key;
  std::vector<Message> request_messages;
  std::string response_text;
  double latency_ms = 0.0;
  std::optional<double> provider_latency_ms;

  bool operator==(const CassetteEntry&) const = default;
};

void to_json(nlohmann::json& j, const CassetteEntry& e);
void from_json(const nlohmann::json& j, CassetteEntry& e);

/// `<pair_id>|<model_id>|<prompt sha256>`.
std::string cassette_key(const std::string& pair_id, const std::string& model_id,
                         const std::string& prompt_sha256);

/// Directory of JSONL cassettes, one file per model id. Later lines win when a
/// key is recorded twice. Appends are serialized.
class CassetteStore {
 public:
  explicit CassetteStore(std::filesystem::path dir);

  std::optional<CassetteEntry> find(const std::string& key) const;
  void append(const std::string& model_id, const CassetteEntry& entry);
  std::size_t size() const;

  std::filesystem::path file_for(const std::string& model_id) const;

 private:
  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, CassetteEntry> entries_;
};

}  // namespace softid::adjudicator
