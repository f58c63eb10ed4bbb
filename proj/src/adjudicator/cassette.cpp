#include "softid/adjudicator/cassette.hpp"

#include <fstream>

#include "softid/core/errors.hpp"
#include "softid/core/jsonl.hpp"

namespace softid::adjudicator {

void to_json(nlohmann::json& j, const CassetteEntry& e) {
  j = nlohmann::json{{"key", e.key},
                     {"request_messages", e.request_messages},
                     {"response_text", e.response_text},
                     {"latency_ms", e.latency_ms}};
  if (e.provider_latency_ms) j["provider_latency_ms"] = *e.provider_latency_ms;
}

void from_json(const nlohmann::json& j, CassetteEntry& e) {
  try {
    e.key = j.at("key").get<std::string>();
    e.request_messages = j.at("request_messages").get<std::vector<Message>>();
    e.response_text = j.at("response_text").get<std::string>();
    e.latency_ms = j.at("latency_ms").get<double>();
    e.provider_latency_ms.reset();
    if (auto it = j.find("provider_latency_ms"); it != j.end() && !it->is_null())
      e.provider_latency_ms = it->get<double>();
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("malformed cassette entry: ") + ex.what());
  }
}

std::string cassette_key(const std::string& pair_id, const std::string& model_id,
                         const std::string& prompt_sha256) {
  return pair_id + "|" + model_id + "|" + prompt_sha256;
}

CassetteStore::CassetteStore(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir_))
    if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    jsonl::for_each(f, [&](const nlohmann::json& j) {
      auto e = j.get<CassetteEntry>();
      entries_[e.key] = std::move(e);
    });
  }
}

std::filesystem::path CassetteStore::file_for(const std::string& model_id) const {
  std::string name;
  for (char c : model_id)
    name += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return dir_ / (name + ".jsonl");
}

std::optional<CassetteEntry> CassetteStore::find(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void CassetteStore::append(const std::string& model_id, const CassetteEntry& entry) {
  std::lock_guard lock(mutex_);
  std::ofstream out(file_for(model_id), std::ios::app | std::ios::binary);
  if (!out) throw IoError("cannot append to cassette " + file_for(model_id).string());
  out << nlohmann::json(entry).dump() << '\n';
  out.flush();
  if (!out) throw IoError("write failed for cassette " + file_for(model_id).string());
  entries_[entry.key] = entry;
}

std::size_t CassetteStore::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

}  // namespace softid::adjudicator
