#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace softid::jsonl {

/// Calls fn for every non-blank line. Parse errors are reported as
/// ValidationError with the file name and line number.
void for_each(const std::filesystem::path& path,
              const std::function<void(const nlohmann::json&)>& fn);

std::vector<nlohmann::json> read_all(const std::filesystem::path& path);

template <class T>
std::vector<T> read(const std::filesystem::path& path) {
  std::vector<T> out;
  for_each(path, [&](const nlohmann::json& j) { out.push_back(j.get<T>()); });
  return out;
}

/// Writes one compact JSON value per line. Written to a sibling temp file
/// and renamed into place.
void write(const std::filesystem::path& path,
           const std::vector<nlohmann::json>& lines);

template <class T>
void write_values(const std::filesystem::path& path, const std::vector<T>& values) {
  std::vector<nlohmann::json> lines;
  lines.reserve(values.size());
  for (const auto& v : values) lines.emplace_back(v);
  write(path, lines);
}

/// Replaces `path` atomically with `content`.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

}  // namespace softid::jsonl
