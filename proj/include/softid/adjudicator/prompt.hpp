#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/content/extractor.hpp"
#include "softid/core/model.hpp"

namespace softid::adjudicator {

struct Message {
  std::string role = "user";
  std::string content;

  bool operator==(const Message&) const = default;
};

void to_json(nlohmann::json& j, const Message& m);
void from_json(const nlohmann::json& j, Message& m);

/// Six user messages in fixed order: task instruction, record A metadata,
/// record B metadata, content A, content B, final instruction.
struct PromptBundle {
  std::string pair_id;
  std::vector<Message> messages;
  std::size_t token_estimate = 0;

  bool operator==(const PromptBundle&) const = default;
};

inline constexpr std::size_t kPromptMessageCount = 6;

/// Opening message. Recorded verbatim in docs/prompt_template.md.
extern const std::string_view kTaskInstruction;
/// Closing message; restates the output format without an example answer.
extern const std::string_view kFinalInstruction;

/// Content lookup keyed by canonical URL, as produced by fetch_all or
/// load_cache_dir.
using ContentMap = std::map<std::string, content::UrlContent>;

/// Renders one record's metadata as a JSON code block under a short heading.
std::string render_metadata_message(const SoftwareMetadataRecord& record, char which);

/// Concatenates the fetched content of every URL of a record, in record order,
/// under one heading per URL. Failed or missing fetches are stated explicitly.
std::string render_content_message(const SoftwareMetadataRecord& record, char which,
                                   const ContentMap& contents,
                                   const ForgeHosts& forges = ForgeHosts::defaults());

/// Characters / 4 over all message bodies.
std::size_t estimate_tokens(const std::vector<Message>& messages);

/// Deterministic: identical inputs give byte-identical bundles. Throws
/// ValidationError for an invalid pair.
PromptBundle build_prompt(const ConflictPair& pair, const ContentMap& contents,
                          const ForgeHosts& forges = ForgeHosts::defaults());

/// SHA-256 over the compact JSON of the message list.
std::string prompt_hash(const std::vector<Message>& messages);

}  // namespace softid::adjudicator
