#include "softid/adjudicator/prompt.hpp"

#include <set>

#include "softid/core/hash.hpp"

namespace softid::adjudicator {

const std::string_view kTaskInstruction =
    "You are helping to curate a catalogue of research software. Two metadata records, "
    "labelled A and B, were collected from software registries. Decide whether both records "
    "describe the same piece of software.\n"
    "\n"
    "The next two messages hold the metadata of record A and record B as JSON. The two "
    "messages after those hold text fetched from the URLs listed in each record, converted to "
    "Markdown. Some URLs could not be fetched; this is stated where it happened.\n"
    "\n"
    "Give one of three verdicts:\n"
    "- same: both records describe the same software.\n"
    "- different: the records describe different software.\n"
    "- unclear: the available evidence does not support either conclusion.\n"
    "\n"
    "Also give your confidence in the verdict as low, medium or high, and a short explanation "
    "citing the evidence you relied on.\n"
    "\n"
    "Keep in mind that name similarity alone is not a reliable resolution signal. Distinct "
    "tools often share a name, and one tool is often listed under slightly different names. "
    "Compare repositories, homepages, authors, publications and the described functionality "
    "before deciding.\n"
    "\n"
    "Your answer must be a single JSON object with the keys \"verdict\", \"confidence\" and "
    "\"explanation\".";

const std::string_view kFinalInstruction =
    "Now give your answer. Reply with one JSON object and nothing else. The object has exactly "
    "three keys:\n"
    "- \"verdict\": a string, one of \"same\", \"different\", \"unclear\"\n"
    "- \"confidence\": a string, one of \"low\", \"medium\", \"high\"\n"
    "- \"explanation\": a non-empty string stating the evidence behind the verdict";

void to_json(nlohmann::json& j, const Message& m) {
  j = nlohmann::json{{"role", m.role}, {"content", m.content}};
}

void from_json(const nlohmann::json& j, Message& m) {
  try {
    m.role = j.at("role").get<std::string>();
    m.content = j.at("content").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed message: ") + e.what());
  }
}

std::string render_metadata_message(const SoftwareMetadataRecord& record, char which) {
  nlohmann::json j = record;
  j.erase("schema");
  std::string out = "Metadata of record ";
  out += which;
  out += ":\n\n```json\n";
  out += j.dump(2);
  out += "\n```";
  return out;
}

std::string render_content_message(const SoftwareMetadataRecord& record, char which,
                                   const ContentMap& contents, const ForgeHosts& forges) {
  std::string out = "Content fetched from the URLs of record ";
  out += which;
  out += ".";
  const auto urls = content::record_urls(record, forges);
  if (urls.empty()) {
    out += "\n\nRecord ";
    out += which;
    out += " lists no URLs, so no content is available.";
    return out;
  }
  for (const auto& url : urls) {
    out += "\n\n## ";
    out += url.original;
    out += "\n\n";
    auto it = contents.find(url.canonical);
    if (it == contents.end()) {
      out += "_This URL was not fetched. No content is available._";
    } else if (!it->second.fetch_status.is_ok()) {
      out += "_Fetching this URL failed (" + it->second.fetch_status.to_string() +
             "). No content is available._";
    } else {
      out += it->second.markdown;
    }
  }
  return out;
}

std::size_t estimate_tokens(const std::vector<Message>& messages) {
  std::size_t chars = 0;
  for (const auto& m : messages) chars += m.content.size();
  return chars / 4;
}

PromptBundle build_prompt(const ConflictPair& pair, const ContentMap& contents,
                          const ForgeHosts& forges) {
  validate(pair);
  PromptBundle b;
  b.pair_id = pair.pair_id;
  b.messages = {
      Message{"user", std::string(kTaskInstruction)},
      Message{"user", render_metadata_message(pair.record_a, 'A')},
      Message{"user", render_metadata_message(pair.record_b, 'B')},
      Message{"user", render_content_message(pair.record_a, 'A', contents, forges)},
      Message{"user", render_content_message(pair.record_b, 'B', contents, forges)},
      Message{"user", std::string(kFinalInstruction)},
  };
  b.token_estimate = estimate_tokens(b.messages);
  return b;
}

std::string prompt_hash(const std::vector<Message>& messages) {
  nlohmann::json j = messages;
  return sha256_hex(j.dump());
}

}  // namespace softid::adjudicator
