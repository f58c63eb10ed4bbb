#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/adjudicator/prompt.hpp"

namespace softid::adjudicator {

inline constexpr std::int64_t kDefaultSeed = 20240501;

struct DecodingConfig {
  double temperature = 0.2;
  double top_p = 0.95;
  int max_new_tokens = 512;
  std::optional<std::int64_t> seed = kDefaultSeed;

  bool operator==(const DecodingConfig&) const = default;
};

void to_json(nlohmann::json& j, const DecodingConfig& c);
/// Missing keys keep their defaults; `"seed": null` disables seeding.
void from_json(const nlohmann::json& j, DecodingConfig& c);

struct Completion {
  std::string text;
  /// Server-side processing time when the provider reports it.
  std::optional<double> provider_latency_ms;
};

class ProviderError : public std::runtime_error {
 public:
  enum class Kind {
    /// No usable HTTP exchange: connection failure, timeout, 429, 5xx, other
    /// HTTP errors.
    kTransport,
    /// A response arrived but does not follow the chat-completion schema.
    kProtocol,
  };
  ProviderError(Kind kind, bool retryable, const std::string& what)
      : std::runtime_error(what), kind_(kind), retryable_(retryable) {}
  Kind kind() const { return kind_; }
  bool retryable() const { return retryable_; }

 private:
  Kind kind_;
  bool retryable_;
};

/// Chat-completion contract: messages in, completion text out.
/// Implementations must be safe to call concurrently.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual Completion complete(const std::vector<Message>& messages,
                              const DecodingConfig& decoding) = 0;
};

/// Any endpoint speaking the OpenAI `/chat/completions` dialect (OpenAI,
/// OpenRouter, Hugging Face router, vLLM, llama.cpp server).
class OpenAiCompatibleProvider : public Provider {
 public:
  struct Options {
    /// Base URL up to and including the version segment, e.g.
    /// "https://openrouter.ai/api/v1".
    std::string base_url;
    /// Remote model name sent in the request body.
    std::string model;
    std::optional<std::string> api_key;
    /// Merged into the request body last; provider-specific knobs live here.
    nlohmann::json extra_body = nlohmann::json::object();
    std::vector<std::pair<std::string, std::string>> extra_headers;
    std::chrono::seconds timeout{120};
  };

  explicit OpenAiCompatibleProvider(Options options);
  Completion complete(const std::vector<Message>& messages,
                      const DecodingConfig& decoding) override;

  /// Request body for the given messages.
  nlohmann::json request_body(const std::vector<Message>& messages,
                              const DecodingConfig& decoding) const;

  /// Reads choices[0].message.content; throws ProviderError(kProtocol).
  static std::string completion_text(const nlohmann::json& body);

 private:
  Options options_;
};

/// One configured model.
struct ModelConfig {
  std::string id;
  /// Symbolic slot used by proxy specs ("large-dense", "small-smoe", ...).
  std::string slot;
  /// "openai", "openrouter", "huggingface" or "custom".
  std::string provider = "openrouter";
  std::string model;
  /// Overrides the preset base URL.
  std::string base_url;
  /// Environment variable holding the API key; preset default when empty.
  std::string api_key_env;
  nlohmann::json extra_body = nlohmann::json::object();
  /// Per-model request rate cap; 0 means unlimited.
  double requests_per_minute = 0.0;
};

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30000};

  /// Delay before retry number `attempt` (1-based).
  std::chrono::milliseconds backoff(int attempt) const;
};

struct ModelsConfig {
  DecodingConfig decoding;
  RetryPolicy retry;
  std::size_t parallel = 4;
  /// Prompts estimated above this many tokens produce a warning.
  std::size_t token_warning = 32000;
  std::vector<ModelConfig> models;

  const ModelConfig& model(const std::string& id) const;
};

/// Reads the JSON models file. Throws ValidationError on unknown providers,
/// duplicate ids or duplicate slots.
ModelsConfig load_models_config(const std::filesystem::path& path);
ModelsConfig parse_models_config(const nlohmann::json& j);

/// Builds a live provider from a preset. The API key is read from the
/// environment; a missing key is allowed (local servers need none).
std::unique_ptr<Provider> make_provider(const ModelConfig& model);

}  // namespace softid::adjudicator
