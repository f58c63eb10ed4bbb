#include "softid/adjudicator/provider.hpp"

#include <cmath>
#include <cstdlib>
#include <set>

#include <httplib.h>

#include "softid/core/jsonl.hpp"

namespace softid::adjudicator {

namespace {

struct Preset {
  std::string_view name;
  std::string_view base_url;
  std::string_view key_env;
};

constexpr Preset kPresets[] = {
    {"openai", "https://api.openai.com/v1", "OPENAI_API_KEY"},
    {"openrouter", "https://openrouter.ai/api/v1", "OPENROUTER_API_KEY"},
    {"huggingface", "https://router.huggingface.co/v1", "HF_TOKEN"},
    {"custom", "", "LLM_API_KEY"},
};

const Preset* find_preset(std::string_view name) {
  for (const auto& p : kPresets)
    if (p.name == name) return &p;
  return nullptr;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || !std::isfinite(v) || v < 0) return std::nullopt;
  return v;
}

}  // namespace

void to_json(nlohmann::json& j, const DecodingConfig& c) {
  j = nlohmann::json{{"temperature", c.temperature},
                     {"top_p", c.top_p},
                     {"max_new_tokens", c.max_new_tokens}};
  j["seed"] = c.seed ? nlohmann::json(*c.seed) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, DecodingConfig& c) {
  try {
    c.temperature = j.value("temperature", c.temperature);
    c.top_p = j.value("top_p", c.top_p);
    c.max_new_tokens = j.value("max_new_tokens", c.max_new_tokens);
    if (auto it = j.find("seed"); it != j.end())
      c.seed = it->is_null() ? std::nullopt : std::optional<std::int64_t>(it->get<std::int64_t>());
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed decoding config: ") + e.what());
  }
  if (c.temperature < 0 || c.top_p <= 0 || c.top_p > 1 || c.max_new_tokens <= 0)
    throw ValidationError("decoding parameters out of range");
}

OpenAiCompatibleProvider::OpenAiCompatibleProvider(Options options)
    : options_(std::move(options)) {
  while (!options_.base_url.empty() && options_.base_url.back() == '/') options_.base_url.pop_back();
  if (options_.base_url.empty()) throw ValidationError("provider base URL is empty");
}

nlohmann::json OpenAiCompatibleProvider::request_body(const std::vector<Message>& messages,
                                                      const DecodingConfig& decoding) const {
  nlohmann::json body{{"model", options_.model},
                      {"messages", messages},
                      {"temperature", decoding.temperature},
                      {"top_p", decoding.top_p},
                      {"max_tokens", decoding.max_new_tokens},
                      {"stream", false}};
  if (decoding.seed) body["seed"] = *decoding.seed;
  for (const auto& [k, v] : options_.extra_body.items()) body[k] = v;
  return body;
}

std::string OpenAiCompatibleProvider::completion_text(const nlohmann::json& body) {
  const auto choices = body.find("choices");
  if (choices == body.end() || !choices->is_array() || choices->empty())
    throw ProviderError(ProviderError::Kind::kProtocol, false, "response has no choices");
  const auto& first = (*choices)[0];
  if (!first.is_object() || !first.contains("message") || !first["message"].is_object())
    throw ProviderError(ProviderError::Kind::kProtocol, false, "choice has no message");
  const auto& content = first["message"].find("content");
  if (content == first["message"].end() || !content->is_string())
    throw ProviderError(ProviderError::Kind::kProtocol, false, "message content is not a string");
  return content->get<std::string>();
}

Completion OpenAiCompatibleProvider::complete(const std::vector<Message>& messages,
                                              const DecodingConfig& decoding) {
  const auto scheme_end = options_.base_url.find("://");
  const auto path_start =
      options_.base_url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string origin = options_.base_url.substr(0, path_start);
  const std::string prefix =
      path_start == std::string::npos ? "" : options_.base_url.substr(path_start);

  httplib::Client client(origin);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);
  httplib::Headers headers;
  if (options_.api_key && !options_.api_key->empty())
    headers.emplace("Authorization", "Bearer " + *options_.api_key);
  for (const auto& [k, v] : options_.extra_headers) headers.emplace(k, v);

  auto result = client.Post(prefix + "/chat/completions", headers,
                            request_body(messages, decoding).dump(), "application/json");
  if (!result)
    throw ProviderError(ProviderError::Kind::kTransport, true,
                        "request failed: " + httplib::to_string(result.error()));
  if (result->status == 429 || result->status >= 500)
    throw ProviderError(ProviderError::Kind::kTransport, true,
                        "HTTP " + std::to_string(result->status));
  if (result->status >= 400)
    throw ProviderError(ProviderError::Kind::kTransport, false,
                        "HTTP " + std::to_string(result->status) + ": " + result->body.substr(0, 200));

  const auto body = nlohmann::json::parse(result->body, nullptr, false);
  if (body.is_discarded() || !body.is_object())
    throw ProviderError(ProviderError::Kind::kProtocol, false, "response body is not a JSON object");

  Completion c;
  c.text = completion_text(body);
  if (auto ms = parse_number(result->get_header_value("openai-processing-ms"))) {
    c.provider_latency_ms = *ms;
  } else if (auto s = parse_number(result->get_header_value("x-compute-time"))) {
    c.provider_latency_ms = *s * 1000.0;
  }
  return c;
}

std::chrono::milliseconds RetryPolicy::backoff(int attempt) const {
  double ms = static_cast<double>(initial_backoff.count()) * std::pow(multiplier, attempt - 1);
  ms = std::min(ms, static_cast<double>(max_backoff.count()));
  return std::chrono::milliseconds(static_cast<std::int64_t>(ms));
}

const ModelConfig& ModelsConfig::model(const std::string& id) const {
  for (const auto& m : models)
    if (m.id == id) return m;
  throw NotFoundError("unknown model id '" + id + "'");
}

ModelsConfig parse_models_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("models config must be a JSON object");
  ModelsConfig c;
  try {
    if (j.contains("decoding")) c.decoding = j.at("decoding").get<DecodingConfig>();
    if (j.contains("retry")) {
      const auto& r = j.at("retry");
      c.retry.max_retries = r.value("max_retries", c.retry.max_retries);
      c.retry.initial_backoff =
          std::chrono::milliseconds(r.value("initial_backoff_ms", c.retry.initial_backoff.count()));
      c.retry.multiplier = r.value("multiplier", c.retry.multiplier);
      c.retry.max_backoff =
          std::chrono::milliseconds(r.value("max_backoff_ms", c.retry.max_backoff.count()));
      if (c.retry.max_retries < 0 || c.retry.multiplier < 1.0)
        throw ValidationError("retry policy out of range");
    }
    c.parallel = j.value("parallel", c.parallel);
    c.token_warning = j.value("token_warning", c.token_warning);
    std::set<std::string> ids;
    std::set<std::string> slots;
    for (const auto& m : j.at("models")) {
      ModelConfig mc;
      mc.id = m.at("id").get<std::string>();
      mc.slot = m.value("slot", "");
      mc.provider = m.value("provider", mc.provider);
      mc.model = m.value("model", mc.id);
      mc.base_url = m.value("base_url", "");
      mc.api_key_env = m.value("api_key_env", "");
      mc.extra_body = m.value("extra_body", nlohmann::json::object());
      mc.requests_per_minute = m.value("requests_per_minute", 0.0);
      if (mc.id.empty()) throw ValidationError("model id must not be empty");
      if (!find_preset(mc.provider))
        throw ValidationError("model '" + mc.id + "': unknown provider '" + mc.provider + "'");
      if (mc.provider == "custom" && mc.base_url.empty())
        throw ValidationError("model '" + mc.id + "': custom provider needs base_url");
      if (!mc.extra_body.is_object())
        throw ValidationError("model '" + mc.id + "': extra_body must be an object");
      if (!ids.insert(mc.id).second) throw ValidationError("duplicate model id '" + mc.id + "'");
      if (!mc.slot.empty() && !slots.insert(mc.slot).second)
        throw ValidationError("duplicate model slot '" + mc.slot + "'");
      c.models.push_back(std::move(mc));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed models config: ") + e.what());
  }
  if (c.parallel == 0) c.parallel = 1;
  return c;
}

ModelsConfig load_models_config(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(jsonl::read_file(path), nullptr, false);
  if (j.is_discarded()) throw ValidationError(path.string() + ": not valid JSON");
  return parse_models_config(j);
}

std::unique_ptr<Provider> make_provider(const ModelConfig& model) {
  const Preset* preset = find_preset(model.provider);
  if (!preset) throw ValidationError("unknown provider '" + model.provider + "'");
  OpenAiCompatibleProvider::Options o;
  o.base_url = model.base_url.empty() ? std::string(preset->base_url) : model.base_url;
  o.model = model.model;
  o.extra_body = model.extra_body;
  const std::string env = model.api_key_env.empty() ? std::string(preset->key_env) : model.api_key_env;
  if (const char* key = std::getenv(env.c_str()); key != nullptr && *key != '\0') o.api_key = key;
  return std::make_unique<OpenAiCompatibleProvider>(std::move(o));
}

}  // namespace softid::adjudicator
