#include "softid/adjudicator/adjudicate.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace softid::adjudicator {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

// Spaces calls per key by a minimum interval.
class RateLimiter {
 public:
  explicit RateLimiter(const std::map<std::string, double>& rpm) {
    for (const auto& [k, v] : rpm)
      if (v > 0) interval_[k] = std::chrono::duration<double, std::milli>(60000.0 / v);
  }

  void acquire(const std::string& key) {
    auto it = interval_.find(key);
    if (it == interval_.end()) return;
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard lock(mutex_);
      auto now = std::chrono::steady_clock::now();
      auto& next = next_[key];
      slot = std::max(now, next);
      next = slot + std::chrono::duration_cast<std::chrono::steady_clock::duration>(it->second);
    }
    std::this_thread::sleep_until(slot);
  }

 private:
  std::map<std::string, std::chrono::duration<double, std::milli>> interval_;
  std::mutex mutex_;
  std::map<std::string, std::chrono::steady_clock::time_point> next_;
};

AdjudicationResult from_completion(AdjudicationResult r, const std::string& text, double total_ms,
                                   std::optional<double> provider_ms) {
  r.raw_output = text;
  r.latency_total_ms = total_ms;
  if (provider_ms) r.latency_provider_ms = std::min(*provider_ms, total_ms);
  r.parsed = parse_response(text);
  return r;
}

}  // namespace

void to_json(nlohmann::json& j, const AdjudicationResult& r) {
  j = nlohmann::json{{"schema", kSchemaVersion},
                     {"pair_id", r.pair_id},
                     {"record_a", r.record_a},
                     {"record_b", r.record_b},
                     {"model_id", r.model_id},
                     {"raw_output", r.raw_output},
                     {"latency_total_ms", r.latency_total_ms},
                     {"retries", r.retries},
                     {"prompt_sha256", r.prompt_sha256}};
  j["latency_provider_ms"] =
      r.latency_provider_ms ? nlohmann::json(*r.latency_provider_ms) : nlohmann::json(nullptr);
  if (const auto* v = r.verdict()) {
    j["verdict"] = *v;
    j["skipped"] = nullptr;
  } else {
    j["verdict"] = nullptr;
    j["skipped"] = {{"reason", to_string(r.skip()->reason)}, {"detail", r.skip()->detail}};
  }
}

void from_json(const nlohmann::json& j, AdjudicationResult& r) {
  check_schema(j);
  try {
    r.pair_id = j.at("pair_id").get<std::string>();
    r.record_a = j.value("record_a", "");
    r.record_b = j.value("record_b", "");
    r.model_id = j.at("model_id").get<std::string>();
    r.raw_output = j.at("raw_output").get<std::string>();
    r.latency_total_ms = j.at("latency_total_ms").get<double>();
    r.latency_provider_ms.reset();
    if (auto it = j.find("latency_provider_ms"); it != j.end() && !it->is_null())
      r.latency_provider_ms = it->get<double>();
    r.retries = j.value("retries", 0);
    r.prompt_sha256 = j.value("prompt_sha256", "");
    const auto& verdict = j.at("verdict");
    if (!verdict.is_null()) {
      r.parsed = verdict.get<Verdict>();
    } else {
      const auto& s = j.at("skipped");
      auto reason = parse_skip_reason(s.at("reason").get<std::string>());
      if (!reason) throw ValidationError("unknown skip reason " + s.at("reason").dump());
      r.parsed = Skipped{*reason, s.value("detail", "")};
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed adjudication result: ") + e.what());
  }
  if (r.latency_provider_ms && *r.latency_provider_ms > r.latency_total_ms)
    throw ValidationError("result for '" + r.pair_id + "': provider latency exceeds total latency");
}

std::optional<CassetteMode> parse_cassette_mode(std::string_view text) {
  if (text == "off") return CassetteMode::kOff;
  if (text == "record") return CassetteMode::kRecord;
  if (text == "replay") return CassetteMode::kReplay;
  return std::nullopt;
}

AdjudicationResult adjudicate(const PromptBundle& bundle, Provider* provider,
                              const std::string& model_id, const DecodingConfig& config,
                              const AdjudicateOptions& options) {
  AdjudicationResult r;
  r.pair_id = bundle.pair_id;
  r.model_id = model_id;
  r.prompt_sha256 = prompt_hash(bundle.messages);
  const std::string key = cassette_key(bundle.pair_id, model_id, r.prompt_sha256);

  if (options.mode == CassetteMode::kReplay) {
    const auto entry = options.cassette ? options.cassette->find(key) : std::nullopt;
    if (!entry) {
      r.parsed = Skipped{SkipReason::kCassetteMiss, "no recorded exchange for key " + key};
      return r;
    }
    return from_completion(std::move(r), entry->response_text, entry->latency_ms,
                           entry->provider_latency_ms);
  }

  if (provider == nullptr) {
    r.parsed = Skipped{SkipReason::kTransport, "no provider configured for model " + model_id};
    return r;
  }

  const auto start = std::chrono::steady_clock::now();
  for (int attempt = 0;; ++attempt) {
    try {
      Completion c = provider->complete(bundle.messages, config);
      double total = elapsed_ms(start);
      r.retries = attempt;
      if (options.mode == CassetteMode::kRecord && options.cassette) {
        options.cassette->append(
            model_id, CassetteEntry{key, bundle.messages, c.text, total, c.provider_latency_ms});
      }
      return from_completion(std::move(r), c.text, total, c.provider_latency_ms);
    } catch (const ProviderError& e) {
      if (e.kind() == ProviderError::Kind::kProtocol) {
        r.retries = attempt;
        r.latency_total_ms = elapsed_ms(start);
        r.parsed = Skipped{SkipReason::kProtocol, e.what()};
        return r;
      }
      if (!e.retryable() || attempt >= options.retry.max_retries) {
        r.retries = attempt;
        r.latency_total_ms = elapsed_ms(start);
        r.parsed = Skipped{SkipReason::kTransport, e.what()};
        return r;
      }
    } catch (const std::exception& e) {
      r.retries = attempt;
      r.latency_total_ms = elapsed_ms(start);
      r.parsed = Skipped{SkipReason::kProtocol, e.what()};
      return r;
    }
    const auto delay = options.retry.backoff(attempt + 1);
    if (options.sleep) {
      options.sleep(delay);
    } else {
      std::this_thread::sleep_for(delay);
    }
  }
}

std::vector<AdjudicationResult> adjudicate_all(const std::vector<ConflictPair>& pairs,
                                               const ContentMap& contents,
                                               const std::vector<std::string>& model_ids,
                                               const std::map<std::string, Provider*>& providers,
                                               const DecodingConfig& decoding,
                                               const BatchOptions& options) {
  std::vector<PromptBundle> bundles;
  bundles.reserve(pairs.size());
  for (const auto& p : pairs) {
    bundles.push_back(build_prompt(p, contents, options.forges));
    if (bundles.back().token_estimate > options.token_warning && options.warn) {
      options.warn("prompt for " + p.pair_id + " is estimated at " +
                   std::to_string(bundles.back().token_estimate) + " tokens");
    }
  }

  const std::size_t n_models = model_ids.size();
  std::vector<AdjudicationResult> results(pairs.size() * n_models);
  std::atomic<std::size_t> next{0};
  RateLimiter limiter(options.requests_per_minute);

  auto worker = [&] {
    for (std::size_t t = next++; t < results.size(); t = next++) {
      const std::size_t pi = t / n_models;
      const std::string& model_id = model_ids[t % n_models];
      auto it = providers.find(model_id);
      Provider* provider = it == providers.end() ? nullptr : it->second;
      if (options.adjudicate.mode != CassetteMode::kReplay) limiter.acquire(model_id);
      AdjudicationResult r = adjudicate(bundles[pi], provider, model_id, decoding, options.adjudicate);
      r.record_a = pairs[pi].record_a.record_id;
      r.record_b = pairs[pi].record_b.record_id;
      results[t] = std::move(r);
    }
  };
  const std::size_t threads =
      std::max<std::size_t>(1, std::min(options.parallel, results.size()));
  std::vector<std::thread> pool;
  for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return results;
}

}  // namespace softid::adjudicator
