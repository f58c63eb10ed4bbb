#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "softid/adjudicator/adjudicate.hpp"
#include "softid/core/jsonl.hpp"
#include "softid/harvest/conflict.hpp"
#include "support/oracles.hpp"

namespace softid::adjudicator {
namespace {

SoftwareMetadataRecord rec(std::string id, std::string name, std::vector<std::string> web,
                           std::vector<std::string> repo = {}) {
  SoftwareMetadataRecord r;
  r.record_id = std::move(id);
  r.source = "registry";
  r.name = std::move(name);
  r.webpage_urls = std::move(web);
  r.repository_urls = std::move(repo);
  return r;
}

ConflictPair sample_pair() {
  ConflictPair p;
  p.record_a = rec("biotools:diamond", "DIAMOND", {"https://diamond.example.org"});
  p.record_a.description = "Protein aligner";
  p.record_b = rec("bioconda:diamond", "diamond", {}, {"https://github.com/bbuchfink/diamond"});
  p.pair_id = harvest::make_pair_id(p.record_a.record_id, p.record_b.record_id);
  return p;
}

content::UrlContent ok_content(const std::string& url, const std::string& md) {
  content::UrlContent c;
  c.url = normalize_url(url);
  c.markdown = md;
  c.fetch_status = content::FetchStatus::ok();
  return c;
}

content::UrlContent failed_content(const std::string& url, content::FetchStatus status) {
  content::UrlContent c;
  c.url = normalize_url(url);
  c.fetch_status = status;
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() /
             ("softid_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Scripted provider: each call pops the next action.
class ScriptedProvider : public Provider {
 public:
  struct Step {
    std::optional<std::string> text;
    std::optional<ProviderError> error;
    std::optional<double> provider_ms;
  };
  explicit ScriptedProvider(std::vector<Step> steps) : steps_(std::move(steps)) {}

  Completion complete(const std::vector<Message>&, const DecodingConfig&) override {
    const std::size_t i = calls_++;
    const Step& s = steps_.at(std::min(i, steps_.size() - 1));
    std::this_thread::sleep_for(std::chrono::microseconds(200));
    if (s.error) throw *s.error;
    return Completion{*s.text, s.provider_ms};
  }
  std::size_t calls() const { return calls_; }

 private:
  std::vector<Step> steps_;
  std::atomic<std::size_t> calls_{0};
};

ProviderError timeout_error() {
  return ProviderError(ProviderError::Kind::kTransport, true, "timeout");
}

const std::string kValid = R"({"verdict":"same","confidence":"high","explanation":"Same repo."})";

// ---------------------------------------------------------------------------
// Prompt
// ---------------------------------------------------------------------------

TEST(BuildPrompt, SixUserMessagesInFixedOrder) {
  const auto pair = sample_pair();
  ContentMap contents;
  contents.emplace("diamond.example.org", ok_content("https://diamond.example.org", "# DIAMOND"));
  contents.emplace("github.com/bbuchfink/diamond",
                   ok_content("https://github.com/bbuchfink/diamond", "Fast aligner README"));
  const auto b = build_prompt(pair, contents);
  ASSERT_EQ(b.messages.size(), kPromptMessageCount);
  for (const auto& m : b.messages) EXPECT_EQ(m.role, "user");
  EXPECT_EQ(b.messages[0].content, kTaskInstruction);
  EXPECT_NE(b.messages[1].content.find("```json\n"), std::string::npos);
  EXPECT_NE(b.messages[1].content.find("\"biotools:diamond\""), std::string::npos);
  EXPECT_NE(b.messages[2].content.find("\"bioconda:diamond\""), std::string::npos);
  EXPECT_NE(b.messages[3].content.find("# DIAMOND"), std::string::npos);
  EXPECT_NE(b.messages[4].content.find("Fast aligner README"), std::string::npos);
  EXPECT_EQ(b.messages[5].content, kFinalInstruction);
  EXPECT_EQ(b.pair_id, pair.pair_id);
}

TEST(BuildPrompt, MetadataIsFencedJson) {
  const auto b = build_prompt(sample_pair(), {});
  const auto& m = b.messages[1].content;
  const auto open = m.find("```json\n");
  const auto close = m.rfind("\n```");
  ASSERT_NE(open, std::string::npos);
  ASSERT_GT(close, open);
  const auto body = nlohmann::json::parse(m.substr(open + 8, close - open - 8));
  EXPECT_EQ(body.at("name"), "DIAMOND");
  EXPECT_EQ(body.at("description"), "Protein aligner");
}

TEST(BuildPrompt, FailedFetchesAreStated) {
  const auto pair = sample_pair();
  ContentMap contents;
  contents.emplace("diamond.example.org", failed_content("https://diamond.example.org",
                                                         content::FetchStatus::http_error(404)));
  contents.emplace("github.com/bbuchfink/diamond",
                   failed_content("https://github.com/bbuchfink/diamond",
                                  content::FetchStatus::unreachable()));
  const auto b = build_prompt(pair, contents);
  ASSERT_EQ(b.messages.size(), 6u);
  EXPECT_NE(b.messages[3].content.find("http_error(404)"), std::string::npos);
  EXPECT_NE(b.messages[4].content.find("unreachable"), std::string::npos);
}

TEST(BuildPrompt, RecordWithoutUrlsIsStated) {
  auto pair = sample_pair();
  pair.record_b.repository_urls.clear();
  const auto b = build_prompt(pair, {});
  EXPECT_NE(b.messages[4].content.find("lists no URLs"), std::string::npos);
  EXPECT_NE(b.messages[3].content.find("was not fetched"), std::string::npos);
}

TEST(BuildPrompt, SeveralUrlsConcatenateInRecordOrder) {
  auto pair = sample_pair();
  pair.record_a.webpage_urls = {"https://b.example.org", "https://a.example.org"};
  pair.record_a.repository_urls = {"https://gitlab.com/x/diamond"};
  ContentMap contents;
  for (const char* u : {"https://a.example.org", "https://b.example.org", "https://gitlab.com/x/diamond"})
    contents.emplace(normalize_url(u).canonical, ok_content(u, std::string("content of ") + u));
  const auto& m = build_prompt(pair, contents).messages[3].content;
  const auto repo = m.find("content of https://gitlab.com");
  const auto b = m.find("content of https://b.");
  const auto a = m.find("content of https://a.");
  ASSERT_NE(a, std::string::npos);
  EXPECT_LT(repo, b);
  EXPECT_LT(b, a);
}

TEST(BuildPrompt, InstructionContract) {
  EXPECT_NE(std::string(kTaskInstruction).find("name similarity alone is not a reliable resolution signal"),
            std::string::npos);
  for (const char* key : {"\"verdict\"", "\"confidence\"", "\"explanation\""}) {
    EXPECT_NE(kTaskInstruction.find(key), std::string_view::npos);
    EXPECT_NE(kFinalInstruction.find(key), std::string_view::npos);
  }
  // No concrete example answer anywhere in the fixed text.
  for (auto text : {kTaskInstruction, kFinalInstruction}) {
    EXPECT_FALSE(adjudicator::find_first_json_object(text).has_value());
    EXPECT_EQ(text.find("{"), std::string_view::npos);
  }
}

TEST(BuildPrompt, TemplateIsRecordedInDocs) {
  const auto doc = jsonl::read_file(std::filesystem::path(SOFTID_SOURCE_DIR) / "docs" / "prompt_template.md");
  EXPECT_NE(doc.find(kTaskInstruction), std::string::npos);
  EXPECT_NE(doc.find(kFinalInstruction), std::string::npos);
}

TEST(BuildPrompt, DeterministicAndTokenEstimate) {
  const auto a = build_prompt(sample_pair(), {});
  const auto b = build_prompt(sample_pair(), {});
  EXPECT_EQ(a, b);
  EXPECT_EQ(prompt_hash(a.messages), prompt_hash(b.messages));
  std::size_t chars = 0;
  for (const auto& m : a.messages) chars += m.content.size();
  EXPECT_EQ(a.token_estimate, chars / 4);
}

TEST(BuildPrompt, InvalidPairIsRejected) {
  auto pair = sample_pair();
  pair.record_b.record_id.clear();
  EXPECT_THROW(build_prompt(pair, {}), ValidationError);
}

// ---------------------------------------------------------------------------
// Response parsing
// ---------------------------------------------------------------------------

TEST(ParseResponse, Examples) {
  auto v = std::get<Verdict>(parse_response(kValid));
  EXPECT_EQ(v, (Verdict{Label::kSame, Confidence::kHigh, "Same repo."}));
  auto w = std::get<Verdict>(parse_response(
      R"(Sure! Here is my answer: {"verdict":"Different","confidence":"low","explanation":"URLs differ."})"));
  EXPECT_EQ(w, (Verdict{Label::kDifferent, Confidence::kLow, "URLs differ."}));
  EXPECT_EQ(std::get<Skipped>(parse_response(R"({"verdict":"maybe","confidence":"high","explanation":"?"})")).reason,
            SkipReason::kBadLabel);
  EXPECT_EQ(std::get<Skipped>(parse_response("no json here")).reason, SkipReason::kNoJson);
}

TEST(ParseResponse, MalformedCorpusMatchesExpectations) {
  int n = 0;
  jsonl::for_each(std::filesystem::path(SOFTID_FIXTURE_DIR) / "parser_corpus.jsonl",
                  [&](const nlohmann::json& c) {
                    ++n;
                    const auto raw = c.at("raw").get<std::string>();
                    const auto out = parse_response(raw);
                    if (c.contains("expect_skip")) {
                      ASSERT_TRUE(std::holds_alternative<Skipped>(out)) << "case " << c["case"];
                      EXPECT_EQ(to_string(std::get<Skipped>(out).reason), c["expect_skip"].get<std::string>())
                          << "case " << c["case"];
                    } else {
                      ASSERT_TRUE(std::holds_alternative<Verdict>(out)) << "case " << c["case"];
                      EXPECT_EQ(std::get<Verdict>(out), c["expect_verdict"].get<Verdict>()) << "case " << c["case"];
                    }
                  });
  EXPECT_EQ(n, 30);
}

std::string random_response(std::mt19937& rng) {
  static const std::vector<std::string> kPieces = {
      "Sure, here it is: ", "{", "}", "\"", "\\", ":", ",", "```json\n", "\n```", "prose ",
      R"("verdict")", R"("Verdict")", R"("confidence")", R"("explanation")", R"("same")",
      R"(" DIFFERENT ")", R"("unclear")", R"("maybe")", R"("high")", R"("Low")", R"("medium")",
      R"("very")", R"("reason {with} braces")", R"("  ")", "null", "1", "[", "]", " "};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::string out;
  if (pick(2) == 0) {
    // Mostly well-formed object with random field choices.
    std::vector<std::string> fields;
    const std::vector<std::string> labels = {R"("same")", R"("Different")", R"(" unclear ")", R"("maybe")", "3"};
    const std::vector<std::string> confs = {R"("low")", R"("HIGH")", R"("medium")", R"("sure")", "null"};
    const std::vector<std::string> expls = {R"("ok")", R"("")", R"("a } b")", "42", R"("x \" y")"};
    if (pick(5)) fields.push_back(R"("verdict":)" + labels[pick(labels.size())]);
    if (pick(5)) fields.push_back(R"("confidence":)" + confs[pick(confs.size())]);
    if (pick(5)) fields.push_back(R"("explanation":)" + expls[pick(expls.size())]);
    if (pick(3) == 0) fields.push_back(R"("extra":{"k":[1,2]})");
    std::shuffle(fields.begin(), fields.end(), rng);
    out = kPieces[pick(kPieces.size())] + "{";
    for (std::size_t i = 0; i < fields.size(); ++i) out += (i ? "," : "") + fields[i];
    out += "}";
    if (pick(4) == 0) out.resize(pick(out.size() + 1));  // truncate
    if (pick(3) == 0) out += " trailing " + kPieces[pick(kPieces.size())];
  } else {
    const std::size_t n = pick(25);
    for (std::size_t i = 0; i < n; ++i) out += kPieces[pick(kPieces.size())];
  }
  return out;
}

TEST(ParseResponseProperty, AgreesWithBruteForceOracle) {
  std::mt19937 rng(2024);
  for (int i = 0; i < 3000; ++i) {
    const std::string raw = random_response(rng);
    const auto expected = softid::testing::oracle_parse(raw);
    const auto got = parse_response(raw);
    if (expected.skip.empty()) {
      ASSERT_TRUE(std::holds_alternative<Verdict>(got)) << raw;
      const auto& v = std::get<Verdict>(got);
      EXPECT_EQ(to_string(v.label), expected.label) << raw;
      EXPECT_EQ(to_string(*v.confidence), expected.confidence) << raw;
      EXPECT_EQ(v.explanation, expected.explanation) << raw;
    } else {
      ASSERT_TRUE(std::holds_alternative<Skipped>(got)) << raw;
      EXPECT_EQ(to_string(std::get<Skipped>(got).reason), expected.skip) << raw;
    }
  }
}

TEST(ParseResponseProperty, RoundTripsEveryVerdict) {
  std::mt19937 rng(5);
  const std::vector<std::string> texts = {"x", "Same repo.", "quote \" and {brace}", "naïve\nline"};
  for (Label l : kAllLabels)
    for (Confidence c : {Confidence::kLow, Confidence::kMedium, Confidence::kHigh})
      for (const auto& t : texts) {
        Verdict v{l, c, t};
        EXPECT_EQ(std::get<Verdict>(parse_response(serialize_verdict(v))), v);
      }
}

TEST(ParseResponseProperty, TotalOnArbitraryBytes) {
  std::mt19937 rng(99);
  for (int i = 0; i < 2000; ++i) {
    std::string raw(std::uniform_int_distribution<int>(0, 64)(rng), '\0');
    for (auto& ch : raw) ch = static_cast<char>(std::uniform_int_distribution<int>(0, 255)(rng));
    const auto out = parse_response(raw);
    EXPECT_TRUE(std::holds_alternative<Verdict>(out) || std::holds_alternative<Skipped>(out));
  }
}

// ---------------------------------------------------------------------------
// Adjudicate
// ---------------------------------------------------------------------------

TEST(Adjudicate, HappyPathParsesAndTimes) {
  ScriptedProvider p({{kValid, std::nullopt, std::nullopt}});
  const auto r = adjudicate(build_prompt(sample_pair(), {}), &p, "m1", DecodingConfig{}, {});
  ASSERT_NE(r.verdict(), nullptr);
  EXPECT_EQ(r.verdict()->label, Label::kSame);
  EXPECT_GT(r.latency_total_ms, 0.0);
  EXPECT_EQ(r.retries, 0);
  EXPECT_EQ(r.raw_output, kValid);
}

TEST(Adjudicate, RetriesTransportFailuresWithBackoff) {
  ScriptedProvider p({{std::nullopt, timeout_error(), std::nullopt},
                      {std::nullopt, timeout_error(), std::nullopt},
                      {kValid, std::nullopt, 1e9}});
  std::vector<std::chrono::milliseconds> sleeps;
  AdjudicateOptions o;
  o.sleep = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };
  const auto r = adjudicate(build_prompt(sample_pair(), {}), &p, "m1", DecodingConfig{}, o);
  EXPECT_EQ(p.calls(), 3u);
  EXPECT_EQ(r.retries, 2);
  ASSERT_NE(r.verdict(), nullptr);
  EXPECT_EQ(sleeps, (std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(500),
                                                            std::chrono::milliseconds(1000)}));
  ASSERT_TRUE(r.latency_provider_ms);
  EXPECT_LE(*r.latency_provider_ms, r.latency_total_ms);
}

TEST(Adjudicate, ExhaustedRetriesBecomeTransportSkip) {
  ScriptedProvider p({{std::nullopt, timeout_error(), std::nullopt}});
  AdjudicateOptions o;
  o.retry.max_retries = 2;
  o.sleep = [](std::chrono::milliseconds) {};
  const auto r = adjudicate(build_prompt(sample_pair(), {}), &p, "m1", DecodingConfig{}, o);
  EXPECT_EQ(p.calls(), 3u);
  ASSERT_TRUE(r.skipped());
  EXPECT_EQ(r.skip()->reason, SkipReason::kTransport);
  EXPECT_FALSE(r.skip()->detail.empty());
}

TEST(Adjudicate, ProtocolErrorsAreNotRetried) {
  ScriptedProvider p({{std::nullopt, ProviderError(ProviderError::Kind::kProtocol, false, "bad"), std::nullopt}});
  const auto r = adjudicate(build_prompt(sample_pair(), {}), &p, "m1", DecodingConfig{}, {});
  EXPECT_EQ(p.calls(), 1u);
  EXPECT_EQ(r.skip()->reason, SkipReason::kProtocol);
}

TEST(Adjudicate, ProseWithoutJsonIsSkippedWithRawRetained) {
  ScriptedProvider p({{"I believe these are the same tool.", std::nullopt, std::nullopt}});
  const auto r = adjudicate(build_prompt(sample_pair(), {}), &p, "m1", DecodingConfig{}, {});
  ASSERT_TRUE(r.skipped());
  EXPECT_EQ(r.skip()->reason, SkipReason::kNoJson);
  EXPECT_EQ(r.raw_output, "I believe these are the same tool.");
}

TEST(Adjudicate, RecordThenReplayIsIdentical) {
  const auto dir = temp_dir("cassette");
  const auto bundle = build_prompt(sample_pair(), {});
  AdjudicationResult recorded;
  {
    CassetteStore store(dir);
    ScriptedProvider p({{kValid, std::nullopt, 0.5}});
    AdjudicateOptions o;
    o.cassette = &store;
    o.mode = CassetteMode::kRecord;
    recorded = adjudicate(bundle, &p, "model/a", DecodingConfig{}, o);
  }
  CassetteStore reloaded(dir);
  EXPECT_EQ(reloaded.size(), 1u);
  AdjudicateOptions o;
  o.cassette = &reloaded;
  o.mode = CassetteMode::kReplay;
  const auto replayed = adjudicate(bundle, nullptr, "model/a", DecodingConfig{}, o);
  EXPECT_EQ(replayed, recorded);
  const auto again = adjudicate(bundle, nullptr, "model/a", DecodingConfig{}, o);
  EXPECT_EQ(nlohmann::json(again).dump(), nlohmann::json(replayed).dump());

  const auto miss = adjudicate(bundle, nullptr, "model/b", DecodingConfig{}, o);
  EXPECT_EQ(miss.skip()->reason, SkipReason::kCassetteMiss);
  std::filesystem::remove_all(dir);
}

TEST(AdjudicationResultJson, RoundTrips) {
  ScriptedProvider p({{"garbage", std::nullopt, 3.0}});
  auto r = adjudicate(build_prompt(sample_pair(), {}), &p, "m", DecodingConfig{}, {});
  r.record_a = "a";
  r.record_b = "b";
  EXPECT_EQ(nlohmann::json(r).get<AdjudicationResult>(), r);
  ScriptedProvider q({{kValid, std::nullopt, std::nullopt}});
  auto s = adjudicate(build_prompt(sample_pair(), {}), &q, "m", DecodingConfig{}, {});
  EXPECT_EQ(nlohmann::json(s).get<AdjudicationResult>(), s);
}

TEST(AdjudicateAll, OrdersResultsByPairThenModel) {
  std::vector<ConflictPair> pairs;
  for (int i = 0; i < 5; ++i) {
    ConflictPair p = sample_pair();
    p.record_a.record_id = "a" + std::to_string(i);
    p.pair_id = "pair" + std::to_string(i);
    pairs.push_back(p);
  }
  ScriptedProvider p1({{kValid, std::nullopt, std::nullopt}});
  ScriptedProvider p2({{"nope", std::nullopt, std::nullopt}});
  BatchOptions o;
  o.parallel = 3;
  std::vector<std::string> warnings;
  o.token_warning = 10;
  std::mutex m;
  o.warn = [&](const std::string& w) {
    std::lock_guard lock(m);
    warnings.push_back(w);
  };
  const auto results = adjudicate_all(pairs, {}, {"m1", "m2"}, {{"m1", &p1}, {"m2", &p2}},
                                      DecodingConfig{}, o);
  ASSERT_EQ(results.size(), 10u);
  for (std::size_t i = 0; i < results.size(); ++i) {
    EXPECT_EQ(results[i].pair_id, pairs[i / 2].pair_id);
    EXPECT_EQ(results[i].model_id, i % 2 ? "m2" : "m1");
    EXPECT_EQ(results[i].record_a, pairs[i / 2].record_a.record_id);
  }
  EXPECT_EQ(warnings.size(), 5u);
}

// ---------------------------------------------------------------------------
// Provider over HTTP
// ---------------------------------------------------------------------------

class LocalServer {
 public:
  explicit LocalServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server_.Post("/v1/chat/completions", handler);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  std::string base() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(OpenAiProvider, SendsDecodingParametersAndReadsLatency) {
  nlohmann::json seen;
  std::string auth;
  LocalServer server([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_header("openai-processing-ms", "42");
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"hello"}}]})",
                    "application/json");
  });
  OpenAiCompatibleProvider::Options o;
  o.base_url = server.base();
  o.model = "org/model";
  o.api_key = "secret";
  o.extra_body = {{"provider", {{"order", {"x"}}}}};
  OpenAiCompatibleProvider p(o);
  const auto c = p.complete({Message{"user", "hi"}}, DecodingConfig{});
  EXPECT_EQ(c.text, "hello");
  EXPECT_EQ(c.provider_latency_ms, 42.0);
  EXPECT_EQ(auth, "Bearer secret");
  EXPECT_EQ(seen["model"], "org/model");
  EXPECT_DOUBLE_EQ(seen["temperature"].get<double>(), 0.2);
  EXPECT_DOUBLE_EQ(seen["top_p"].get<double>(), 0.95);
  EXPECT_EQ(seen["max_tokens"], 512);
  EXPECT_EQ(seen["seed"], kDefaultSeed);
  EXPECT_EQ(seen["messages"][0]["role"], "user");
  EXPECT_EQ(seen["provider"]["order"][0], "x");
}

TEST(OpenAiProvider, ErrorClassification) {
  int status = 503;
  std::string body = "{}";
  LocalServer server([&](const httplib::Request&, httplib::Response& res) {
    res.status = status;
    res.set_content(body, "application/json");
  });
  OpenAiCompatibleProvider::Options o;
  o.base_url = server.base();
  o.model = "m";
  OpenAiCompatibleProvider p(o);
  auto kind_of = [&]() -> std::pair<ProviderError::Kind, bool> {
    try {
      p.complete({Message{"user", "x"}}, DecodingConfig{});
    } catch (const ProviderError& e) {
      return {e.kind(), e.retryable()};
    }
    ADD_FAILURE() << "no error";
    return {};
  };
  EXPECT_EQ(kind_of(), std::make_pair(ProviderError::Kind::kTransport, true));
  status = 429;
  EXPECT_EQ(kind_of(), std::make_pair(ProviderError::Kind::kTransport, true));
  status = 401;
  EXPECT_EQ(kind_of(), std::make_pair(ProviderError::Kind::kTransport, false));
  status = 200;
  body = "not json";
  EXPECT_EQ(kind_of(), std::make_pair(ProviderError::Kind::kProtocol, false));
  body = R"({"choices":[]})";
  EXPECT_EQ(kind_of(), std::make_pair(ProviderError::Kind::kProtocol, false));
}

TEST(OpenAiProvider, UnreachableHostIsRetryableTransport) {
  OpenAiCompatibleProvider::Options o;
  o.base_url = "http://127.0.0.1:1/v1";
  o.model = "m";
  o.timeout = std::chrono::seconds(2);
  OpenAiCompatibleProvider p(o);
  try {
    p.complete({Message{"user", "x"}}, DecodingConfig{});
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderError::Kind::kTransport);
    EXPECT_TRUE(e.retryable());
  }
}

TEST(ModelsConfigTest, ParsesAndValidates) {
  const auto c = parse_models_config(nlohmann::json::parse(R"({
    "decoding": {"temperature": 0.0, "seed": null},
    "retry": {"max_retries": 1},
    "models": [
      {"id": "a", "slot": "large-dense", "provider": "openrouter", "model": "x/a"},
      {"id": "b", "slot": "small-smoe", "provider": "custom", "base_url": "http://localhost:8000/v1"}
    ]})"));
  EXPECT_EQ(c.decoding.temperature, 0.0);
  EXPECT_FALSE(c.decoding.seed);
  EXPECT_EQ(c.decoding.top_p, 0.95);
  EXPECT_EQ(c.retry.max_retries, 1);
  EXPECT_EQ(c.model("b").model, "b");
  EXPECT_THROW(c.model("zzz"), NotFoundError);
  EXPECT_THROW(parse_models_config(nlohmann::json::parse(
                   R"({"models":[{"id":"a","provider":"nope"}]})")),
               ValidationError);
  EXPECT_THROW(parse_models_config(nlohmann::json::parse(
                   R"({"models":[{"id":"a"},{"id":"a"}]})")),
               ValidationError);
}

TEST(DecodingConfigTest, Defaults) {
  DecodingConfig d;
  EXPECT_EQ(d.temperature, 0.2);
  EXPECT_EQ(d.top_p, 0.95);
  EXPECT_EQ(d.max_new_tokens, 512);
  EXPECT_EQ(d.seed, kDefaultSeed);
}

}  // namespace
}  // namespace softid::adjudicator
