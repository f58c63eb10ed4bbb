// Acceptance gate. Runs every acceptance criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is non-zero when any
// criterion fails.
//
//   softid_acceptance <path to softid cli> <fixture dir>

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "softid/adjudicator/adjudicate.hpp"
#include "softid/consensus/proxy.hpp"
#include "softid/core/jsonl.hpp"
#include "softid/eval/bootstrap.hpp"
#include "softid/eval/metrics.hpp"
#include "softid/eval/projection.hpp"
#include "softid/harvest/conflict.hpp"
#include "support/eval_oracles.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace softid;
using namespace softid::eval;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

GoldCase gold_case(const std::string& id, Label label, Confidence c = Confidence::kHigh) {
  GoldCase g;
  g.pair_id = id;
  g.verdict.label = label;
  if (label != Label::kUnclear) g.verdict.confidence = c;
  g.verdict.explanation = "checked";
  g.rationale = "checked";
  g.annotation_seconds = 60.0;
  return g;
}

// 100 gold cases; `resolved` of them get a prediction, `correct` of those are right.
std::pair<std::vector<GoldCase>, Predictions> resolved_fixture(int resolved, int correct) {
  std::vector<GoldCase> gold;
  Predictions pred;
  for (int i = 0; i < 100; ++i) {
    const std::string id = "case-" + std::to_string(i);
    const Label l = i % 3 == 0 ? Label::kDifferent : Label::kSame;
    gold.push_back(gold_case(id, l, i % 5 == 0 ? Confidence::kLow : Confidence::kHigh));
    if (i >= resolved) {
      pred[id] = std::nullopt;
    } else if (i < correct) {
      pred[id] = l;
    } else {
      pred[id] = l == Label::kSame ? Label::kDifferent : Label::kSame;
    }
  }
  return {gold, pred};
}

Outcome metric_consistency() {
  const auto t0 = Clock::now();
  Outcome out{true, ""};
  struct Target {
    int resolved, correct;
    double expect, reported;
  };
  for (const Target& t : {Target{86, 83, 0.9651, 0.965}, Target{94, 90, 0.9574, 0.958}}) {
    const auto [gold, pred] = resolved_fixture(t.resolved, t.correct);
    const auto split = split_cases(pred, gold);
    const double acc = compute_metrics(split.resolved).accuracy;
    const auto ci = bootstrap_ci(accuracy, split.resolved, BootstrapConfig{});
    const bool ok = split.resolved.size() == std::size_t(t.resolved) && std::abs(acc - t.expect) <= 0.0005 &&
                    ci.ci_low <= acc && acc <= ci.ci_high;
    out.pass = out.pass && ok;
    out.detail += fmt("%.0f/%.0f -> %.4f", t.correct, t.resolved, acc) +
                  fmt(" [%.3f, %.3f] (reported %.3f, diff %.5f); ", ci.ci_low, ci.ci_high, t.reported,
                      std::abs(acc - t.reported));
  }
  const double secs = seconds_since(t0);
  out.pass = out.pass && secs < 1.0;
  out.detail += fmt("%.3f s", secs);
  return out;
}

Outcome unclear_class() {
  std::vector<GoldCase> gold;
  Predictions pred;
  for (int i = 0; i < 60; ++i) {
    const std::string id = "u-" + std::to_string(i);
    const Label l = i < 3 ? Label::kUnclear : (i % 2 ? Label::kSame : Label::kDifferent);
    gold.push_back(gold_case(id, l));
    // Never unclear: unclear gold becomes "same"; a few ordinary mistakes.
    Label p = l == Label::kUnclear ? Label::kSame : l;
    if (i == 10 || i == 21) p = p == Label::kSame ? Label::kDifferent : Label::kSame;
    pred[id] = p;
  }
  std::size_t unclear_gold = 0;
  for (const auto& g : gold) unclear_gold += g.verdict.label == Label::kUnclear;
  const auto m = compute_metrics(split_cases(pred, gold).resolved);
  const auto& u = m.per_class[static_cast<std::size_t>(Label::kUnclear)];
  const bool pass = unclear_gold == 3 && u.precision == 0.0 && u.recall == 0.0 && m.macro_f1 < m.accuracy;
  return {pass, fmt("unclear P=%.1f R=%.1f, accuracy %.4f > macro F1 %.4f", u.precision, u.recall, m.accuracy,
                    m.macro_f1)};
}

Outcome bootstrap_engine() {
  std::mt19937 rng(7);
  std::vector<ResolvedCase> cases;
  for (int i = 0; i < 100; ++i) {
    const Label g = static_cast<Label>(rng() % 3);
    const Label p = rng() % 5 == 0 ? static_cast<Label>(rng() % 3) : g;
    cases.push_back({"b" + std::to_string(i), g, p, i % 4 ? Difficulty::kEasy : Difficulty::kHard});
  }
  const BootstrapConfig cfg{1000, 0.95, 42};
  const std::vector<CaseMetric> metrics = {accuracy, [](const auto& c) { return compute_metrics(c).macro_f1; }};
  const auto t0 = Clock::now();
  const auto first = bootstrap_many(metrics, cases, cfg);
  const double secs = seconds_since(t0);
  const auto second = bootstrap_many(metrics, cases, cfg);
  bool identical = first.size() == second.size();
  for (std::size_t i = 0; identical && i < first.size(); ++i)
    identical = std::memcmp(&first[i].ci_low, &second[i].ci_low, sizeof(double)) == 0 &&
                std::memcmp(&first[i].ci_high, &second[i].ci_high, sizeof(double)) == 0 &&
                std::memcmp(&first[i].mean, &second[i].mean, sizeof(double)) == 0;

  std::vector<ResolvedCase> constant(100, ResolvedCase{"c", Label::kSame, Label::kSame, Difficulty::kEasy});
  const auto flat = bootstrap_ci(accuracy, constant, cfg);
  const bool degenerate = flat.defined && flat.ci_low == 1.0 && flat.ci_high == 1.0 && flat.mean == 1.0;

  return {identical && degenerate && secs < 5.0,
          std::string(identical ? "bit-identical" : "NOT identical") + ", constant CI [" +
              fmt("%.3f, %.3f], 1000 iterations x 2 metrics on 100 cases in %.3f s", flat.ci_low, flat.ci_high,
                  secs)};
}

Outcome stratified() {
  const BootstrapConfig cfg{1000, 0.95, 42};
  const auto equal = stratified_error_test(testing::strata_fixture(100, 20, 100, 20), cfg);
  const auto hard_only = stratified_error_test(testing::strata_fixture(100, 0, 20, 5), cfg);
  const bool pass = equal.p_value && std::abs(*equal.p_value - 0.5) <= 0.1 && hard_only.p_value &&
                    *hard_only.p_value < 0.05;
  return {pass, fmt("equal rates p=%.3f, hard-only errors p=%.4f", equal.p_value.value_or(-1),
                    hard_only.p_value.value_or(-1))};
}

Outcome consensus_oracle() {
  using adjudicator::AdjudicationResult;
  const std::vector<std::optional<Label>> options = {Label::kSame, Label::kDifferent, Label::kUnclear,
                                                     std::nullopt};
  std::size_t checked = 0, discrepancies = 0;
  for (std::size_t k : {2u, 3u}) {
    consensus::ProxySpec spec{"p", {}};
    for (std::size_t i = 0; i < k; ++i) spec.members.push_back("m" + std::to_string(i));
    std::size_t combos = 1;
    for (std::size_t i = 0; i < k; ++i) combos *= options.size();
    for (std::size_t code = 0; code < combos; ++code) {
      std::vector<AdjudicationResult> rs;
      std::size_t rest = code;
      bool any_skip = false;
      std::set<Label> labels;
      std::vector<Confidence> confs;
      for (std::size_t i = 0; i < k; ++i) {
        const auto& choice = options[rest % options.size()];
        rest /= options.size();
        AdjudicationResult r;
        r.pair_id = "p1";
        r.record_a = "a";
        r.record_b = "b";
        r.model_id = spec.members[i];
        const Confidence c = static_cast<Confidence>((code + i) % 3);
        if (choice) {
          r.parsed = Verdict{*choice, c, "why " + r.model_id};
          labels.insert(*choice);
          confs.push_back(c);
        } else {
          r.parsed = adjudicator::Skipped{adjudicator::SkipReason::kNoJson, "x"};
          any_skip = true;
        }
        rs.push_back(r);
      }
      const auto d = consensus::run_proxy(spec, rs);
      const bool accept = !any_skip && labels.size() == 1;
      bool ok = d.accepted() == accept;
      if (ok && accept) {
        ok = d.verdict()->label == *labels.begin() &&
             d.verdict()->confidence == *std::min_element(confs.begin(), confs.end());
      } else if (ok) {
        ok = std::get<consensus::DeferReason>(d.outcome) ==
             (any_skip ? consensus::DeferReason::kMemberSkipped : consensus::DeferReason::kDisagreement);
      }
      discrepancies += !ok;
      ++checked;
    }
  }
  return {discrepancies == 0 && checked == 80,
          std::to_string(checked) + " combinations, " + std::to_string(discrepancies) + " discrepancies"};
}

Outcome conflict_oracle() {
  std::mt19937 rng(50);
  int mismatched = 0;
  std::size_t pairs = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto corpus = testing::random_corpus(rng, 25);
    const auto out = harvest::auto_resolve(corpus);
    std::set<testing::PairTriple> got;
    for (const auto& d : out.decisions) got.emplace(d.record_a, d.record_b, "auto_same");
    for (const auto& c : out.conflicts)
      got.emplace(c.record_a.record_id, c.record_b.record_id, std::string(to_string(c.kind)));
    const auto expect = testing::brute_force_pairs(corpus);
    mismatched += got != expect;
    pairs += expect.size();
  }
  return {mismatched == 0, "50 corpora, " + std::to_string(pairs) + " oracle pairs, " +
                               std::to_string(mismatched) + " mismatching corpora"};
}

class CannedProvider : public adjudicator::Provider {
 public:
  explicit CannedProvider(std::string text) : text_(std::move(text)) {}
  adjudicator::Completion complete(const std::vector<adjudicator::Message>&,
                                   const adjudicator::DecodingConfig&) override {
    return {text_, std::nullopt};
  }

 private:
  std::string text_;
};

Outcome parser_robustness(const fs::path& fixtures) {
  int cases = 0, wrong = 0, skips = 0, raw_lost = 0;
  jsonl::for_each(fixtures / "parser_corpus.jsonl", [&](const nlohmann::json& c) {
    ++cases;
    const auto raw = c.at("raw").get<std::string>();
    CannedProvider provider(raw);
    adjudicator::PromptBundle bundle{"pair-" + std::to_string(cases), {{"user", "compare"}}, 1};
    const auto r = adjudicator::adjudicate(bundle, &provider, "m", {}, {});
    if (c.contains("expect_skip")) {
      ++skips;
      wrong += !r.skipped() || to_string(r.skip()->reason) != c["expect_skip"].get<std::string>();
      raw_lost += r.raw_output != raw;
    } else {
      wrong += r.skipped() || *r.verdict() != c["expect_verdict"].get<Verdict>();
    }
  });
  return {cases == 30 && wrong == 0 && raw_lost == 0,
          std::to_string(cases) + " cases, " + std::to_string(wrong) + " unexpected outcomes, " +
              std::to_string(skips) + " skips with " + std::to_string(raw_lost) + " raw texts lost"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome end_to_end(const fs::path& cli, const fs::path& fixtures) {
  const fs::path e2e = fixtures / "e2e";
  const fs::path root = fs::temp_directory_path() / ("softid_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::vector<std::map<std::string, std::string>> reports;
  double slowest = 0.0;
  std::string failure;
  std::size_t misses = 0, results = 0;
  for (int run = 0; run < 2 && failure.empty(); ++run) {
    const fs::path w = root / ("run" + std::to_string(run));
    fs::create_directories(w);
    const std::string c = quote(cli);
    const std::vector<std::string> steps = {
        c + " detect --corpus " + quote(e2e / "records.jsonl") + " --out " + quote(w / "pairs.jsonl") +
            " --decisions " + quote(w / "auto.jsonl"),
        c + " fetch --pairs " + quote(w / "pairs.jsonl") + " --cache " + quote(w / "content") + " --fixtures " +
            quote(e2e / "fetch_fixtures.json"),
        c + " adjudicate --pairs " + quote(w / "pairs.jsonl") + " --content " + quote(w / "content") +
            " --models " + quote(e2e / "models.json") + " --cassette " + quote(e2e / "cassettes") +
            " --mode replay --out " + quote(w / "results.jsonl"),
        c + " proxy --results " + quote(w / "results.jsonl") + " --spec " + quote(e2e / "proxies.json") +
            " --models " + quote(e2e / "models.json") + " --out " + quote(w / "decisions.jsonl"),
        c + " evaluate --gold " + quote(e2e / "gold.jsonl") + " --pred " + quote(w / "results.jsonl") +
            " --decisions " + quote(w / "decisions.jsonl") + " --spec " + quote(e2e / "proxies.json") +
            " --models " + quote(e2e / "models.json") + " --out " + quote(w / "report"),
    };
    const auto t0 = Clock::now();
    for (const auto& step : steps) {
      if (std::system((step + " > " + quote(w / "log.txt") + " 2>&1").c_str()) != 0) {
        failure = "step failed: " + step.substr(c.size() + 1, step.find(' ', c.size() + 1) - c.size() - 1);
        break;
      }
    }
    slowest = std::max(slowest, seconds_since(t0));
    if (!failure.empty()) break;
    std::map<std::string, std::string> files;
    for (const auto& e : fs::directory_iterator(w / "report")) files[e.path().filename()] = slurp(e.path());
    reports.push_back(std::move(files));
    if (run == 0) {
      jsonl::for_each(w / "results.jsonl", [&](const nlohmann::json& j) {
        ++results;
        adjudicator::AdjudicationResult r = j.get<adjudicator::AdjudicationResult>();
        misses += r.skipped() && r.skip()->reason == adjudicator::SkipReason::kCassetteMiss;
      });
    }
  }
  fs::remove_all(root);
  if (!failure.empty()) return {false, failure};
  const bool stable = reports.size() == 2 && reports[0] == reports[1] && reports[0].size() == 4;
  const bool pass = stable && misses == 0 && results > 0 && slowest < 30.0;
  return {pass, std::to_string(results) + " replayed results, " + std::to_string(misses) + " cassette misses, " +
                    std::to_string(reports.empty() ? 0 : reports[0].size()) + " report files " +
                    (stable ? "byte-identical" : "DIFFER") + " across runs, " + fmt("slowest run %.2f s", slowest)};
}

Outcome time_projection() {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> rate(1, 900);
  std::size_t checks = 0, violations = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const double h = rate(rng), m = rate(rng);
    const std::size_t k = 1 + rng() % 5;
    const auto grid = default_grid(10000, 500);
    const auto zero = project_time(h, m, 0.0, k, grid);
    const auto one = project_time(h, m, 1.0, k, grid);
    const auto mid = project_time(h, m, double(rng() % 5) / 4.0, k, grid, std::pair{h - 0.5, h + 0.5});
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double n = double(grid[j]);
      violations += zero.points[j].proxy_total != n * (double(k) * m);
      violations += one.points[j].proxy_total != n * (double(k) * m + h);
      checks += 2;
    }
    for (const auto* t : {&zero, &one, &mid}) {
      for (std::size_t j = 2; j < t->points.size(); ++j) {
        auto second = [&](double ProjectionPoint::*f) {
          return t->points[j].*f - 2 * (t->points[j - 1].*f) + t->points[j - 2].*f;
        };
        for (auto f : {&ProjectionPoint::human_total, &ProjectionPoint::human_low, &ProjectionPoint::human_high,
                       &ProjectionPoint::model_total, &ProjectionPoint::proxy_total}) {
          violations += second(f) != 0.0;
          ++checks;
        }
      }
    }
  }
  return {violations == 0, std::to_string(checks) + " exact identities, " + std::to_string(violations) +
                               " violations"};
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: softid_acceptance <softid cli> <fixture dir>\n";
    return 2;
  }
  const fs::path cli = argv[1];
  const fs::path fixtures = argv[2];

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"metric_consistency", metric_consistency},
      {"unclear_class", unclear_class},
      {"bootstrap_engine", bootstrap_engine},
      {"stratified_test", stratified},
      {"consensus_oracle", consensus_oracle},
      {"conflict_detection_oracle", conflict_oracle},
      {"parser_robustness", [&] { return parser_robustness(fixtures); }},
      {"end_to_end_replay", [&] { return end_to_end(cli, fixtures); }},
      {"time_projection", time_projection},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
