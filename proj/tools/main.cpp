#include <iostream>

#include <CLI11.hpp>

#include "softid/core/errors.hpp"
#include "softid/pipeline/commands.hpp"

namespace {

template <class T>
void optional_path(CLI::App* cmd, const std::string& flag, std::optional<T>& target, const std::string& help) {
  cmd->add_option_function<std::string>(flag, [&target](const std::string& v) { target = T(v); }, help);
}

}  // namespace

int main(int argc, char** argv) {
  using namespace softid::pipeline;
  CLI::App app{"Software metadata identity resolution pipeline"};
  app.require_subcommand(1);

  DetectArgs detect;
  auto* c_detect = app.add_subcommand("detect", "Auto-resolve safe pairs and list conflict pairs");
  c_detect->add_option("--corpus", detect.corpus, "Records JSONL")->required();
  c_detect->add_option("--out", detect.out_pairs, "Conflict pairs JSONL")->required();
  optional_path(c_detect, "--decisions", detect.out_decisions, "Auto resolution decisions JSONL");
  optional_path(c_detect, "--forges", detect.forges, "Forge host list (JSON)");

  FetchArgs fetch;
  auto* c_fetch = app.add_subcommand("fetch", "Fetch and convert the URLs of conflict pairs");
  c_fetch->add_option("--pairs", fetch.pairs, "Conflict pairs JSONL")->required();
  c_fetch->add_option("--cache", fetch.cache, "Content cache directory")->required();
  c_fetch->add_option("--parallel", fetch.parallel, "Concurrent fetches")->capture_default_str();
  c_fetch->add_option("--politeness-ms", fetch.politeness_ms, "Minimum delay between requests to one host");
  optional_path(c_fetch, "--fixtures", fetch.fixtures, "Serve responses from a fixture file instead of the network");
  optional_path(c_fetch, "--forges", fetch.forges, "Forge host list (JSON)");

  AdjudicateArgs adj;
  auto* c_adj = app.add_subcommand("adjudicate", "Ask every configured model about every pair");
  c_adj->add_option("--pairs", adj.pairs, "Conflict pairs JSONL")->required();
  c_adj->add_option("--content", adj.content, "Content cache directory")->required();
  c_adj->add_option("--models", adj.models, "Models config (JSON)")->required();
  c_adj->add_option("--out", adj.out, "Adjudication results JSONL")->required();
  optional_path(c_adj, "--cassette", adj.cassette, "Cassette directory");
  c_adj->add_option("--mode", adj.mode, "Cassette mode: off, record or replay")
      ->check(CLI::IsMember({"off", "record", "replay"}))
      ->capture_default_str();
  c_adj->add_option("--model", adj.model_ids, "Model id to run (repeatable)");
  optional_path(c_adj, "--forges", adj.forges, "Forge host list (JSON)");

  ProxyArgs proxy;
  auto* c_proxy = app.add_subcommand("proxy", "Apply agreement proxies to adjudication results");
  c_proxy->add_option("--results", proxy.results, "Adjudication results JSONL")->required();
  c_proxy->add_option("--spec", proxy.spec, "Proxy definitions (JSON)")->required();
  optional_path(c_proxy, "--models", proxy.models, "Models config, used to resolve slot: members");
  c_proxy->add_option("--out", proxy.out, "Proxy decisions JSONL")->required();

  MergeArgs merge;
  auto* c_merge = app.add_subcommand("merge", "Group records through identity decisions");
  c_merge->add_option("--corpus", merge.corpus, "Records JSONL")->required();
  c_merge->add_option("--decisions", merge.decisions, "Decision JSONL (repeatable)")->required();
  optional_path(c_merge, "--proxy", merge.proxy, "Use only this proxy's decisions");
  c_merge->add_option("--out", merge.out_groups, "Groups JSONL")->required();
  optional_path(c_merge, "--inconsistencies", merge.out_inconsistencies, "Inconsistencies JSONL");

  EvaluateArgs evaluate;
  auto* c_eval = app.add_subcommand("evaluate", "Score models and proxies against the gold standard");
  c_eval->add_option("--gold", evaluate.gold, "Gold standard JSONL")->required();
  c_eval->add_option("--pred", evaluate.results, "Adjudication results JSONL")->required();
  optional_path(c_eval, "--decisions", evaluate.decisions, "Proxy decisions JSONL");
  optional_path(c_eval, "--spec", evaluate.spec, "Proxy definitions, for time projections");
  optional_path(c_eval, "--models", evaluate.models, "Models config, used to resolve slot: members");
  c_eval->add_option("--seed", evaluate.seed, "Bootstrap seed")->capture_default_str();
  c_eval->add_option("--iterations", evaluate.iterations, "Bootstrap iterations")->capture_default_str();
  c_eval->add_option("--level", evaluate.level, "Confidence level")->capture_default_str();
  c_eval->add_option("--projection-max", evaluate.projection_max, "Largest case count in projections");
  c_eval->add_option("--projection-step", evaluate.projection_step, "Case count step in projections");
  c_eval->add_option("--out", evaluate.out, "Report directory")->required();

  auto* c_review = app.add_subcommand("review", "Human review queue");
  c_review->require_subcommand(1);

  ServeArgs serve;
  auto* c_serve = c_review->add_subcommand("serve", "Run the review HTTP API");
  c_serve->add_option("--store", serve.store, "Queue event log")->required();
  c_serve->add_option("--listen", serve.listen, "host:port")->capture_default_str();
  optional_path(c_serve, "--decisions", serve.decisions, "Append human decisions to this JSONL");
  c_serve->add_option("--token", serve.token, "Shared bearer token")->envname("SOFTID_REVIEW_TOKEN");
  c_serve->add_option("--cors-origin", serve.cors_origin, "Allowed browser origin")->capture_default_str();

  EnqueueArgs enqueue;
  auto* c_enqueue = c_review->add_subcommand("enqueue", "Queue deferred pairs for review");
  c_enqueue->add_option("--store", enqueue.store, "Queue event log")->required();
  c_enqueue->add_option("--decisions", enqueue.decisions, "Proxy decisions JSONL")->required();
  c_enqueue->add_option("--pairs", enqueue.pairs, "Conflict pairs JSONL")->required();
  optional_path(c_enqueue, "--proxy", enqueue.proxy, "Only this proxy's deferrals");
  optional_path(c_enqueue, "--content", enqueue.content, "Content cache directory");
  optional_path(c_enqueue, "--results", enqueue.results, "Adjudication results JSONL");
  optional_path(c_enqueue, "--forges", enqueue.forges, "Forge host list (JSON)");

  std::string store_path, out_path;
  auto* c_export = c_review->add_subcommand("export-gold", "Write resolved items as gold JSONL");
  c_export->add_option("--store", store_path, "Queue event log")->required();
  c_export->add_option("--out", out_path, "Gold JSONL")->required();
  auto* c_decisions = c_review->add_subcommand("decisions", "Write human decisions as JSONL");
  c_decisions->add_option("--store", store_path, "Queue event log")->required();
  c_decisions->add_option("--out", out_path, "Decisions JSONL")->required();
  auto* c_compact = c_review->add_subcommand("compact", "Rewrite the event log as one snapshot per item");
  c_compact->add_option("--store", store_path, "Queue event log")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*c_detect) run_detect(detect, std::cout);
    if (*c_fetch) run_fetch(fetch, std::cout);
    if (*c_adj) run_adjudicate(adj, std::cout);
    if (*c_proxy) run_proxy(proxy, std::cout);
    if (*c_merge) run_merge(merge, std::cout);
    if (*c_eval) run_evaluate(evaluate, std::cout);
    if (*c_serve) run_serve(serve, std::cout);
    if (*c_enqueue) run_enqueue(enqueue, std::cout);
    if (*c_export) run_export_gold(store_path, out_path, std::cout);
    if (*c_decisions) run_export_decisions(store_path, out_path, std::cout);
    if (*c_compact) run_compact(store_path, std::cout);
  } catch (const softid::ValidationError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const softid::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
