#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace softid::pipeline {

namespace fs = std::filesystem;

// File-level steps behind the command line tool. Each reads its inputs,
// writes its outputs and prints a short summary to `log`.

struct DetectArgs {
  fs::path corpus;
  fs::path out_pairs;
  std::optional<fs::path> out_decisions;
  std::optional<fs::path> forges;
};
void run_detect(const DetectArgs& args, std::ostream& log);

struct FetchArgs {
  fs::path pairs;
  fs::path cache;
  std::size_t parallel = 8;
  int politeness_ms = 0;
  /// Offline fetcher backed by a fixture file instead of the network.
  std::optional<fs::path> fixtures;
  std::optional<fs::path> forges;
};
void run_fetch(const FetchArgs& args, std::ostream& log);

struct AdjudicateArgs {
  fs::path pairs;
  fs::path content;
  fs::path models;
  fs::path out;
  std::optional<fs::path> cassette;
  /// "off", "record" or "replay".
  std::string mode = "off";
  /// Restricts the run to these model ids; all configured models if empty.
  std::vector<std::string> model_ids;
  std::optional<fs::path> forges;
};
void run_adjudicate(const AdjudicateArgs& args, std::ostream& log);

struct ProxyArgs {
  fs::path results;
  fs::path spec;
  std::optional<fs::path> models;
  fs::path out;
};
void run_proxy(const ProxyArgs& args, std::ostream& log);

struct MergeArgs {
  fs::path corpus;
  std::vector<fs::path> decisions;
  /// Only proxy decisions of this proxy are used; all when unset.
  std::optional<std::string> proxy;
  fs::path out_groups;
  std::optional<fs::path> out_inconsistencies;
};
void run_merge(const MergeArgs& args, std::ostream& log);

struct EvaluateArgs {
  fs::path gold;
  fs::path results;
  std::optional<fs::path> decisions;
  std::optional<fs::path> spec;
  std::optional<fs::path> models;
  std::uint64_t seed = 42;
  std::size_t iterations = 1000;
  double level = 0.95;
  std::size_t projection_max = 10000;
  std::size_t projection_step = 1000;
  fs::path out;
};
void run_evaluate(const EvaluateArgs& args, std::ostream& log);

struct EnqueueArgs {
  fs::path store;
  fs::path decisions;
  fs::path pairs;
  std::optional<std::string> proxy;
  std::optional<fs::path> content;
  std::optional<fs::path> results;
  std::optional<fs::path> forges;
};
void run_enqueue(const EnqueueArgs& args, std::ostream& log);

struct ServeArgs {
  fs::path store;
  std::string listen = "127.0.0.1:8080";
  std::optional<fs::path> decisions;
  std::string token;
  std::string cors_origin = "*";
};
/// Blocks until SIGINT or SIGTERM.
void run_serve(const ServeArgs& args, std::ostream& log);

void run_export_gold(const fs::path& store, const fs::path& out, std::ostream& log);
void run_export_decisions(const fs::path& store, const fs::path& out, std::ostream& log);
void run_compact(const fs::path& store, std::ostream& log);

}  // namespace softid::pipeline
