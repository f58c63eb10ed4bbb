#include "softid/pipeline/commands.hpp"

#include <csignal>
#include <map>
#include <set>
#include <thread>

#include <pthread.h>

#include "softid/adjudicator/adjudicate.hpp"
#include "softid/consensus/merge.hpp"
#include "softid/core/jsonl.hpp"
#include "softid/eval/report.hpp"
#include "softid/harvest/conflict.hpp"
#include "softid/review/server.hpp"

namespace softid::pipeline {

namespace {

ForgeHosts forges_from(const std::optional<fs::path>& path) {
  return path ? harvest::load_forge_hosts(*path) : ForgeHosts::defaults();
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string format_ci(const eval::MetricCI& m) {
  if (!m.defined) return "undefined";
  return fixed(m.point) + " [" + fixed(m.ci_low) + ", " + fixed(m.ci_high) + "]";
}

std::vector<consensus::ProxySpec> load_specs(const fs::path& spec, const std::optional<fs::path>& models) {
  auto specs = consensus::load_proxy_specs(spec);
  if (models) {
    const auto cfg = adjudicator::load_models_config(*models);
    for (auto& s : specs) s = consensus::resolve_slots(s, cfg);
  }
  for (const auto& s : specs)
    for (const auto& m : s.members)
      if (m.rfind("slot:", 0) == 0)
        throw ValidationError("proxy '" + s.name + "' uses " + m + "; pass --models to resolve slots");
  return specs;
}

}  // namespace

void run_detect(const DetectArgs& args, std::ostream& log) {
  const auto corpus = jsonl::read<SoftwareMetadataRecord>(args.corpus);
  const auto result = harvest::auto_resolve(corpus, forges_from(args.forges));
  jsonl::write_values(args.out_pairs, result.conflicts);
  if (args.out_decisions) jsonl::write_values(*args.out_decisions, result.decisions);
  const auto stats = harvest::conflict_stats(corpus, result.conflicts);
  std::size_t by_name = 0;
  for (const auto& p : result.conflicts) by_name += p.kind == ConflictKind::kNameCollision;
  log << "records: " << stats.total_records << "\n"
      << "auto-resolved pairs: " << result.decisions.size() << "\n"
      << "conflict pairs: " << stats.conflict_count << " (name_collision " << by_name << ", url_collision "
      << stats.conflict_count - by_name << ")\n"
      << "conflict fraction: " << fixed(stats.conflict_fraction, 4) << "\n";
}

void run_fetch(const FetchArgs& args, std::ostream& log) {
  const auto pairs = jsonl::read<ConflictPair>(args.pairs);
  const auto urls = content::pair_urls(pairs, forges_from(args.forges));
  std::unique_ptr<content::Fetcher> fetcher;
  if (args.fixtures) {
    fetcher = std::make_unique<content::FixtureFetcher>(content::FixtureFetcher::load(*args.fixtures));
  } else {
    fetcher = std::make_unique<content::HttpFetcher>();
  }
  content::ContentCache cache(args.cache);
  content::FetchOptions options;
  options.parallel = std::max<std::size_t>(1, args.parallel);
  options.politeness_delay = std::chrono::milliseconds(args.politeness_ms);
  const auto contents = content::fetch_all(urls, *fetcher, content::ExtractorConfig::from_env(), &cache, options);
  std::map<std::string, std::size_t> by_status;
  for (const auto& [url, c] : contents) ++by_status[c.fetch_status.to_string()];
  log << "urls: " << urls.size() << "\n";
  for (const auto& [status, n] : by_status) log << "  " << status << ": " << n << "\n";
}

void run_adjudicate(const AdjudicateArgs& args, std::ostream& log) {
  using namespace adjudicator;
  const auto mode = parse_cassette_mode(args.mode);
  if (!mode) throw ValidationError("unknown cassette mode '" + args.mode + "'");
  if (*mode != CassetteMode::kOff && !args.cassette)
    throw ValidationError("cassette mode '" + args.mode + "' needs --cassette");

  const auto pairs = jsonl::read<ConflictPair>(args.pairs);
  const auto contents = content::load_cache_dir(args.content);
  const auto config = load_models_config(args.models);

  std::vector<std::string> ids = args.model_ids;
  if (ids.empty())
    for (const auto& m : config.models) ids.push_back(m.id);
  std::map<std::string, std::unique_ptr<Provider>> owned;
  std::map<std::string, Provider*> providers;
  BatchOptions batch;
  for (const auto& id : ids) {
    const auto& model = config.model(id);
    if (*mode == CassetteMode::kReplay) {
      providers[id] = nullptr;
    } else {
      owned[id] = make_provider(model);
      providers[id] = owned[id].get();
    }
    if (model.requests_per_minute > 0) batch.requests_per_minute[id] = model.requests_per_minute;
  }

  std::optional<CassetteStore> cassette;
  if (args.cassette) cassette.emplace(*args.cassette);
  batch.adjudicate.retry = config.retry;
  batch.adjudicate.mode = *mode;
  batch.adjudicate.cassette = cassette ? &*cassette : nullptr;
  batch.parallel = config.parallel;
  batch.token_warning = config.token_warning;
  batch.warn = [&log](const std::string& w) { log << "warning: " << w << "\n"; };
  batch.forges = forges_from(args.forges);

  const auto results = adjudicate_all(pairs, contents, ids, providers, config.decoding, batch);
  jsonl::write_values(args.out, results);

  for (const auto& id : ids) {
    std::size_t parsed = 0, total = 0;
    std::map<std::string, std::size_t> skips;
    for (const auto& r : results) {
      if (r.model_id != id) continue;
      ++total;
      if (r.verdict()) {
        ++parsed;
      } else {
        ++skips[std::string(to_string(std::get<Skipped>(r.parsed).reason))];
      }
    }
    log << id << ": " << parsed << "/" << total << " parsed";
    for (const auto& [reason, n] : skips) log << ", " << reason << " " << n;
    log << "\n";
  }
}

void run_proxy(const ProxyArgs& args, std::ostream& log) {
  const auto results = jsonl::read<adjudicator::AdjudicationResult>(args.results);
  const auto specs = load_specs(args.spec, args.models);
  std::vector<nlohmann::json> lines;
  for (const auto& spec : specs) {
    const auto decisions = consensus::run_proxy_all(spec, results);
    const auto cov = consensus::proxy_coverage(decisions);
    log << spec.name << ": accepted " << cov.accepted_count << ", deferred " << cov.deferred_count
        << ", coverage " << fixed(cov.coverage_fraction) << "\n";
    for (const auto& d : decisions) lines.emplace_back(d);
  }
  jsonl::write(args.out, lines);
}

void run_merge(const MergeArgs& args, std::ostream& log) {
  const auto corpus = jsonl::read<SoftwareMetadataRecord>(args.corpus);
  std::vector<ResolutionDecision> resolutions;
  std::vector<consensus::ProxyDecision> proxies;
  for (const auto& path : args.decisions) {
    auto dl = consensus::read_decision_log(path);
    resolutions.insert(resolutions.end(), dl.resolutions.begin(), dl.resolutions.end());
    for (auto& p : dl.proxies)
      if (!args.proxy || p.proxy == *args.proxy) proxies.push_back(std::move(p));
  }
  const auto merged = consensus::merge_identities(corpus, resolutions, proxies);
  jsonl::write_values(args.out_groups, merged.groups);
  if (args.out_inconsistencies) jsonl::write_values(*args.out_inconsistencies, merged.inconsistencies);
  std::size_t multi = 0;
  for (const auto& g : merged.groups) multi += g.members.size() > 1;
  log << "records: " << corpus.size() << "\n"
      << "groups: " << merged.groups.size() << " (" << multi << " with several records)\n"
      << "inconsistencies: " << merged.inconsistencies.size() << "\n";
}

void run_evaluate(const EvaluateArgs& args, std::ostream& log) {
  const auto gold = eval::load_gold(args.gold);
  const auto results = jsonl::read<adjudicator::AdjudicationResult>(args.results);

  eval::ReportBundle bundle;
  bundle.config = eval::BootstrapConfig{args.iterations, args.level, args.seed};

  std::set<std::string> model_ids;
  for (const auto& r : results) model_ids.insert(r.model_id);
  std::map<std::string, double> model_seconds;
  for (const auto& id : model_ids) {
    auto report = eval::score(id, eval::model_predictions(results, id), gold, bundle.config);
    report.kind = "model";
    report.seconds_per_case = eval::mean_seconds_per_case(results, id);
    if (report.seconds_per_case) model_seconds[id] = *report.seconds_per_case;
    bundle.subjects.push_back(std::move(report));
  }

  std::vector<double> human_seconds;
  for (const auto& g : gold) human_seconds.push_back(g.annotation_seconds);
  const auto human = eval::bootstrap_mean(human_seconds, bundle.config);
  if (human.defined) bundle.human_seconds_per_case = human;

  if (args.decisions) {
    const auto dl = consensus::read_decision_log(*args.decisions);
    std::map<std::string, consensus::ProxySpec> specs;
    if (args.spec)
      for (auto& s : load_specs(*args.spec, args.models)) specs.emplace(s.name, std::move(s));
    std::set<std::string> names;
    for (const auto& d : dl.proxies) names.insert(d.proxy);
    for (const auto& name : names) {
      auto report = eval::score(name, eval::proxy_predictions(dl.proxies, name), gold, bundle.config);
      report.kind = "proxy";
      auto it = specs.find(name);
      if (it == specs.end()) {
        log << "note: no spec for " << name << ", skipping its time projection\n";
        bundle.subjects.push_back(std::move(report));
        continue;
      }
      double sum = 0.0;
      bool complete = true;
      for (const auto& m : it->second.members) {
        auto ms = model_seconds.find(m);
        if (ms == model_seconds.end()) {
          complete = false;
          break;
        }
        sum += ms->second;
      }
      if (complete) {
        const std::size_t k = it->second.members.size();
        report.seconds_per_case = sum / static_cast<double>(k);
        std::vector<consensus::ProxyDecision> own;
        for (const auto& d : dl.proxies)
          if (d.proxy == name) own.push_back(d);
        const double deferral = 1.0 - consensus::proxy_coverage(own).coverage_fraction;
        if (human.defined && human.point > 0.0 && *report.seconds_per_case > 0.0) {
          bundle.projections.push_back(
              {name, eval::project_time(human.point, *report.seconds_per_case, deferral, k,
                                        eval::default_grid(args.projection_max, args.projection_step),
                                        std::pair{human.ci_low, human.ci_high})});
        } else {
          log << "note: per-case times unavailable, skipping projection for " << name << "\n";
        }
      }
      bundle.subjects.push_back(std::move(report));
    }
  }

  eval::emit_report(bundle, args.out);
  for (const auto& s : bundle.subjects) {
    log << s.kind << " " << s.subject << ": resolved " << s.n_resolved << "/" << s.n_cases
        << ", accuracy " << format_ci(s.accuracy) << ", macro F1 " << format_ci(s.macro_f1);
    if (s.stratified.p_value) log << ", hard-vs-easy p " << fixed(*s.stratified.p_value);
    log << "\n";
    for (const auto& w : s.warnings) log << "  warning: " << w << "\n";
  }
  log << "wrote " << (args.out / "report.json").string() << "\n";
}

void run_enqueue(const EnqueueArgs& args, std::ostream& log) {
  const auto dl = consensus::read_decision_log(args.decisions);
  std::vector<consensus::ProxyDecision> queue;
  for (const auto& d : dl.proxies) {
    if (args.proxy && d.proxy != *args.proxy) continue;
    const auto* v = d.verdict();
    if (!v || v->label == Label::kUnclear) queue.push_back(d);
  }
  adjudicator::ContentMap contents;
  if (args.content) contents = content::load_cache_dir(*args.content);
  std::vector<adjudicator::AdjudicationResult> results;
  if (args.results) results = jsonl::read<adjudicator::AdjudicationResult>(*args.results);
  auto ctx = review::make_context(jsonl::read<ConflictPair>(args.pairs), std::move(contents), std::move(results));
  ctx.forges = forges_from(args.forges);
  review::ReviewStore store(args.store);
  const auto added = store.enqueue(queue, ctx);
  log << "enqueued " << added << " new item(s); queue holds " << store.size() << " ("
      << store.pending_count() << " pending)\n";
}

void run_serve(const ServeArgs& args, std::ostream& log) {
  const auto [host, port] = review::parse_listen(args.listen);
  review::StoreOptions options;
  options.decisions_path = args.decisions;
  review::ReviewStore store(args.store, options);
  review::ReviewServer server(store, review::ServerOptions{args.token, args.cors_origin});

  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const int bound = server.bind(host, port);
  if (bound < 0) throw IoError("cannot listen on " + args.listen);
  std::thread worker([&server] { server.serve(); });
  server.wait_until_ready();
  log << "review service on http://" << host << ":" << bound << " (" << store.pending_count()
      << " pending of " << store.size() << ")" << std::endl;
  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  worker.join();
  log << "stopped" << std::endl;
}

void run_export_gold(const fs::path& store_path, const fs::path& out, std::ostream& log) {
  review::ReviewStore store(store_path);
  const auto cases = store.gold_cases();
  jsonl::write_file_atomic(out, review::export_gold(cases));
  log << "exported " << cases.size() << " gold case(s)\n";
}

void run_export_decisions(const fs::path& store_path, const fs::path& out, std::ostream& log) {
  review::ReviewStore store(store_path);
  const auto decisions = store.decisions();
  jsonl::write_values(out, decisions);
  log << "exported " << decisions.size() << " human decision(s)\n";
}

void run_compact(const fs::path& store_path, std::ostream& log) {
  review::ReviewStore store(store_path);
  store.compact();
  log << "compacted " << store.size() << " item(s)\n";
}

}  // namespace softid::pipeline
