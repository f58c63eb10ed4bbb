#include "softid/eval/report.hpp"

#include <cstdio>
#include <set>

#include "softid/core/jsonl.hpp"

namespace softid::eval {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void ci_cells(std::string& row, const MetricCI& m) {
  row += "," + num(m.point) + "," + num(m.mean) + "," + num(m.ci_low) + "," + num(m.ci_high) + "," +
         (m.defined ? "true" : "false");
}

nlohmann::json config_json(const BootstrapConfig& c) {
  return {{"iterations", c.iterations}, {"level", c.level}, {"seed", c.seed}};
}

}  // namespace

void to_json(nlohmann::json& j, const EvaluationReport& r) {
  nlohmann::json per_class = nlohmann::json::object();
  for (Label l : kAllLabels) {
    const auto& c = r.per_class[static_cast<std::size_t>(l)];
    per_class[std::string(to_string(l))] = {
        {"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}};
  }
  nlohmann::json confusion = nlohmann::json::array();
  for (const auto& row : r.confusion) confusion.push_back(row);
  j = nlohmann::json{{"subject", r.subject},
                     {"kind", r.kind},
                     {"n_cases", r.n_cases},
                     {"n_resolved", r.n_resolved},
                     {"skipped_count", r.skipped_count},
                     {"accuracy", r.accuracy},
                     {"macro_precision", r.macro_precision},
                     {"macro_recall", r.macro_recall},
                     {"macro_f1", r.macro_f1},
                     {"per_class", per_class},
                     {"confusion_labels", {"same", "different", "unclear"}},
                     {"confusion", confusion},
                     {"stratified", r.stratified},
                     {"warnings", r.warnings}};
  j["seconds_per_case"] = r.seconds_per_case ? nlohmann::json(*r.seconds_per_case) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, EvaluationReport& r) {
  try {
    r.subject = j.at("subject").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.n_cases = j.at("n_cases").get<std::size_t>();
    r.n_resolved = j.at("n_resolved").get<std::size_t>();
    r.skipped_count = j.at("skipped_count").get<std::size_t>();
    r.accuracy = j.at("accuracy").get<MetricCI>();
    r.macro_precision = j.at("macro_precision").get<MetricCI>();
    r.macro_recall = j.at("macro_recall").get<MetricCI>();
    r.macro_f1 = j.at("macro_f1").get<MetricCI>();
    for (Label l : kAllLabels) {
      const auto& c = j.at("per_class").at(std::string(to_string(l)));
      r.per_class[static_cast<std::size_t>(l)] =
          ClassReport{c.at("precision").get<MetricCI>(), c.at("recall").get<MetricCI>(),
                      c.at("f1").get<MetricCI>(), c.at("support").get<std::size_t>()};
    }
    const auto& conf = j.at("confusion");
    for (std::size_t g = 0; g < kLabelCount; ++g)
      for (std::size_t p = 0; p < kLabelCount; ++p) r.confusion[g][p] = conf.at(g).at(p).get<std::size_t>();
    r.stratified = j.at("stratified").get<StratifiedResult>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    r.seconds_per_case.reset();
    if (!j.at("seconds_per_case").is_null()) r.seconds_per_case = j.at("seconds_per_case").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed evaluation report: ") + e.what());
  }
}

EvaluationReport score(const std::string& subject, const Predictions& predictions,
                       const std::vector<GoldCase>& gold, const BootstrapConfig& config) {
  const CaseSplit split = split_cases(predictions, gold);
  const PointMetrics point = compute_metrics(split.resolved);

  EvaluationReport r;
  r.subject = subject;
  r.n_cases = gold.size();
  r.n_resolved = split.resolved.size();
  r.skipped_count = split.unresolved;
  r.confusion = point.confusion;

  std::vector<CaseMetric> metrics = {
      [](const auto& cs) { return compute_metrics(cs).accuracy; },
      [](const auto& cs) { return compute_metrics(cs).macro_precision; },
      [](const auto& cs) { return compute_metrics(cs).macro_recall; },
      [](const auto& cs) { return compute_metrics(cs).macro_f1; },
  };
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    metrics.push_back([l](const auto& cs) { return compute_metrics(cs).per_class[l].precision; });
    metrics.push_back([l](const auto& cs) { return compute_metrics(cs).per_class[l].recall; });
    metrics.push_back([l](const auto& cs) { return compute_metrics(cs).per_class[l].f1; });
  }
  const auto cis = bootstrap_many(metrics, split.resolved, config);
  r.accuracy = cis[0];
  r.macro_precision = cis[1];
  r.macro_recall = cis[2];
  r.macro_f1 = cis[3];
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    r.per_class[l] = ClassReport{cis[4 + 3 * l], cis[5 + 3 * l], cis[6 + 3 * l],
                                 point.per_class[l].support};
    if (point.per_class[l].support == 0)
      r.warnings.push_back("zero_support:" + std::string(to_string(kAllLabels[l])));
  }
  if (split.resolved.empty()) r.warnings.insert(r.warnings.begin(), "no_resolved_cases");
  r.stratified = stratified_error_test(split.resolved, config);
  return r;
}

void to_json(nlohmann::json& j, const ReportBundle& b) {
  j = nlohmann::json{{"schema", kSchemaVersion},
                     {"bootstrap", config_json(b.config)},
                     {"subjects", b.subjects}};
  j["human_seconds_per_case"] =
      b.human_seconds_per_case ? nlohmann::json(*b.human_seconds_per_case) : nlohmann::json(nullptr);
  nlohmann::json projections = nlohmann::json::array();
  for (const auto& p : b.projections)
    projections.push_back({{"subject", p.subject}, {"projection", p.projection}});
  j["projections"] = projections;
}

void from_json(const nlohmann::json& j, ReportBundle& b) {
  check_schema(j);
  try {
    const auto& c = j.at("bootstrap");
    b.config = BootstrapConfig{c.at("iterations").get<std::size_t>(), c.at("level").get<double>(),
                               c.at("seed").get<std::uint64_t>()};
    b.subjects = j.at("subjects").get<std::vector<EvaluationReport>>();
    b.human_seconds_per_case.reset();
    if (!j.at("human_seconds_per_case").is_null())
      b.human_seconds_per_case = j.at("human_seconds_per_case").get<MetricCI>();
    b.projections.clear();
    for (const auto& p : j.at("projections"))
      b.projections.push_back({p.at("subject").get<std::string>(), p.at("projection").get<TimeProjection>()});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
}

Predictions model_predictions(const std::vector<adjudicator::AdjudicationResult>& results,
                              const std::string& model_id) {
  Predictions out;
  for (const auto& r : results) {
    if (r.model_id != model_id) continue;
    std::optional<Label> label;
    if (const auto* v = r.verdict()) label = v->label;
    if (!out.emplace(r.pair_id, label).second)
      throw ValidationError("model '" + model_id + "' has two results for pair " + r.pair_id);
  }
  return out;
}

Predictions proxy_predictions(const std::vector<consensus::ProxyDecision>& decisions,
                              const std::string& proxy) {
  Predictions out;
  for (const auto& d : decisions) {
    if (d.proxy != proxy) continue;
    std::optional<Label> label;
    if (const auto* v = d.verdict()) label = v->label;
    if (!out.emplace(d.pair_id, label).second)
      throw ValidationError("proxy '" + proxy + "' has two decisions for pair " + d.pair_id);
  }
  return out;
}

std::optional<double> mean_seconds_per_case(
    const std::vector<adjudicator::AdjudicationResult>& results, const std::string& model_id) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& r : results) {
    if (r.model_id != model_id) continue;
    sum += r.latency_total_ms / 1000.0;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::string metrics_csv(const ReportBundle& bundle) {
  std::string out =
      "subject,kind,n_cases,n_resolved,skipped_count,metric,class,point,mean,ci_low,ci_high,defined\n";
  for (const auto& s : bundle.subjects) {
    const std::string prefix = csv_field(s.subject) + "," + s.kind + "," + std::to_string(s.n_cases) +
                               "," + std::to_string(s.n_resolved) + "," +
                               std::to_string(s.skipped_count) + ",";
    auto row = [&](const std::string& metric, const std::string& cls, const MetricCI& m) {
      std::string line = prefix + metric + "," + cls;
      ci_cells(line, m);
      out += line + "\n";
    };
    row("accuracy", "", s.accuracy);
    row("macro_precision", "", s.macro_precision);
    row("macro_recall", "", s.macro_recall);
    row("macro_f1", "", s.macro_f1);
    for (Label l : kAllLabels) {
      const auto& c = s.per_class[static_cast<std::size_t>(l)];
      const std::string cls(to_string(l));
      row("precision", cls, c.precision);
      row("recall", cls, c.recall);
      row("f1", cls, c.f1);
    }
  }
  return out;
}

std::string strata_csv(const ReportBundle& bundle) {
  std::string out = "subject,stratum,n,point,mean,ci_low,ci_high,defined,p_value\n";
  for (const auto& s : bundle.subjects) {
    const std::string p = s.stratified.p_value ? num(*s.stratified.p_value) : "";
    for (const auto& [name, stratum] :
         {std::pair<const char*, const StratumError*>{"easy", &s.stratified.easy},
          std::pair<const char*, const StratumError*>{"hard", &s.stratified.hard}}) {
      std::string line = csv_field(s.subject) + "," + name + "," + std::to_string(stratum->n);
      ci_cells(line, stratum->error);
      out += line + "," + p + "\n";
    }
  }
  return out;
}

std::string projection_csv(const ReportBundle& bundle) {
  std::string out =
      "subject,k_members,deferral_fraction,n_cases,human_total_s,human_low_s,human_high_s,"
      "model_total_s,proxy_total_s\n";
  for (const auto& sp : bundle.projections) {
    const auto& t = sp.projection;
    for (const auto& p : t.points) {
      out += csv_field(sp.subject) + "," + std::to_string(t.k_members) + "," + num(t.deferral_fraction) +
             "," + std::to_string(p.n_cases) + "," + num(p.human_total) + "," + num(p.human_low) + "," +
             num(p.human_high) + "," + num(p.model_total) + "," + num(p.proxy_total) + "\n";
    }
  }
  return out;
}

void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir) {
  if (bundle.subjects.empty()) throw ValidationError("report has no subjects; nothing written");
  std::set<std::string> names;
  for (const auto& s : bundle.subjects)
    if (!names.insert(s.subject).second)
      throw ValidationError("report lists subject '" + s.subject + "' twice");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const nlohmann::json j = bundle;
  jsonl::write_file_atomic(dir / "report.json", j.dump(2) + "\n");
  jsonl::write_file_atomic(dir / "metrics.csv", metrics_csv(bundle));
  jsonl::write_file_atomic(dir / "strata.csv", strata_csv(bundle));
  jsonl::write_file_atomic(dir / "projection.csv", projection_csv(bundle));
}

ReportBundle load_report(const std::filesystem::path& report_json) {
  const auto j = nlohmann::json::parse(jsonl::read_file(report_json), nullptr, false);
  if (j.is_discarded()) throw ValidationError(report_json.string() + ": not valid JSON");
  return j.get<ReportBundle>();
}

}  // namespace softid::eval
