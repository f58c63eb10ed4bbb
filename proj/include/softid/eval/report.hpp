#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/adjudicator/adjudicate.hpp"
#include "softid/consensus/proxy.hpp"
#include "softid/eval/bootstrap.hpp"
#include "softid/eval/metrics.hpp"
#include "softid/eval/projection.hpp"

namespace softid::eval {

struct ClassReport {
  MetricCI precision;
  MetricCI recall;
  MetricCI f1;
  std::size_t support = 0;

  bool operator==(const ClassReport&) const = default;
};

/// Scores for one model or proxy against the gold standard.
struct EvaluationReport {
  std::string subject;
  /// "model" or "proxy".
  std::string kind = "model";
  std::size_t n_cases = 0;
  std::size_t n_resolved = 0;
  /// Gold cases without a usable prediction (skipped or deferred).
  std::size_t skipped_count = 0;
  MetricCI accuracy;
  MetricCI macro_precision;
  MetricCI macro_recall;
  MetricCI macro_f1;
  std::array<ClassReport, kLabelCount> per_class{};
  Confusion confusion{};
  StratifiedResult stratified;
  /// Mean end-to-end latency per case in seconds, over the subject's models.
  std::optional<double> seconds_per_case;
  /// Flags such as "zero_support:unclear" or "no_resolved_cases".
  std::vector<std::string> warnings;

  bool operator==(const EvaluationReport&) const = default;
};

void to_json(nlohmann::json& j, const EvaluationReport& r);
void from_json(const nlohmann::json& j, EvaluationReport& r);

/// Point metrics plus bootstrap CIs and the stratified test.
EvaluationReport score(const std::string& subject, const Predictions& predictions,
                       const std::vector<GoldCase>& gold, const BootstrapConfig& config);

struct SubjectProjection {
  std::string subject;
  TimeProjection projection;

  bool operator==(const SubjectProjection&) const = default;
};

struct ReportBundle {
  BootstrapConfig config;
  std::vector<EvaluationReport> subjects;
  /// Human seconds per case measured on the gold standard, with bootstrap CI.
  std::optional<MetricCI> human_seconds_per_case;
  std::vector<SubjectProjection> projections;

  bool operator==(const ReportBundle& o) const {
    return config.iterations == o.config.iterations && config.level == o.config.level &&
           config.seed == o.config.seed && subjects == o.subjects &&
           human_seconds_per_case == o.human_seconds_per_case && projections == o.projections;
  }
};

void to_json(nlohmann::json& j, const ReportBundle& b);
void from_json(const nlohmann::json& j, ReportBundle& b);

/// Predictions of one model from adjudication results.
Predictions model_predictions(const std::vector<adjudicator::AdjudicationResult>& results,
                              const std::string& model_id);

/// Predictions of one proxy; deferrals map to nullopt.
Predictions proxy_predictions(const std::vector<consensus::ProxyDecision>& decisions,
                              const std::string& proxy);

/// Mean latency_total_ms / 1000 over a model's results; nullopt if none.
std::optional<double> mean_seconds_per_case(
    const std::vector<adjudicator::AdjudicationResult>& results, const std::string& model_id);

/// Writes report.json, metrics.csv, strata.csv and projection.csv into `dir`.
/// Throws ValidationError for an empty subject list (nothing is written) and
/// IoError when the directory cannot be written.
void emit_report(const ReportBundle& bundle, const std::filesystem::path& dir);

ReportBundle load_report(const std::filesystem::path& report_json);

/// CSV bodies, exposed for tests and docs.
std::string metrics_csv(const ReportBundle& bundle);
std::string strata_csv(const ReportBundle& bundle);
std::string projection_csv(const ReportBundle& bundle);

}  // namespace softid::eval
