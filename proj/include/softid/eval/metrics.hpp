#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "softid/core/model.hpp"

namespace softid::eval {

/// Predicted label per pair_id; nullopt marks a skipped or deferred case.
using Predictions = std::map<std::string, std::optional<Label>>;

/// One case with both a gold and a predicted label.
struct ResolvedCase {
  std::string pair_id;
  Label gold = Label::kSame;
  Label predicted = Label::kSame;
  Difficulty difficulty = Difficulty::kEasy;

  bool correct() const { return gold == predicted; }
  bool operator==(const ResolvedCase&) const = default;
};

struct CaseSplit {
  /// In gold order.
  std::vector<ResolvedCase> resolved;
  /// Gold cases whose prediction is skipped or deferred.
  std::size_t unresolved = 0;
};

/// Reads a gold-standard JSONL. Header lines (`"type": "gold_header"`) are
/// skipped; duplicate pair_ids are rejected.
std::vector<GoldCase> load_gold(const std::filesystem::path& path);

/// Pairs every gold case with its prediction. Throws ValidationError when a
/// gold pair_id has no entry in `predictions`.
CaseSplit split_cases(const Predictions& predictions, const std::vector<GoldCase>& gold);

/// confusion[gold][predicted], indexed by Label.
using Confusion = std::array<std::array<std::size_t, kLabelCount>, kLabelCount>;

struct ClassScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
};

struct PointMetrics {
  std::size_t n_resolved = 0;
  double accuracy = 0.0;
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::array<ClassScores, kLabelCount> per_class{};
  Confusion confusion{};
};

/// Point estimates over resolved cases. 0/0 counts as 0 and macro averages
/// always run over all three labels. An empty input gives all zeros.
PointMetrics compute_metrics(const std::vector<ResolvedCase>& cases);

double accuracy(const std::vector<ResolvedCase>& cases);
/// Fraction of cases predicted wrongly; 0 for empty input.
double error_rate(const std::vector<ResolvedCase>& cases);

}  // namespace softid::eval
