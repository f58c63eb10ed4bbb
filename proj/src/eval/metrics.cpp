#include "softid/eval/metrics.hpp"

#include <set>

#include "softid/core/jsonl.hpp"

namespace softid::eval {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<GoldCase> load_gold(const std::filesystem::path& path) {
  std::vector<GoldCase> out;
  std::set<std::string> seen;
  jsonl::for_each(path, [&](const nlohmann::json& j) {
    if (j.value("type", "") == "gold_header") return;
    auto g = j.get<GoldCase>();
    if (!seen.insert(g.pair_id).second)
      throw ValidationError(path.string() + ": gold case '" + g.pair_id + "' appears twice");
    out.push_back(std::move(g));
  });
  return out;
}

CaseSplit split_cases(const Predictions& predictions, const std::vector<GoldCase>& gold) {
  CaseSplit out;
  for (const auto& g : gold) {
    auto it = predictions.find(g.pair_id);
    if (it == predictions.end())
      throw ValidationError("gold case '" + g.pair_id + "' has no prediction");
    if (!it->second) {
      ++out.unresolved;
      continue;
    }
    out.resolved.push_back(ResolvedCase{g.pair_id, g.verdict.label, *it->second, g.difficulty()});
  }
  return out;
}

PointMetrics compute_metrics(const std::vector<ResolvedCase>& cases) {
  PointMetrics m;
  m.n_resolved = cases.size();
  std::size_t correct = 0;
  for (const auto& c : cases) {
    ++m.confusion[static_cast<std::size_t>(c.gold)][static_cast<std::size_t>(c.predicted)];
    if (c.correct()) ++correct;
  }
  m.accuracy = ratio(correct, cases.size());
  for (std::size_t l = 0; l < kLabelCount; ++l) {
    std::size_t predicted = 0;
    std::size_t support = 0;
    for (std::size_t k = 0; k < kLabelCount; ++k) {
      predicted += m.confusion[k][l];
      support += m.confusion[l][k];
    }
    auto& s = m.per_class[l];
    s.support = support;
    s.precision = ratio(m.confusion[l][l], predicted);
    s.recall = ratio(m.confusion[l][l], support);
    s.f1 = s.precision + s.recall == 0.0 ? 0.0 : 2.0 * s.precision * s.recall / (s.precision + s.recall);
    m.macro_precision += s.precision;
    m.macro_recall += s.recall;
    m.macro_f1 += s.f1;
  }
  m.macro_precision /= kLabelCount;
  m.macro_recall /= kLabelCount;
  m.macro_f1 /= kLabelCount;
  return m;
}

double accuracy(const std::vector<ResolvedCase>& cases) {
  std::size_t correct = 0;
  for (const auto& c : cases) correct += c.correct() ? 1 : 0;
  return ratio(correct, cases.size());
}

double error_rate(const std::vector<ResolvedCase>& cases) {
  std::size_t wrong = 0;
  for (const auto& c : cases) wrong += c.correct() ? 0 : 1;
  return ratio(wrong, cases.size());
}

}  // namespace softid::eval
