#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "softid/eval/metrics.hpp"

namespace softid::testing {

/// Per-case tally written from the textbook definitions, without reusing the
/// confusion matrix.
struct TallyOracle {
  double accuracy = 0.0;
  double precision[3] = {0, 0, 0};
  double recall[3] = {0, 0, 0};
  double f1[3] = {0, 0, 0};
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
};

inline TallyOracle tally_oracle(const std::vector<eval::ResolvedCase>& cases) {
  TallyOracle o;
  if (cases.empty()) return o;
  int hits = 0;
  for (const auto& c : cases) hits += c.gold == c.predicted ? 1 : 0;
  o.accuracy = double(hits) / double(cases.size());
  for (int l = 0; l < 3; ++l) {
    int tp = 0, fp = 0, fn = 0;
    for (const auto& c : cases) {
      const bool g = int(c.gold) == l;
      const bool p = int(c.predicted) == l;
      if (g && p) ++tp;
      if (!g && p) ++fp;
      if (g && !p) ++fn;
    }
    o.precision[l] = tp + fp ? double(tp) / (tp + fp) : 0.0;
    o.recall[l] = tp + fn ? double(tp) / (tp + fn) : 0.0;
    const double s = o.precision[l] + o.recall[l];
    o.f1[l] = s > 0 ? 2 * o.precision[l] * o.recall[l] / s : 0.0;
    o.macro_precision += o.precision[l] / 3;
    o.macro_recall += o.recall[l] / 3;
    o.macro_f1 += o.f1[l] / 3;
  }
  return o;
}

inline double binomial_pmf(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) +
                  k * std::log(p) + (n - k) * std::log1p(-p));
}

/// Exact P(H/nh - E/ne <= 0) where H ~ Bin(nh, ph) and E ~ Bin(ne, pe) are
/// independent. This is the limit of the one-sided bootstrap p-value as the
/// iteration count grows.
inline double analytic_stratified_p(int ne, double pe, int nh, double ph) {
  auto pmf = [](int n, int k, double p) {
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    return binomial_pmf(n, k, p);
  };
  double total = 0.0;
  for (int h = 0; h <= nh; ++h)
    for (int e = 0; e <= ne; ++e)
      if (double(h) / nh - double(e) / ne <= 1e-12) total += pmf(nh, h, ph) * pmf(ne, e, pe);
  return total;
}

/// Builds resolved cases with a given number of wrong predictions per stratum.
inline std::vector<eval::ResolvedCase> strata_fixture(int easy_n, int easy_wrong, int hard_n,
                                                      int hard_wrong) {
  std::vector<eval::ResolvedCase> out;
  auto add = [&](int n, int wrong, Difficulty d, const char* tag) {
    for (int i = 0; i < n; ++i) {
      const Label predicted = i < wrong ? Label::kDifferent : Label::kSame;
      out.push_back({std::string(tag) + std::to_string(i), Label::kSame, predicted, d});
    }
  };
  add(easy_n, easy_wrong, Difficulty::kEasy, "e");
  add(hard_n, hard_wrong, Difficulty::kHard, "h");
  return out;
}

}  // namespace softid::testing
