#pragma once

#include <random>
#include <string>
#include <vector>

#include "softid/core/model.hpp"

namespace softid::testing {

/// Random corpora drawn from small name/URL pools so that name and URL
/// collisions are frequent. URLs come in cosmetic variants (scheme, "www.",
/// case, trailing slash) that must canonicalize to the same key.
inline std::vector<SoftwareMetadataRecord> random_corpus(std::mt19937& rng, std::size_t max_records) {
  static const std::vector<std::string> kNames = {"diamond", "Diamond ", "blast", "BLAST!",
                                                  "salmon", "kraken", "star", "(star)"};
  static const std::vector<std::string> kHosts = {"example.org/diamond", "bio.tools/blast",
                                                  "salmon.dev", "ccb.jhu.edu/kraken",
                                                  "pypi.org/project/star", "lab.example.edu/t"};
  static const std::vector<std::string> kRepos = {"github.com/bbuchfink/diamond",
                                                  "github.com/ncbi/blast", "gitlab.com/x/salmon",
                                                  "bitbucket.org/lab/kraken"};
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto variant = [&](const std::string& base) {
    std::string u = base;
    switch (pick(4)) {
      case 0: u = "https://" + u; break;
      case 1: u = "http://www." + u + "/"; break;
      case 2: {
        std::string upper = u;
        for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        u = "HTTPS://" + upper;
        break;
      }
      default: break;
    }
    return u;
  };

  const std::size_t n = 1 + pick(max_records);
  std::vector<SoftwareMetadataRecord> corpus;
  for (std::size_t i = 0; i < n; ++i) {
    SoftwareMetadataRecord r;
    r.record_id = "rec-" + std::to_string(i) + "-" + std::to_string(pick(1000));
    r.source = pick(2) ? "biotools" : "bioconductor";
    r.name = kNames[pick(kNames.size())];
    for (std::size_t k = pick(3); k > 0; --k) r.webpage_urls.push_back(variant(kHosts[pick(kHosts.size())]));
    for (std::size_t k = pick(2); k > 0; --k) r.repository_urls.push_back(variant(kRepos[pick(kRepos.size())]));
    corpus.push_back(std::move(r));
  }
  return corpus;
}

}  // namespace softid::testing
