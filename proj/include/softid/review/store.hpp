#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "softid/adjudicator/adjudicate.hpp"
#include "softid/adjudicator/prompt.hpp"
#include "softid/consensus/proxy.hpp"
#include "softid/content/extractor.hpp"
#include "softid/harvest/decision.hpp"

namespace softid::review {

enum class ItemState { kPending, kResolved };

std::string_view to_string(ItemState state);

struct Resolution {
  Verdict verdict;
  std::string rationale;
  std::string annotator;
  std::int64_t started_at_ms = 0;
  std::int64_t submitted_at_ms = 0;

  double annotation_seconds() const {
    return static_cast<double>(submitted_at_ms - started_at_ms) / 1000.0;
  }
  bool operator==(const Resolution&) const = default;
};

/// A queued pair with everything an annotator needs to decide it.
struct ReviewItem {
  std::string pair_id;
  ConflictPair pair;
  /// Fetched content for the URLs of both records, in record order.
  std::vector<content::UrlContent> contents;
  /// Model outputs shown to the annotator as machine output.
  std::vector<adjudicator::AdjudicationResult> model_results;
  /// The proxy decisions that sent the pair here.
  std::vector<consensus::ProxyDecision> deferrals;
  std::int64_t enqueued_at_ms = 0;
  ItemState state = ItemState::kPending;
  std::optional<Resolution> resolution;

  bool operator==(const ReviewItem&) const = default;
};

void to_json(nlohmann::json& j, const Resolution& r);
void from_json(const nlohmann::json& j, Resolution& r);
void to_json(nlohmann::json& j, const ReviewItem& item);
void from_json(const nlohmann::json& j, ReviewItem& item);

/// Short listing entry for GET /queue.
nlohmann::json summary_json(const ReviewItem& item);

/// Lookup tables used to build queue items from proxy decisions.
struct EnqueueContext {
  std::map<std::string, ConflictPair> pairs;
  adjudicator::ContentMap contents;
  std::vector<adjudicator::AdjudicationResult> results;
  ForgeHosts forges = ForgeHosts::defaults();
};

EnqueueContext make_context(const std::vector<ConflictPair>& pairs,
                            adjudicator::ContentMap contents,
                            std::vector<adjudicator::AdjudicationResult> results);

/// What an annotator submits. `started_at_ms` is stamped by the client when
/// the item was opened; `submitted_at_ms` defaults to the store clock.
struct Submission {
  Verdict verdict;
  std::string rationale;
  std::string annotator;
  std::int64_t started_at_ms = 0;
  std::optional<std::int64_t> submitted_at_ms;
};

/// Parses a POST /items/{id}/verdict body. Accepts `started_at_ms` or
/// `annotation_seconds` (relative to `now_ms`).
Submission parse_submission(const nlohmann::json& body, std::int64_t now_ms);

struct StoreOptions {
  /// Optional mirror of the human decisions as a decisions JSONL that the
  /// merge step reads. Missing lines are restored on open.
  std::optional<std::filesystem::path> decisions_path;
  std::function<std::int64_t()> clock;
};

std::int64_t system_now_ms();

/// File-backed review queue: an append-only JSONL event log that is replayed
/// on open. Reads take a shared lock, writes an exclusive one, so a
/// submission and its decision commit in a single event.
class ReviewStore {
 public:
  explicit ReviewStore(std::filesystem::path log_path, StoreOptions options = {});

  /// Adds one item per deferred pair. Pairs already in the queue, pending or
  /// resolved, are left untouched. Returns the number of new items.
  /// Throws ValidationError for accepted same/different decisions or pairs
  /// missing from the context; nothing is written in that case.
  std::size_t enqueue(const std::vector<consensus::ProxyDecision>& decisions,
                      const EnqueueContext& context);

  /// Resolves a pending item and records a human decision. Throws
  /// NotFoundError, ConflictError (already resolved) or ValidationError.
  ReviewItem submit_verdict(const std::string& pair_id, const Submission& submission);

  std::optional<ReviewItem> item(const std::string& pair_id) const;
  /// Items in pair_id order, optionally filtered by state.
  std::vector<ReviewItem> items(std::optional<ItemState> state = std::nullopt) const;
  std::size_t size() const;
  std::size_t pending_count() const;

  /// One human decision per resolved item, in pair_id order.
  std::vector<ResolutionDecision> decisions() const;

  /// Resolved items as gold cases, in pair_id order.
  std::vector<GoldCase> gold_cases() const;

  /// Rewrites the log with one snapshot event per item.
  void compact();

  const std::filesystem::path& path() const { return path_; }
  std::int64_t now_ms() const { return options_.clock(); }

 private:
  void replay();
  void apply(const nlohmann::json& event);
  void append_event(const nlohmann::json& event);
  void sync_decisions_mirror();

  std::filesystem::path path_;
  StoreOptions options_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, ReviewItem> items_;
};

/// Human decision for a resolved item.
ResolutionDecision human_decision(const ReviewItem& item);

/// Gold JSONL: a header line followed by one GoldCase per resolved item. An
/// empty queue still yields the header.
std::string export_gold(const std::vector<GoldCase>& cases);

}  // namespace softid::review
