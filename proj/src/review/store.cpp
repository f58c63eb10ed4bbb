#include "softid/review/store.hpp"

#include <chrono>
#include <set>

#include <fcntl.h>
#include <unistd.h>

#include "softid/core/jsonl.hpp"

namespace softid::review {

namespace fs = std::filesystem;

namespace {

std::optional<ItemState> parse_state(std::string_view text) {
  if (text == "pending") return ItemState::kPending;
  if (text == "resolved") return ItemState::kResolved;
  return std::nullopt;
}

// Appends one line and fsyncs, so an acknowledged write survives a crash.
void append_line(const fs::path& path, const std::string& line) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) throw IoError("cannot open " + path.string() + " for appending");
  const std::string data = line + "\n";
  std::size_t done = 0;
  while (done < data.size()) {
    const ssize_t n = ::write(fd, data.data() + done, data.size() - done);
    if (n < 0) {
      ::close(fd);
      throw IoError("write failed for " + path.string());
    }
    done += static_cast<std::size_t>(n);
  }
  ::fsync(fd);
  ::close(fd);
}

template <class T>
std::vector<T> array_of(const nlohmann::json& j, const char* key) {
  std::vector<T> out;
  for (const auto& v : j.at(key)) out.push_back(v.get<T>());
  return out;
}

}  // namespace

std::string_view to_string(ItemState state) {
  return state == ItemState::kPending ? "pending" : "resolved";
}

std::int64_t system_now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

void to_json(nlohmann::json& j, const Resolution& r) {
  j = nlohmann::json{{"verdict", r.verdict},
                     {"rationale", r.rationale},
                     {"annotator", r.annotator},
                     {"started_at_ms", r.started_at_ms},
                     {"submitted_at_ms", r.submitted_at_ms},
                     {"annotation_seconds", r.annotation_seconds()}};
}

void from_json(const nlohmann::json& j, Resolution& r) {
  try {
    r.verdict = j.at("verdict").get<Verdict>();
    r.rationale = j.at("rationale").get<std::string>();
    r.annotator = j.at("annotator").get<std::string>();
    r.started_at_ms = j.at("started_at_ms").get<std::int64_t>();
    r.submitted_at_ms = j.at("submitted_at_ms").get<std::int64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed resolution: ") + e.what());
  }
  if (r.submitted_at_ms < r.started_at_ms)
    throw ValidationError("resolution submitted before it was started");
}

void to_json(nlohmann::json& j, const ReviewItem& item) {
  j = nlohmann::json{{"schema", kSchemaVersion},
                     {"pair_id", item.pair_id},
                     {"state", to_string(item.state)},
                     {"pair", item.pair},
                     {"contents", item.contents},
                     {"machine_verdicts", item.model_results},
                     {"deferrals", item.deferrals},
                     {"enqueued_at_ms", item.enqueued_at_ms}};
  j["resolution"] = item.resolution ? nlohmann::json(*item.resolution) : nlohmann::json(nullptr);
}

void from_json(const nlohmann::json& j, ReviewItem& item) {
  check_schema(j);
  try {
    item.pair_id = j.at("pair_id").get<std::string>();
    auto state = parse_state(j.at("state").get<std::string>());
    if (!state) throw ValidationError("unknown item state " + j.at("state").dump());
    item.state = *state;
    item.pair = j.at("pair").get<ConflictPair>();
    item.contents = array_of<content::UrlContent>(j, "contents");
    item.model_results = array_of<adjudicator::AdjudicationResult>(j, "machine_verdicts");
    item.deferrals = array_of<consensus::ProxyDecision>(j, "deferrals");
    item.enqueued_at_ms = j.at("enqueued_at_ms").get<std::int64_t>();
    item.resolution.reset();
    if (!j.at("resolution").is_null()) item.resolution = j.at("resolution").get<Resolution>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed review item: ") + e.what());
  }
  if ((item.state == ItemState::kResolved) != item.resolution.has_value())
    throw ValidationError("review item '" + item.pair_id + "' state and resolution disagree");
}

nlohmann::json summary_json(const ReviewItem& item) {
  nlohmann::json j{{"pair_id", item.pair_id},
                   {"state", to_string(item.state)},
                   {"kind", to_string(item.pair.kind)},
                   {"record_a", {{"record_id", item.pair.record_a.record_id},
                                 {"source", item.pair.record_a.source},
                                 {"name", item.pair.record_a.name}}},
                   {"record_b", {{"record_id", item.pair.record_b.record_id},
                                 {"source", item.pair.record_b.source},
                                 {"name", item.pair.record_b.name}}},
                   {"enqueued_at_ms", item.enqueued_at_ms}};
  j["verdict"] = item.resolution ? nlohmann::json(to_string(item.resolution->verdict.label))
                                 : nlohmann::json(nullptr);
  return j;
}

EnqueueContext make_context(const std::vector<ConflictPair>& pairs, adjudicator::ContentMap contents,
                            std::vector<adjudicator::AdjudicationResult> results) {
  EnqueueContext ctx;
  for (const auto& p : pairs) ctx.pairs.emplace(p.pair_id, p);
  ctx.contents = std::move(contents);
  ctx.results = std::move(results);
  return ctx;
}

Submission parse_submission(const nlohmann::json& body, std::int64_t now_ms) {
  if (!body.is_object()) throw ValidationError("submission must be a JSON object");
  Submission s;
  auto str = [&](const char* key) {
    auto it = body.find(key);
    if (it == body.end() || !it->is_string())
      throw ValidationError(std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };
  auto label = parse_label(str("verdict"));
  if (!label) throw ValidationError("unknown verdict label " + body.at("verdict").dump());
  s.verdict.label = *label;
  if (auto it = body.find("confidence"); it != body.end() && !it->is_null()) {
    if (!it->is_string()) throw ValidationError("field 'confidence' must be a string");
    auto c = parse_confidence(it->get<std::string>());
    if (!c) throw ValidationError("unknown confidence " + it->dump());
    s.verdict.confidence = *c;
  }
  s.rationale = str("rationale");
  s.verdict.explanation = s.rationale;
  s.annotator = str("annotator");

  auto int_field = [&](const char* key) -> std::optional<std::int64_t> {
    auto it = body.find(key);
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_integer()) throw ValidationError(std::string("field '") + key + "' must be an integer");
    return it->get<std::int64_t>();
  };
  s.submitted_at_ms = int_field("submitted_at_ms");
  const std::int64_t end = s.submitted_at_ms.value_or(now_ms);
  if (auto started = int_field("started_at_ms")) {
    s.started_at_ms = *started;
  } else if (auto it = body.find("annotation_seconds"); it != body.end() && !it->is_null()) {
    if (!it->is_number() || it->get<double>() < 0)
      throw ValidationError("annotation_seconds must be a non-negative number");
    s.started_at_ms = end - static_cast<std::int64_t>(it->get<double>() * 1000.0 + 0.5);
  } else {
    throw ValidationError("submission needs started_at_ms or annotation_seconds");
  }
  return s;
}

ResolutionDecision human_decision(const ReviewItem& item) {
  if (!item.resolution) throw ValidationError("item '" + item.pair_id + "' is not resolved");
  return ResolutionDecision{item.pair_id,       item.pair.record_a.record_id,
                            item.pair.record_b.record_id, item.resolution->verdict.label,
                            Origin::kHuman,     item.resolution->annotator};
}

std::string export_gold(const std::vector<GoldCase>& cases) {
  const nlohmann::json header{{"schema", kSchemaVersion}, {"type", "gold_header"}, {"count", cases.size()}};
  std::string out = header.dump() + "\n";
  for (const auto& g : cases) out += nlohmann::json(g).dump() + "\n";
  return out;
}

ReviewStore::ReviewStore(fs::path log_path, StoreOptions options)
    : path_(std::move(log_path)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = system_now_ms;
  replay();
  sync_decisions_mirror();
}

void ReviewStore::replay() {
  if (!fs::exists(path_)) return;
  jsonl::for_each(path_, [&](const nlohmann::json& event) { apply(event); });
}

void ReviewStore::apply(const nlohmann::json& event) {
  const std::string type = event.value("event", "");
  if (type == "enqueue" || type == "snapshot") {
    auto item = event.at("item").get<ReviewItem>();
    if (type == "snapshot") {
      items_[item.pair_id] = std::move(item);
    } else {
      items_.emplace(item.pair_id, std::move(item));
    }
  } else if (type == "resolve") {
    const auto pair_id = event.at("pair_id").get<std::string>();
    auto it = items_.find(pair_id);
    if (it == items_.end()) throw ValidationError("review log resolves unknown pair " + pair_id);
    if (it->second.state == ItemState::kResolved) return;
    it->second.state = ItemState::kResolved;
    it->second.resolution = event.at("resolution").get<Resolution>();
  } else {
    throw ValidationError("review log has unknown event '" + type + "'");
  }
}

void ReviewStore::append_event(const nlohmann::json& event) { append_line(path_, event.dump()); }

void ReviewStore::sync_decisions_mirror() {
  if (!options_.decisions_path) return;
  std::set<std::string> present;
  if (fs::exists(*options_.decisions_path)) {
    jsonl::for_each(*options_.decisions_path, [&](const nlohmann::json& j) {
      if (j.value("type", "") == "resolution" && j.value("origin", "") == "human")
        present.insert(j.at("pair_id").get<std::string>());
    });
  }
  for (const auto& [id, item] : items_)
    if (item.resolution && !present.count(id))
      append_line(*options_.decisions_path, nlohmann::json(human_decision(item)).dump());
}

std::size_t ReviewStore::enqueue(const std::vector<consensus::ProxyDecision>& decisions,
                                 const EnqueueContext& context) {
  // Validate and build every item before touching the log.
  std::map<std::string, ReviewItem> fresh;
  for (const auto& d : decisions) {
    if (const auto* v = d.verdict(); v && v->label != Label::kUnclear)
      throw ValidationError("pair " + d.pair_id + " was accepted by " + d.proxy + " and needs no review");
    auto pit = context.pairs.find(d.pair_id);
    if (pit == context.pairs.end())
      throw ValidationError("pair " + d.pair_id + " is not in the enqueue context");
    auto [it, inserted] = fresh.try_emplace(d.pair_id);
    if (inserted) {
      ReviewItem& item = it->second;
      item.pair_id = d.pair_id;
      item.pair = pit->second;
      std::set<std::string> seen;
      for (const auto* rec : {&item.pair.record_a, &item.pair.record_b}) {
        for (const auto& url : content::record_urls(*rec, context.forges)) {
          auto cit = context.contents.find(url.canonical);
          if (cit != context.contents.end() && seen.insert(url.canonical).second)
            item.contents.push_back(cit->second);
        }
      }
      for (const auto& r : context.results)
        if (r.pair_id == d.pair_id) item.model_results.push_back(r);
    }
    it->second.deferrals.push_back(d);
  }

  std::unique_lock lock(mutex_);
  std::size_t added = 0;
  const std::int64_t now = options_.clock();
  for (auto& [id, item] : fresh) {
    if (items_.count(id)) continue;
    item.enqueued_at_ms = now;
    append_event({{"event", "enqueue"}, {"item", item}});
    items_.emplace(id, std::move(item));
    ++added;
  }
  return added;
}

ReviewItem ReviewStore::submit_verdict(const std::string& pair_id, const Submission& submission) {
  validate_human_verdict(submission.verdict);
  if (submission.rationale.empty()) throw ValidationError("rationale must not be empty");
  if (submission.annotator.empty()) throw ValidationError("annotator must not be empty");

  std::unique_lock lock(mutex_);
  auto it = items_.find(pair_id);
  if (it == items_.end()) throw NotFoundError("no review item for pair " + pair_id);
  if (it->second.state == ItemState::kResolved)
    throw ConflictError("pair " + pair_id + " is already resolved");

  Resolution res{submission.verdict, submission.rationale, submission.annotator,
                 submission.started_at_ms, submission.submitted_at_ms.value_or(options_.clock())};
  if (res.submitted_at_ms < res.started_at_ms)
    throw ValidationError("submission is stamped before the item was opened");

  ReviewItem updated = it->second;
  updated.state = ItemState::kResolved;
  updated.resolution = res;
  const auto decision = human_decision(updated);
  // The resolve event is the commit point; the mirror is rebuilt from it.
  append_event({{"event", "resolve"}, {"pair_id", pair_id}, {"resolution", res}, {"decision", decision}});
  it->second = updated;
  if (options_.decisions_path) append_line(*options_.decisions_path, nlohmann::json(decision).dump());
  return updated;
}

std::optional<ReviewItem> ReviewStore::item(const std::string& pair_id) const {
  std::shared_lock lock(mutex_);
  auto it = items_.find(pair_id);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

std::vector<ReviewItem> ReviewStore::items(std::optional<ItemState> state) const {
  std::shared_lock lock(mutex_);
  std::vector<ReviewItem> out;
  for (const auto& [id, item] : items_)
    if (!state || item.state == *state) out.push_back(item);
  return out;
}

std::size_t ReviewStore::size() const {
  std::shared_lock lock(mutex_);
  return items_.size();
}

std::size_t ReviewStore::pending_count() const {
  std::shared_lock lock(mutex_);
  std::size_t n = 0;
  for (const auto& [id, item] : items_) n += item.state == ItemState::kPending;
  return n;
}

std::vector<ResolutionDecision> ReviewStore::decisions() const {
  std::shared_lock lock(mutex_);
  std::vector<ResolutionDecision> out;
  for (const auto& [id, item] : items_)
    if (item.resolution) out.push_back(human_decision(item));
  return out;
}

std::vector<GoldCase> ReviewStore::gold_cases() const {
  std::shared_lock lock(mutex_);
  std::vector<GoldCase> out;
  for (const auto& [id, item] : items_) {
    if (!item.resolution) continue;
    out.push_back(GoldCase{id, item.resolution->verdict, item.resolution->rationale,
                           item.resolution->annotation_seconds()});
  }
  return out;
}

void ReviewStore::compact() {
  std::unique_lock lock(mutex_);
  std::vector<nlohmann::json> lines;
  for (const auto& [id, item] : items_) lines.push_back({{"event", "snapshot"}, {"item", item}});
  jsonl::write(path_, lines);
}

}  // namespace softid::review
