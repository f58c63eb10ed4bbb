#include "softid/consensus/proxy.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "softid/core/jsonl.hpp"

namespace softid::consensus {

namespace {

constexpr std::string_view kSlotPrefix = "slot:";

}  // namespace

void validate(const ProxySpec& spec) {
  if (spec.name.empty()) throw ValidationError("proxy name must not be empty");
  if (spec.members.size() < 2)
    throw ValidationError("proxy '" + spec.name + "' needs at least two members");
  std::set<std::string> seen;
  for (const auto& m : spec.members) {
    if (m.empty()) throw ValidationError("proxy '" + spec.name + "' has an empty member");
    if (!seen.insert(m).second)
      throw ValidationError("proxy '" + spec.name + "' lists member '" + m + "' twice");
  }
}

std::string_view to_string(DeferReason reason) {
  return reason == DeferReason::kDisagreement ? "disagreement" : "member_skipped";
}

std::optional<DeferReason> parse_defer_reason(std::string_view text) {
  if (text == "disagreement") return DeferReason::kDisagreement;
  if (text == "member_skipped") return DeferReason::kMemberSkipped;
  return std::nullopt;
}

void to_json(nlohmann::json& j, const ProxyDecision& d) {
  j = nlohmann::json{{"schema", kSchemaVersion}, {"type", "proxy"},
                     {"pair_id", d.pair_id},     {"record_a", d.record_a},
                     {"record_b", d.record_b},   {"proxy", d.proxy}};
  if (const auto* v = d.verdict()) {
    j["outcome"] = "accepted";
    j["verdict"] = *v;
    j["defer_reason"] = nullptr;
  } else {
    j["outcome"] = "deferred";
    j["verdict"] = nullptr;
    j["defer_reason"] = to_string(std::get<DeferReason>(d.outcome));
  }
}

void from_json(const nlohmann::json& j, ProxyDecision& d) {
  check_schema(j);
  try {
    if (j.value("type", "proxy") != "proxy") throw ValidationError("not a proxy decision");
    d.pair_id = j.at("pair_id").get<std::string>();
    d.record_a = j.value("record_a", "");
    d.record_b = j.value("record_b", "");
    d.proxy = j.at("proxy").get<std::string>();
    const std::string outcome = j.at("outcome").get<std::string>();
    if (outcome == "accepted") {
      d.outcome = j.at("verdict").get<Verdict>();
    } else if (outcome == "deferred") {
      auto r = parse_defer_reason(j.at("defer_reason").get<std::string>());
      if (!r) throw ValidationError("unknown defer reason " + j.at("defer_reason").dump());
      d.outcome = *r;
    } else {
      throw ValidationError("unknown proxy outcome '" + outcome + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed proxy decision: ") + e.what());
  }
}

ProxyDecision run_proxy(const ProxySpec& spec,
                        const std::vector<adjudicator::AdjudicationResult>& results) {
  validate(spec);
  std::vector<const adjudicator::AdjudicationResult*> by_member(spec.members.size(), nullptr);
  std::string pair_id;
  for (const auto& r : results) {
    auto it = std::find(spec.members.begin(), spec.members.end(), r.model_id);
    if (it == spec.members.end()) continue;
    if (!pair_id.empty() && r.pair_id != pair_id)
      throw ValidationError("run_proxy received results for more than one pair");
    pair_id = r.pair_id;
    auto& slot = by_member[static_cast<std::size_t>(it - spec.members.begin())];
    if (slot != nullptr)
      throw ValidationError("pair '" + r.pair_id + "' has two results for model '" + r.model_id + "'");
    slot = &r;
  }
  for (std::size_t i = 0; i < by_member.size(); ++i) {
    if (by_member[i] == nullptr)
      throw ValidationError("proxy '" + spec.name + "' is missing a result from member '" +
                            spec.members[i] + "'" + (pair_id.empty() ? "" : " for pair " + pair_id));
  }

  ProxyDecision d;
  d.pair_id = pair_id;
  d.record_a = by_member.front()->record_a;
  d.record_b = by_member.front()->record_b;
  d.proxy = spec.name;

  if (std::any_of(by_member.begin(), by_member.end(), [](const auto* r) { return r->skipped(); })) {
    d.outcome = DeferReason::kMemberSkipped;
    return d;
  }
  const Label label = by_member.front()->verdict()->label;
  if (!std::all_of(by_member.begin(), by_member.end(),
                   [&](const auto* r) { return r->verdict()->label == label; })) {
    d.outcome = DeferReason::kDisagreement;
    return d;
  }

  Verdict accepted;
  accepted.label = label;
  for (std::size_t i = 0; i < by_member.size(); ++i) {
    const Verdict& v = *by_member[i]->verdict();
    if (v.confidence && (!accepted.confidence || *v.confidence < *accepted.confidence))
      accepted.confidence = v.confidence;
    if (i > 0) accepted.explanation += "\n\n";
    accepted.explanation += spec.members[i] + ": " + v.explanation;
  }
  d.outcome = accepted;
  return d;
}

std::vector<ProxyDecision> run_proxy_all(
    const ProxySpec& spec, const std::vector<adjudicator::AdjudicationResult>& results) {
  std::map<std::string, std::vector<adjudicator::AdjudicationResult>> by_pair;
  for (const auto& r : results) by_pair[r.pair_id].push_back(r);
  std::vector<ProxyDecision> out;
  out.reserve(by_pair.size());
  for (const auto& [pair_id, rs] : by_pair) out.push_back(run_proxy(spec, rs));
  return out;
}

Coverage proxy_coverage(const std::vector<ProxyDecision>& decisions) {
  Coverage c;
  for (const auto& d : decisions) (d.accepted() ? c.accepted_count : c.deferred_count)++;
  if (!decisions.empty())
    c.coverage_fraction = static_cast<double>(c.accepted_count) / static_cast<double>(decisions.size());
  return c;
}

std::optional<ResolutionDecision> to_resolution(const ProxyDecision& d) {
  const Verdict* v = d.verdict();
  if (v == nullptr || v->label == Label::kUnclear) return std::nullopt;
  return ResolutionDecision{d.pair_id, d.record_a, d.record_b, v->label, Origin::kModelProxy, d.proxy};
}

std::vector<ProxySpec> default_proxies() {
  return {
      {"proxy-i", {"slot:large-dense", "slot:large-smoe"}},
      {"proxy-ii", {"slot:small-dense", "slot:large-smoe"}},
      {"proxy-iii", {"slot:small-smoe", "slot:large-smoe"}},
      {"proxy-iv", {"slot:small-dense", "slot:small-smoe"}},
      {"proxy-v", {"slot:large-dense", "slot:small-smoe"}},
  };
}

std::vector<ProxySpec> parse_proxy_specs(const nlohmann::json& j) {
  std::vector<ProxySpec> out;
  std::set<std::string> names;
  try {
    for (const auto& p : j.at("proxies")) {
      ProxySpec s{p.at("name").get<std::string>(), p.at("members").get<std::vector<std::string>>()};
      validate(s);
      if (!names.insert(s.name).second) throw ValidationError("duplicate proxy name '" + s.name + "'");
      out.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed proxy config: ") + e.what());
  }
  return out;
}

std::vector<ProxySpec> load_proxy_specs(const std::filesystem::path& path) {
  const auto j = nlohmann::json::parse(jsonl::read_file(path), nullptr, false);
  if (j.is_discarded()) throw ValidationError(path.string() + ": not valid JSON");
  return parse_proxy_specs(j);
}

ProxySpec resolve_slots(const ProxySpec& spec, const adjudicator::ModelsConfig& models) {
  ProxySpec out{spec.name, {}};
  for (const auto& m : spec.members) {
    if (!m.starts_with(kSlotPrefix)) {
      out.members.push_back(m);
      continue;
    }
    const std::string slot = m.substr(kSlotPrefix.size());
    auto it = std::find_if(models.models.begin(), models.models.end(),
                           [&](const auto& mc) { return mc.slot == slot; });
    if (it == models.models.end())
      throw ValidationError("proxy '" + spec.name + "': no model fills slot '" + slot + "'");
    out.members.push_back(it->id);
  }
  validate(out);
  return out;
}

}  // namespace softid::consensus
