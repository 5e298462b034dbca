#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "json.hpp"

#include "netsem/diagnose.hpp"
#include "netsem/error.hpp"
#include "netsem/format.hpp"

namespace netsem {

namespace {

constexpr std::string_view kHeaders[] = {"SEMANTIC", "SYMBOLIC", "KNOWLEDGE", "PROBLEM"};

std::string strip_trailing_newlines(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

std::string bound_text(const AnomalyFinding& f) {
  if (f.lo && f.hi) return "[" + format_shortest(*f.lo) + ", " + format_shortest(*f.hi) + "]";
  if (f.hi) return "<= " + format_shortest(*f.hi);
  if (f.lo) return ">= " + format_shortest(*f.lo);
  return "none";
}

double excess(const AnomalyFinding& f) {
  double e = 0;
  if (f.lo) e = std::max(e, *f.lo - f.observed);
  if (f.hi) e = std::max(e, f.observed - *f.hi);
  return e;
}

}  // namespace

std::string DiagnosisContext::render() const {
  const std::string* blocks[] = {&semantic_block, &symbolic_block, &knowledge_block, &problem_statement};
  std::string out;
  for (std::size_t i = 0; i < 4; ++i) {
    if (i) out += "\n";
    out += kHeaders[i];
    out += "\n";
    auto body = strip_trailing_newlines(*blocks[i]);
    out += body.empty() ? std::string(kOmitted) : body;
    out += "\n";
  }
  return out;
}

std::optional<std::string> DiagnosisContext::section_of(std::string_view rendered, std::string_view header) {
  auto lines = split(rendered, '\n');
  std::size_t i = 0;
  while (i < lines.size() && lines[i] != header) ++i;
  if (i == lines.size()) return std::nullopt;
  std::vector<std::string> body;
  for (++i; i < lines.size(); ++i) {
    if (std::find(std::begin(kHeaders), std::end(kHeaders), lines[i]) != std::end(kHeaders)) break;
    body.push_back(lines[i]);
  }
  return strip_trailing_newlines(join(body, "\n"));
}

std::string make_problem_statement(const std::vector<AnomalyFinding>& findings) {
  if (findings.empty()) return std::string(kNoViolationSentence);
  std::map<std::pair<std::string, std::string>, std::vector<const AnomalyFinding*>> groups;
  for (const auto& f : findings) groups[{f.entity, f.kpi}].push_back(&f);
  std::vector<std::string> sentences;
  for (const auto& [key, fs] : groups) {
    const AnomalyFinding* worst = fs.front();
    Timestamp start = fs.front()->window.start, end = fs.front()->window.end;
    std::set<std::string> rules;
    for (const auto* f : fs) {
      if (excess(*f) > excess(*worst)) worst = f;
      start = std::min(start, f->window.start);
      end = std::max(end, f->window.end);
      rules.insert(f->violated_rule);
    }
    sentences.push_back("Device " + key.first + " has " + key.second + " at " + format_shortest(worst->observed) +
                        " outside the bound " + bound_text(*worst) + " (rule " +
                        join({rules.begin(), rules.end()}, ", ") + ") between " + std::to_string(start) +
                        " and " + std::to_string(end) + " ms.");
  }
  return join(sentences, "\n");
}

DiagnosisContext concat_context(std::string semantic, std::string symbolic, std::string knowledge,
                                std::string problem) {
  auto fill = [](std::string s) {
    s = strip_trailing_newlines(std::move(s));
    return trim(s).empty() ? std::string(kOmitted) : s;
  };
  return {fill(std::move(semantic)), fill(std::move(symbolic)), fill(std::move(knowledge)),
          fill(std::move(problem))};
}

std::string_view to_string(CheckKind k) {
  switch (k) {
    case CheckKind::traffic_stats: return "traffic_stats";
    case CheckKind::routing_table: return "routing_table";
    case CheckKind::interface_status: return "interface_status";
    case CheckKind::signal: return "signal";
    case CheckKind::config: return "config";
    case CheckKind::generic: return "generic";
  }
  return "generic";
}

std::optional<CheckKind> parse_check_kind(std::string_view text) {
  for (auto k : {CheckKind::traffic_stats, CheckKind::routing_table, CheckKind::interface_status,
                 CheckKind::signal, CheckKind::config, CheckKind::generic})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

CheckKind infer_check_kind(std::string_view description) {
  const auto d = to_lower(description);
  auto has = [&](std::string_view w) { return d.find(w) != std::string::npos; };
  if (has("traffic")) return CheckKind::traffic_stats;
  if (has("routing") || has("route")) return CheckKind::routing_table;
  if (has("interface") || has("port")) return CheckKind::interface_status;
  if (has("signal") || has("rssi")) return CheckKind::signal;
  if (has("config")) return CheckKind::config;
  return CheckKind::generic;
}

std::vector<Blueprint> generate_blueprints(const EntitySet& anomalous, const std::vector<AnomalyFinding>& findings,
                                           const RetrievalResult& subgraph) {
  if (anomalous.empty()) return {};
  std::map<std::string, std::set<std::string>> out_edges;
  for (const auto& r : subgraph.relations) out_edges[r.subject].insert(r.object);
  for (const auto& f : findings) out_edges[f.entity].insert(f.kpi);
  std::set<std::string> fault_types;
  for (const auto& e : subgraph.entities)
    if (e.kind == EntityKind::fault_type) fault_types.insert(e.id);

  std::map<std::string, std::vector<std::string>> evidence;  // cause -> entities
  for (const auto& n : anomalous.ids()) {
    std::set<std::string> seen{n};
    std::deque<std::string> queue{n};
    while (!queue.empty()) {
      auto cur = queue.front();
      queue.pop_front();
      if (cur != n && fault_types.count(cur)) evidence[cur].push_back(n);
      auto it = out_edges.find(cur);
      if (it == out_edges.end()) continue;
      for (const auto& next : it->second)
        if (seen.insert(next).second) queue.push_back(next);
    }
  }

  std::vector<Blueprint> out;
  if (evidence.empty()) {
    out.push_back({"k1", std::string(kUnknownCause), anomalous, {}});
    return out;
  }
  for (auto& [cause, ids] : evidence)
    out.push_back({"k" + std::to_string(out.size() + 1), cause, EntitySet(ids), {}});
  return out;
}

std::vector<DiagnosticStep> extract_plan(const Blueprint& b, const KnowledgeGraph& g) {
  struct Declared {
    long long order;
    std::string id, description;
    CheckKind kind;
  };
  std::vector<Declared> declared;
  for (const auto& r : g.out_edges(b.cause)) {
    if (r.predicate != "diagnosed_by") continue;
    const auto* e = g.entity(r.object);
    if (!e) continue;
    Declared d{0, e->id, e->name.empty() ? e->id : e->name, CheckKind::generic};
    const auto* order = g.fact(e->id, "order");
    d.order = order ? parse_int(order->value).value_or(1LL << 40) : (1LL << 40);
    const auto* kind = g.fact(e->id, "check_kind");
    auto parsed = kind ? parse_check_kind(kind->value) : std::nullopt;
    d.kind = parsed ? *parsed : infer_check_kind(d.description);
    declared.push_back(std::move(d));
  }
  std::sort(declared.begin(), declared.end(),
            [](const Declared& a, const Declared& c) { return std::tie(a.order, a.id) < std::tie(c.order, c.id); });

  std::vector<std::string> targets = b.evidence.ids();
  if (targets.empty()) targets.push_back(b.cause);
  std::vector<DiagnosticStep> steps;
  if (declared.empty()) {
    for (const auto& t : targets) {
      steps.push_back({"review the KPI history of " + t, CheckKind::generic, t, true});
      steps.push_back({"check network interface status of " + t, CheckKind::interface_status, t, true});
    }
    return steps;
  }
  for (const auto& d : declared)
    for (const auto& t : targets) steps.push_back({d.description, d.kind, t, false});
  return steps;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::confirmed: return "confirmed";
    case Verdict::ruled_out: return "ruled_out";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

std::optional<Verdict> parse_verdict(std::string_view text) {
  const auto t = to_lower(trim(text));
  for (auto v : {Verdict::confirmed, Verdict::ruled_out, Verdict::inconclusive})
    if (to_string(v) == t) return v;
  return std::nullopt;
}

bool is_valid_fault_type(std::string_view fault_type) {
  if (fault_type == "normal" || fault_type == "unknown") return true;
  for (auto c : kAllCategories)
    if (display_name(c) == fault_type) return true;
  return false;
}

std::optional<ReportFields> parse_report_fields(std::string_view text) {
  ReportFields r;
  std::string* current = nullptr;
  bool in_solutions = false;
  bool seen[5] = {};
  for (auto raw : split(text, '\n')) {
    auto line = trim(raw);
    if (line.empty()) continue;
    auto colon = line.find(':');
    std::string key = colon == std::string_view::npos ? "" : to_lower(trim(line.substr(0, colon)));
    std::string value = colon == std::string_view::npos ? "" : std::string(trim(line.substr(colon + 1)));
    std::string* field = nullptr;
    int slot = -1;
    if (key == "fault_type" || key == "fault type") field = &r.fault_type, slot = 0;
    else if (key == "phenomenon") field = &r.phenomenon, slot = 1;
    else if (key == "explanation") field = &r.explanation, slot = 2;
    else if (key == "summary") field = &r.summary, slot = 3;
    if (field) {
      *field = value;
      seen[slot] = true;
      current = field;
      in_solutions = false;
      continue;
    }
    if (key == "solutions") {
      seen[4] = true;
      in_solutions = true;
      current = nullptr;
      if (!value.empty()) r.solutions.push_back(value);
      continue;
    }
    if (in_solutions && (line.front() == '-' || line.front() == '*')) {
      auto item = std::string(trim(line.substr(1)));
      if (!item.empty()) r.solutions.push_back(item);
    } else if (current) {
      *current += " " + std::string(line);
    }
  }
  for (bool s : seen)
    if (!s) return std::nullopt;
  if (r.phenomenon.empty() || r.explanation.empty() || r.summary.empty() || r.solutions.empty()) return std::nullopt;
  const auto lowered = to_lower(r.fault_type);
  if (lowered == "normal" || lowered == "unknown") {
    r.fault_type = lowered;
  } else if (auto c = parse_category(r.fault_type)) {
    r.fault_type = std::string(display_name(*c));
  } else {
    return std::nullopt;
  }
  return r;
}

namespace {

nlohmann::json finding_json(const AnomalyFinding& f) {
  nlohmann::json j = {{"entity", f.entity},
                      {"kpi", f.kpi},
                      {"observed", f.observed},
                      {"rule", f.violated_rule},
                      {"start_ms", f.window.start},
                      {"end_ms", f.window.end}};
  j["lo"] = f.lo ? nlohmann::json(*f.lo) : nlohmann::json(nullptr);
  j["hi"] = f.hi ? nlohmann::json(*f.hi) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

std::string DiagnosisReport::to_json() const {
  nlohmann::json j;
  j["fault_type"] = fault_type;
  j["phenomenon"] = phenomenon;
  j["explanation"] = explanation;
  j["summary"] = summary;
  j["solutions"] = solutions;
  j["per_blueprint"] = nlohmann::json::array();
  for (const auto& v : per_blueprint)
    j["per_blueprint"].push_back(
        {{"id", v.id}, {"cause", v.cause}, {"verdict", std::string(to_string(v.verdict))}, {"evidence", v.evidence}});
  j["anomalies"] = nlohmann::json::array();
  for (const auto& f : anomalies) j["anomalies"].push_back(finding_json(f));
  return j.dump(2) + "\n";
}

std::string DiagnosisReport::to_text() const {
  std::string out;
  out += "Fault type: " + fault_type + "\n";
  out += "Phenomenon: " + phenomenon + "\n";
  out += "Explanation: " + explanation + "\n";
  out += "Summary: " + summary + "\n";
  out += "Solutions:\n";
  for (std::size_t i = 0; i < solutions.size(); ++i)
    out += "  " + std::to_string(i + 1) + ". " + solutions[i] + "\n";
  if (!per_blueprint.empty()) {
    out += "Blueprints:\n";
    for (const auto& v : per_blueprint) {
      out += "  " + v.id + " " + v.cause + ": " + std::string(to_string(v.verdict));
      if (!v.evidence.empty()) out += " (" + join(v.evidence, ", ") + ")";
      out += "\n";
    }
  }
  if (!anomalies.empty()) {
    out += "Findings:\n";
    for (const auto& f : anomalies) out += "  " + f.to_text() + "\n";
  }
  return out;
}

DiagnosisReport DiagnosisReport::from_json(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) throw Error(Errc::ParseError, "report is not valid JSON");
  try {
    DiagnosisReport r;
    r.fault_type = j.at("fault_type").get<std::string>();
    r.phenomenon = j.at("phenomenon").get<std::string>();
    r.explanation = j.at("explanation").get<std::string>();
    r.summary = j.at("summary").get<std::string>();
    r.solutions = j.at("solutions").get<std::vector<std::string>>();
    for (const auto& v : j.at("per_blueprint")) {
      auto verdict = parse_verdict(v.at("verdict").get<std::string>());
      if (!verdict) throw Error(Errc::ParseError, "bad verdict in report");
      r.per_blueprint.push_back({v.at("id").get<std::string>(), v.at("cause").get<std::string>(), *verdict,
                                 v.at("evidence").get<std::vector<std::string>>()});
    }
    for (const auto& f : j.at("anomalies")) {
      AnomalyFinding a;
      a.entity = f.at("entity").get<std::string>();
      a.kpi = f.at("kpi").get<std::string>();
      a.observed = f.at("observed").get<double>();
      a.violated_rule = f.at("rule").get<std::string>();
      if (!f.at("lo").is_null()) a.lo = f.at("lo").get<double>();
      if (!f.at("hi").is_null()) a.hi = f.at("hi").get<double>();
      a.window = {f.at("start_ms").get<Timestamp>(), f.at("end_ms").get<Timestamp>()};
      r.anomalies.push_back(std::move(a));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::ParseError, std::string("report schema: ") + e.what());
  }
}

std::vector<std::string> validate_report_json(std::string_view text) {
  std::vector<std::string> issues;
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return {"not a JSON object"};
  for (const char* key : {"fault_type", "phenomenon", "explanation", "summary"}) {
    if (!j.contains(key) || !j[key].is_string()) issues.push_back(std::string(key) + " missing");
    else if (trim(j[key].get<std::string>()).empty()) issues.push_back(std::string(key) + " empty");
  }
  if (j.contains("fault_type") && j["fault_type"].is_string() &&
      !is_valid_fault_type(j["fault_type"].get<std::string>()))
    issues.push_back("fault_type not a known category");
  if (!j.contains("solutions") || !j["solutions"].is_array() || j["solutions"].empty()) {
    issues.push_back("solutions missing or empty");
  } else {
    for (const auto& s : j["solutions"])
      if (!s.is_string() || trim(s.get<std::string>()).empty()) issues.push_back("solution entry empty");
  }
  if (!j.contains("per_blueprint") || !j["per_blueprint"].is_array()) issues.push_back("per_blueprint missing");
  if (!j.contains("anomalies") || !j["anomalies"].is_array()) issues.push_back("anomalies missing");
  return issues;
}

std::string verdict_prompt(const DiagnosisContext& ctx, const Blueprint& b) {
  std::string p(prompt_marker::kVerdict);
  p += "\nBLUEPRINT " + b.id + ": cause=" + b.cause + "\n";
  p += "evidence: " + join(b.evidence.ids(), ", ") + "\n";
  p += "steps:\n";
  for (std::size_t i = 0; i < b.steps.size(); ++i) {
    const auto& s = b.steps[i];
    p += std::to_string(i + 1) + ". " + s.description + " [" + std::string(to_string(s.check_kind)) + "] on " +
         s.target + "\n";
  }
  p +=
      "Follow the steps against the context below and decide whether the candidate cause explains the "
      "problem. Answer with two lines: \"verdict: confirmed\", \"verdict: ruled_out\" or \"verdict: "
      "inconclusive\", then \"evidence: \" followed by the supporting KPI or entity names.\n";
  p += "CONTEXT\n";
  p += ctx.render();
  return p;
}

std::string synthesis_prompt(const DiagnosisContext& ctx, const std::vector<BlueprintVerdict>& verdicts) {
  std::string p(prompt_marker::kSynthesis);
  p +=
      "\nCombine the blueprint verdicts into one fault report. Answer in exactly this format:\n"
      "fault_type: <Application Crash | Malicious Traffic | Network Congestion | Network Node Crash | "
      "Out of Communication Range | Communication Obstacles | normal | unknown>\n"
      "phenomenon: <observed symptoms>\n"
      "explanation: <reasoning>\n"
      "summary: <one sentence>\n"
      "solutions:\n- <action>\n";
  p += "CONTEXT\n";
  p += ctx.render();
  p += "VERDICTS\n";
  for (const auto& v : verdicts) {
    p += v.id + " " + v.cause + " " + std::string(to_string(v.verdict)) + " evidence=" +
         (v.evidence.empty() ? std::string("none") : join(v.evidence, ",")) + "\n";
  }
  return p;
}

namespace {

BlueprintVerdict read_verdict(const Blueprint& b, const std::string& response) {
  BlueprintVerdict v{b.id, b.cause, Verdict::inconclusive, {}};
  for (auto raw : split(response, '\n')) {
    auto line = trim(raw);
    auto lower = to_lower(line);
    if (starts_with(lower, "verdict:")) {
      if (auto parsed = parse_verdict(line.substr(8))) v.verdict = *parsed;
    } else if (starts_with(lower, "evidence:")) {
      for (auto& item : split(line.substr(9), ',')) {
        auto t = std::string(trim(item));
        if (!t.empty() && t != "none") v.evidence.push_back(t);
      }
    }
  }
  std::sort(v.evidence.begin(), v.evidence.end());
  v.evidence.erase(std::unique(v.evidence.begin(), v.evidence.end()), v.evidence.end());
  return v;
}

}  // namespace

DiagnosisReport run_diagnosis(const DiagnosisContext& ctx, const std::vector<Blueprint>& blueprints,
                              LlmProvider& provider, const DiagnosisConfig& config,
                              const std::vector<AnomalyFinding>& findings) {
  if (blueprints.empty()) throw Error(Errc::EmptyList, "run_diagnosis needs at least one blueprint");
  DiagnosisReport report;
  report.anomalies = findings;
  for (const auto& b : blueprints)
    report.per_blueprint.push_back(read_verdict(b, provider.complete(verdict_prompt(ctx, b), 0.0, config.seed)));

  const auto raw = provider.complete(synthesis_prompt(ctx, report.per_blueprint), config.temperature, config.seed);
  auto fields = parse_report_fields(raw);
  if (!fields) {
    std::string retry(prompt_marker::kReformat);
    retry +=
        "\nRewrite the text below into the report format with the keys fault_type, phenomenon, explanation, "
        "summary and solutions (one \"- \" line per solution).\nRAW\n" +
        raw;
    fields = parse_report_fields(provider.complete(retry, 0.0, config.seed));
  }
  if (!fields) {
    report.fault_type = "unknown";
    report.phenomenon = "the provider response could not be parsed";
    report.explanation = trim(raw).empty() ? std::string("(empty provider response)") : raw;
    report.summary = "no reliable diagnosis could be produced";
    report.solutions = {"rerun the diagnosis or inspect the raw provider output"};
    return report;
  }
  report.fault_type = fields->fault_type;
  report.phenomenon = fields->phenomenon;
  report.explanation = fields->explanation;
  report.summary = fields->summary;
  report.solutions = fields->solutions;
  return report;
}

DiagnosisReport normal_report(const std::vector<AnomalyFinding>& findings) {
  DiagnosisReport r;
  r.fault_type = "normal";
  r.phenomenon = "all KPIs are within their thresholds";
  r.explanation = "no anomalous entity was detected, so no fault blueprint was generated";
  r.summary = "the network is operating normally";
  r.solutions = {"continue routine monitoring"};
  r.anomalies = findings;
  return r;
}

}  // namespace netsem
