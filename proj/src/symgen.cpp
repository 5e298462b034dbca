#include "netsem/symgen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "netsem/error.hpp"
#include "netsem/format.hpp"
#include "netsem/nkg.hpp"

namespace netsem {

std::string FactAtom::to_string() const { return predicate + "(" + join(args, ", ") + ")"; }

FactSet::FactSet(std::vector<FactAtom> atoms) {
  std::sort(atoms.begin(), atoms.end());
  atoms.erase(std::unique(atoms.begin(), atoms.end()), atoms.end());
  for (const auto& a : atoms) check_arity(a);
  atoms_ = std::move(atoms);
}

void FactSet::check_arity(const FactAtom& atom) {
  if (atom.predicate.empty()) throw Error(Errc::SchemaViolation, "fact predicate must be non-empty");
  auto [it, inserted] = arity_.emplace(atom.predicate, atom.args.size());
  if (!inserted && it->second != atom.args.size())
    throw Error(Errc::SchemaViolation, "predicate " + atom.predicate + " used with two arities");
}

void FactSet::insert(FactAtom atom) {
  check_arity(atom);
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), atom);
  if (it != atoms_.end() && *it == atom) return;
  atoms_.insert(it, std::move(atom));
}

bool FactSet::contains(const FactAtom& atom) const {
  return std::binary_search(atoms_.begin(), atoms_.end(), atom);
}

std::vector<FactAtom> FactSet::with_predicate(std::string_view predicate) const {
  std::vector<FactAtom> out;
  for (const auto& a : atoms_)
    if (a.predicate == predicate) out.push_back(a);
  return out;
}

std::string FactSet::to_text() const {
  std::string out;
  for (const auto& a : atoms_) out += a.to_string() + "\n";
  return out;
}

FactSet extract_facts(const Topology& topology, const std::map<std::string, DeviceProfile>& profiles,
                      const PortStates& port_states) {
  for (const auto& [device, ports] : port_states)
    if (!topology.nodes.count(device))
      throw Error(Errc::UnknownDevice, "port state reported for unknown device " + device);

  std::vector<FactAtom> atoms;
  for (const auto& [a, b] : topology.edges) {
    auto e = make_edge(a, b);
    atoms.push_back({"connected", {e.first, e.second}});
  }
  for (const auto& node : topology.nodes) {
    auto p = profiles.find(node);
    auto cls = p == profiles.end() ? DeviceClass::generic : p->second.device_class;
    atoms.push_back({"class", {node, std::string(to_string(cls))}});
  }
  for (const auto& [device, ports] : port_states)
    for (const auto& [port, up] : ports) atoms.push_back({up ? "port_up" : "port_down", {device, port}});

  return FactSet(std::move(atoms));
}

std::set<std::string> silent_devices(const Dataset& d, TimeWindow window) {
  std::set<std::string> out;
  for (const auto& [id, s] : d.series) {
    auto tp = s.kpi_index("throughput_mbps");
    auto pr = s.kpi_index("packet_rate_pps");
    if (!tp || !pr) continue;
    const SeriesRow* last = nullptr;
    for (const auto& row : s.rows)
      if (window.contains(row.timestamp)) last = &row;
    if (last && last->values[*tp] == 0.0 && last->values[*pr] == 0.0) out.insert(id);
  }
  return out;
}

PortStates infer_port_states(const Dataset& d, TimeWindow window) {
  const auto silent = silent_devices(d, window);
  PortStates states;
  for (const auto& [a, b] : d.topology.edges) {
    states[a][b] = !silent.count(b);
    states[b][a] = !silent.count(a);
  }
  return states;
}

std::string_view to_string(Aggregation a) {
  switch (a) {
    case Aggregation::last: return "last";
    case Aggregation::mean: return "mean";
    case Aggregation::max: return "max";
  }
  return "last";
}

std::optional<Aggregation> parse_aggregation(std::string_view text) {
  for (auto a : {Aggregation::last, Aggregation::mean, Aggregation::max})
    if (to_string(a) == text) return a;
  return std::nullopt;
}

const KpiEntry* KpiFeatureVector::find(std::string_view kpi) const {
  for (const auto& e : entries)
    if (e.kpi == kpi) return &e;
  return nullptr;
}

KpiFeatureVector kpi_vector(const DeviceSeries& series, TimeWindow window, Aggregation aggregation) {
  std::vector<const SeriesRow*> rows;
  for (const auto& row : series.rows)
    if (window.contains(row.timestamp)) rows.push_back(&row);
  if (rows.empty())
    throw Error(Errc::EmptyWindow, "no rows of " + series.device_id + " inside [" + std::to_string(window.start) +
                                       ", " + std::to_string(window.end) + ")");
  KpiFeatureVector v{series.device_id, {}, window};
  for (std::size_t k = 0; k < series.kpi_names.size(); ++k) {
    double value = 0;
    switch (aggregation) {
      case Aggregation::last: value = rows.back()->values[k]; break;
      case Aggregation::mean: {
        double sum = 0;
        for (const auto* r : rows) sum += r->values[k];
        value = sum / static_cast<double>(rows.size());
        break;
      }
      case Aggregation::max: {
        value = rows.front()->values[k];
        for (const auto* r : rows) value = std::max(value, r->values[k]);
        break;
      }
    }
    v.entries.push_back({series.kpi_names[k], value, series.units[k]});
  }
  return v;
}

std::string RuleScope::to_string() const {
  switch (kind) {
    case Kind::all: return "all";
    case Kind::device_class: return value;
    case Kind::device_id: return "device:" + value;
  }
  return "all";
}

bool Rule::violated_by(double observed) const {
  switch (relation) {
    case RuleRelation::at_most: return observed > hi;
    case RuleRelation::at_least: return observed < lo;
    case RuleRelation::within: return observed < lo || observed > hi;
  }
  return false;
}

std::string format_threshold(const Rule& rule) {
  switch (rule.relation) {
    case RuleRelation::at_most: return "<= " + format_shortest(rule.hi);
    case RuleRelation::at_least: return ">= " + format_shortest(rule.lo);
    case RuleRelation::within:
      return "within [" + format_shortest(rule.lo) + "," + format_shortest(rule.hi) + "]";
  }
  return "";
}

std::string Rule::to_text() const {
  return "rule " + rule_id + ": " + scope.to_string() + "." + kpi + " " + format_threshold(*this) + " [" + unit +
         "] severity=" + (severity == Severity::fault ? "fault" : "warning") + " from=" + provenance;
}

std::optional<ParsedThreshold> parse_threshold(std::string_view text) {
  auto t = trim(text);
  ParsedThreshold out{};
  std::string_view rest;
  if (starts_with(t, "within")) {
    t.remove_prefix(6);
    t = trim(t);
    if (t.empty() || t.front() != '[') return std::nullopt;
    auto close = t.find(']');
    if (close == std::string_view::npos) return std::nullopt;
    auto parts = split(t.substr(1, close - 1), ',');
    if (parts.size() != 2) return std::nullopt;
    auto lo = parse_double(parts[0]);
    auto hi = parse_double(parts[1]);
    if (!lo || !hi || !std::isfinite(*lo) || !std::isfinite(*hi) || !(*lo < *hi)) return std::nullopt;
    out.relation = RuleRelation::within;
    out.lo = *lo;
    out.hi = *hi;
    rest = t.substr(close + 1);
  } else {
    bool at_most = false;
    if (starts_with(t, "<=")) { at_most = true; t.remove_prefix(2); }
    else if (starts_with(t, "\xE2\x89\xA4")) { at_most = true; t.remove_prefix(3); }
    else if (starts_with(t, ">=")) { t.remove_prefix(2); }
    else if (starts_with(t, "\xE2\x89\xA5")) { t.remove_prefix(3); }
    else return std::nullopt;
    t = trim(t);
    auto sp = t.find(' ');
    auto num = parse_double(t.substr(0, sp));
    if (!num || !std::isfinite(*num)) return std::nullopt;
    out.relation = at_most ? RuleRelation::at_most : RuleRelation::at_least;
    (at_most ? out.hi : out.lo) = *num;
    rest = sp == std::string_view::npos ? std::string_view{} : t.substr(sp);
  }
  rest = trim(rest);
  if (!rest.empty()) {
    if (rest.front() == '[' && rest.back() == ']') rest = rest.substr(1, rest.size() - 2);
    out.unit = std::string(rest);
  }
  return out;
}

std::string RuleSet::to_text() const {
  std::string out;
  for (const auto& r : rules) out += r.to_text() + "\n";
  return out;
}

std::vector<Rule> builtin_rules(const RuleScope& scope) {
  const std::string prefix =
      scope.kind == RuleScope::Kind::all ? std::string("builtin.") : "builtin." + scope.value + ".";
  auto make = [&](std::string kpi, RuleRelation rel, double lo, double hi, std::string unit) {
    return Rule{prefix + kpi, scope, kpi, rel, lo, hi, std::move(unit), Severity::fault, "builtin"};
  };
  return {
      make("delay_ms", RuleRelation::within, 0, 100, "ms"),
      make("error_rate_pct", RuleRelation::within, 0, 2, "%"),
      make("packet_loss_pct", RuleRelation::within, 0, 5, "%"),
      make("rssi_dbm", RuleRelation::at_least, -90, 0, "dBm"),
      make("throughput_mbps", RuleRelation::at_least, 0.1, 0, "Mbps"),
  };
}

RuleSet derive_rules(const DeviceProfile& profile, const KnowledgeGraph& kg) {
  const std::string cls(to_string(profile.device_class));
  const RuleScope scope{RuleScope::Kind::device_class, cls};
  RuleSet out;

  std::map<std::string, std::pair<std::string, std::string>> statements;  // kpi -> (text, provenance)
  for (const auto& edge : kg.out_edges(cls)) {
    if (edge.predicate != "has_metric") continue;
    if (const auto* f = kg.fact(edge.object, "threshold")) statements[edge.object] = {f->value, edge.object};
  }
  constexpr std::string_view kPrefix = "threshold:";
  for (const auto& f : kg.facts_of(cls))
    if (starts_with(f.attribute, kPrefix)) statements[f.attribute.substr(kPrefix.size())] = {f.value, cls};

  for (const auto& [kpi, stmt] : statements) {
    auto parsed = parse_threshold(stmt.first);
    if (!parsed) {
      out.malformed.push_back(cls + "." + kpi + ": '" + stmt.first + "'");
      continue;
    }
    out.rules.push_back(Rule{"kg." + cls + "." + kpi, scope, kpi, parsed->relation, parsed->lo, parsed->hi,
                             parsed->unit.value_or(default_unit(kpi)), Severity::fault, stmt.second});
  }
  if (out.rules.empty()) {
    out.rules = builtin_rules(scope);
    out.builtin_defaults = true;
    out.warnings.push_back("no knowledge-graph thresholds for class " + cls + "; using builtin defaults");
  }
  std::sort(out.rules.begin(), out.rules.end(), [](const Rule& a, const Rule& b) {
    return std::tie(a.kpi, a.rule_id) < std::tie(b.kpi, b.rule_id);
  });
  return out;
}

std::string AnomalyFinding::to_text() const {
  std::string bounds;
  if (lo && hi) bounds = "within [" + format_shortest(*lo) + "," + format_shortest(*hi) + "]";
  else if (hi) bounds = "<= " + format_shortest(*hi);
  else if (lo) bounds = ">= " + format_shortest(*lo);
  return "finding " + entity + "." + kpi + " observed=" + format_shortest(observed) + " violates " + violated_rule +
         " (" + bounds + ") during [" + std::to_string(window.start) + "," + std::to_string(window.end) + ")";
}

FactSet propagate(const FactSet& facts) {
  FactSet derived;
  for (const auto& atom : facts.with_predicate("port_down")) {
    auto e = make_edge(atom.args.at(0), atom.args.at(1));
    derived.insert({"link_down", {e.first, e.second}});
  }
  return derived;
}

namespace {

bool in_scope(const Rule& rule, const std::string& device, const FactSet& facts) {
  switch (rule.scope.kind) {
    case RuleScope::Kind::all: return true;
    case RuleScope::Kind::device_id: return rule.scope.value == device;
    case RuleScope::Kind::device_class: return facts.contains({"class", {device, rule.scope.value}});
  }
  return false;
}

bool finding_order(const AnomalyFinding& a, const AnomalyFinding& b) {
  return std::tie(a.entity, a.kpi, a.violated_rule, a.window.start, a.window.end, a.observed) <
         std::tie(b.entity, b.kpi, b.violated_rule, b.window.start, b.window.end, b.observed);
}

}  // namespace

std::vector<AnomalyFinding> evaluate_rules(const std::vector<Rule>& rules, const FactSet& facts,
                                           const std::vector<KpiFeatureVector>& vectors,
                                           const ExternalSolver& solver) {
  std::vector<AnomalyFinding> out;
  std::map<std::string, TimeWindow> windows;
  for (const auto& v : vectors) {
    windows[v.device_id] = v.window;
    for (const auto& rule : rules) {
      if (!in_scope(rule, v.device_id, facts)) continue;
      const auto* entry = v.find(rule.kpi);
      if (!entry) continue;
      if (entry->unit != rule.unit)
        throw Error(Errc::UnitMismatch, "rule " + rule.rule_id + " expects [" + rule.unit + "] but " + v.device_id +
                                            "." + rule.kpi + " is [" + entry->unit + "]");
      if (!rule.violated_by(entry->value)) continue;
      AnomalyFinding f{v.device_id, rule.kpi, entry->value, rule.rule_id, std::nullopt, std::nullopt, v.window};
      if (rule.relation != RuleRelation::at_most) f.lo = rule.lo;
      if (rule.relation != RuleRelation::at_least) f.hi = rule.hi;
      out.push_back(std::move(f));
    }
  }

  // One round of ground forward propagation over port facts.
  for (const auto& atom : facts.with_predicate("port_down")) {
    const auto& reporter = atom.args.at(0);
    const auto& far_end = atom.args.at(1);
    TimeWindow w{};
    if (auto it = windows.find(far_end); it != windows.end()) w = it->second;
    else if (auto it2 = windows.find(reporter); it2 != windows.end()) w = it2->second;
    out.push_back({far_end, std::string(kPortStateKpi), 0.0, std::string(kPortDownRule), 1.0, std::nullopt, w});
  }

  if (solver) {
    auto extra = solver(rules, facts, vectors);
    out.insert(out.end(), extra.begin(), extra.end());
  }
  std::sort(out.begin(), out.end(), finding_order);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EntitySet::EntitySet(std::vector<std::string> ids) : ids_(std::move(ids)) {
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool EntitySet::contains(std::string_view id) const {
  return std::binary_search(ids_.begin(), ids_.end(), id);
}

EntitySet anomalous_entities(const std::vector<AnomalyFinding>& findings) {
  std::vector<std::string> ids;
  for (const auto& f : findings) ids.push_back(f.entity);
  return EntitySet(std::move(ids));
}

std::vector<AnomalyFinding> coalesce_findings(const std::vector<AnomalyFinding>& findings, Timestamp max_gap) {
  auto sorted = findings;
  std::sort(sorted.begin(), sorted.end(), finding_order);
  auto excess = [](const AnomalyFinding& f) {
    double e = 0;
    if (f.lo) e = std::max(e, *f.lo - f.observed);
    if (f.hi) e = std::max(e, f.observed - *f.hi);
    return e;
  };
  std::vector<AnomalyFinding> out;
  for (const auto& f : sorted) {
    if (!out.empty()) {
      auto& cur = out.back();
      if (cur.entity == f.entity && cur.kpi == f.kpi && cur.violated_rule == f.violated_rule &&
          f.window.start - cur.window.end <= max_gap) {
        cur.window.end = std::max(cur.window.end, f.window.end);
        if (excess(f) > excess(cur)) cur.observed = f.observed;
        continue;
      }
    }
    out.push_back(f);
  }
  return out;
}

}  // namespace netsem
