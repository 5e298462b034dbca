#pragma once

// Symbolization: first-order facts over topology and device state,
// per-device KPI feature vectors, threshold rules sourced from the
// knowledge graph, and a direct constraint evaluator.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netsem/datamodel.hpp"

namespace netsem {

class KnowledgeGraph;

struct FactAtom {
  std::string predicate;
  std::vector<std::string> args;

  std::string to_string() const;  // "connected(a, b)"
  friend auto operator<=>(const FactAtom&, const FactAtom&) = default;
};

/// Sorted, duplicate-free atoms; arity is fixed per predicate.
class FactSet {
 public:
  FactSet() = default;
  explicit FactSet(std::vector<FactAtom> atoms);

  void insert(FactAtom atom);
  const std::vector<FactAtom>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  bool contains(const FactAtom& atom) const;
  std::vector<FactAtom> with_predicate(std::string_view predicate) const;
  std::string to_text() const;
  friend bool operator==(const FactSet& a, const FactSet& b) { return a.atoms_ == b.atoms_; }

 private:
  void check_arity(const FactAtom& atom);

  std::vector<FactAtom> atoms_;
  std::map<std::string, std::size_t> arity_;
};

/// device -> (port -> up?). A port is named after the peer it faces.
using PortStates = std::map<std::string, std::map<std::string, bool>>;

/// connected(a, b) per edge with a < b, class(d, c) per device, and
/// port_up/port_down(d, p) per reported port.
FactSet extract_facts(const Topology& topology, const std::map<std::string, DeviceProfile>& profiles,
                      const PortStates& port_states = {});

/// Devices whose throughput_mbps and packet_rate_pps are both zero at the
/// last row inside `window`.
std::set<std::string> silent_devices(const Dataset& d, TimeWindow window);

/// Port of every neighbor facing a silent device is down; all other
/// topology ports are up.
PortStates infer_port_states(const Dataset& d, TimeWindow window);

enum class Aggregation { last, mean, max };
std::string_view to_string(Aggregation a);
std::optional<Aggregation> parse_aggregation(std::string_view text);

struct KpiEntry {
  std::string kpi;
  double value = 0;
  std::string unit;
  friend bool operator==(const KpiEntry&, const KpiEntry&) = default;
};

struct KpiFeatureVector {
  std::string device_id;
  std::vector<KpiEntry> entries;  // in the series' kpi order
  TimeWindow window;

  const KpiEntry* find(std::string_view kpi) const;
  friend bool operator==(const KpiFeatureVector&, const KpiFeatureVector&) = default;
};

KpiFeatureVector kpi_vector(const DeviceSeries& series, TimeWindow window,
                            Aggregation aggregation = Aggregation::last);

enum class RuleRelation { at_most, at_least, within };
enum class Severity { warning, fault };

struct RuleScope {
  enum class Kind { all, device_class, device_id } kind = Kind::all;
  std::string value;

  std::string to_string() const;
  friend bool operator==(const RuleScope&, const RuleScope&) = default;
};

struct Rule {
  std::string rule_id;
  RuleScope scope;
  std::string kpi;
  RuleRelation relation = RuleRelation::within;
  double lo = 0;  // used by at_least and within
  double hi = 0;  // used by at_most and within
  std::string unit;
  Severity severity = Severity::fault;
  std::string provenance = "builtin";

  bool violated_by(double observed) const;
  /// "rule <id>: <scope>.<kpi> <relation> <bounds> [<unit>] severity=<s> from=<provenance>"
  std::string to_text() const;
  friend bool operator==(const Rule&, const Rule&) = default;
};

/// Parses "within[0,100] ms", "<= 100 ms", ">= -90 dBm" (unit optional).
struct ParsedThreshold {
  RuleRelation relation;
  double lo = 0, hi = 0;
  std::optional<std::string> unit;
};
std::optional<ParsedThreshold> parse_threshold(std::string_view text);
std::string format_threshold(const Rule& rule);

struct RuleSet {
  std::vector<Rule> rules;
  std::vector<std::string> warnings;
  std::vector<std::string> malformed;
  bool builtin_defaults = false;

  std::string to_text() const;
};

std::vector<Rule> builtin_rules(const RuleScope& scope);

/// Thresholds for the profile's device class, read from `threshold:<kpi>`
/// facts on the class entity and `threshold` facts on metrics linked by
/// has_metric. Falls back to builtin defaults when none are found.
RuleSet derive_rules(const DeviceProfile& profile, const KnowledgeGraph& kg);

struct AnomalyFinding {
  std::string entity;
  std::string kpi;
  double observed = 0;
  std::string violated_rule;
  std::optional<double> lo, hi;
  TimeWindow window;

  std::string to_text() const;
  friend auto operator<=>(const AnomalyFinding&, const AnomalyFinding&) = default;
};

inline constexpr std::string_view kPortStateKpi = "port_state";
inline constexpr std::string_view kPortDownRule = "builtin.port_down";

/// Facts derived by one round of ground forward propagation:
/// port_down(a, b) => link_down(min(a,b), max(a,b)).
FactSet propagate(const FactSet& facts);

/// Optional external checker; receives the rules and the facts and returns
/// findings to merge. Defaults to none.
using ExternalSolver = std::function<std::vector<AnomalyFinding>(
    const std::vector<Rule>&, const FactSet&, const std::vector<KpiFeatureVector>&)>;

/// Every (rule, device, kpi) where the device is in scope and the
/// aggregated value violates the relation, plus one finding on b for every
/// port_down(a, b). Sorted by (device, kpi, rule_id).
std::vector<AnomalyFinding> evaluate_rules(const std::vector<Rule>& rules, const FactSet& facts,
                                           const std::vector<KpiFeatureVector>& vectors,
                                           const ExternalSolver& solver = {});

/// Sorted, de-duplicated entity ids.
class EntitySet {
 public:
  EntitySet() = default;
  explicit EntitySet(std::vector<std::string> ids);
  const std::vector<std::string>& ids() const { return ids_; }
  bool empty() const { return ids_.empty(); }
  std::size_t size() const { return ids_.size(); }
  bool contains(std::string_view id) const;
  friend bool operator==(const EntitySet&, const EntitySet&) = default;

 private:
  std::vector<std::string> ids_;
};

EntitySet anomalous_entities(const std::vector<AnomalyFinding>& findings);

/// Merges per-sample findings that share (entity, kpi, rule) and touch
/// consecutive windows; keeps the most extreme observation.
std::vector<AnomalyFinding> coalesce_findings(const std::vector<AnomalyFinding>& findings,
                                              Timestamp max_gap = 0);

}  // namespace netsem
