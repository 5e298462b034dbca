#pragma once

// Diagnosis: the four-part context, blueprint generation from anomalous
// entities and retrieved knowledge, diagnostic plans, and LLM-backed
// verdicts plus report synthesis.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netsem/nkg.hpp"
#include "netsem/provider.hpp"
#include "netsem/symgen.hpp"

namespace netsem {

inline constexpr std::string_view kOmitted = "[omitted]";
inline constexpr std::string_view kNoViolationSentence =
    "No rule violations were detected; verify network health.";

struct DiagnosisContext {
  std::string semantic_block;
  std::string symbolic_block;
  std::string knowledge_block;
  std::string problem_statement;

  /// "SEMANTIC\n...\n\nSYMBOLIC\n...\n\nKNOWLEDGE\n...\n\nPROBLEM\n...\n"
  std::string render() const;
  /// Body of one labeled section in a rendered context.
  static std::optional<std::string> section_of(std::string_view rendered, std::string_view header);
};

/// One sentence per distinct (entity, kpi), sorted; the fixed no-violation
/// sentence when there are no findings.
std::string make_problem_statement(const std::vector<AnomalyFinding>& findings);

/// Empty components are replaced by the omission marker.
DiagnosisContext concat_context(std::string semantic, std::string symbolic, std::string knowledge,
                                std::string problem);

enum class CheckKind { traffic_stats, routing_table, interface_status, signal, config, generic };
std::string_view to_string(CheckKind k);
std::optional<CheckKind> parse_check_kind(std::string_view text);
/// Keyword match on a step description; generic when nothing matches.
CheckKind infer_check_kind(std::string_view description);

struct DiagnosticStep {
  std::string description;
  CheckKind check_kind = CheckKind::generic;
  std::string target;
  bool builtin = false;  // not sourced from the knowledge graph
  friend bool operator==(const DiagnosticStep&, const DiagnosticStep&) = default;
};

struct Blueprint {
  std::string id;  // k1, k2, ...
  std::string cause;
  EntitySet evidence;
  std::vector<DiagnosticStep> steps;
  friend bool operator==(const Blueprint&, const Blueprint&) = default;
};

inline constexpr std::string_view kUnknownCause = "unknown";

/// One blueprint per fault_type entity reachable along directed relation
/// edges of `subgraph` (plus entity -> kpi edges from findings), sorted by
/// cause. Falls back to a single "unknown" blueprint when N is non-empty
/// and nothing is reachable.
std::vector<Blueprint> generate_blueprints(const EntitySet& anomalous, const std::vector<AnomalyFinding>& findings,
                                           const RetrievalResult& subgraph);

/// Steps linked to the cause by diagnosed_by, in declared order, one per
/// evidence entity. Builtin generic steps when the graph has none.
std::vector<DiagnosticStep> extract_plan(const Blueprint& b, const KnowledgeGraph& g);

enum class Verdict { confirmed, ruled_out, inconclusive };
std::string_view to_string(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view text);

struct BlueprintVerdict {
  std::string id;
  std::string cause;
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::string> evidence;
  friend bool operator==(const BlueprintVerdict&, const BlueprintVerdict&) = default;
};

struct ReportFields {
  std::string fault_type;
  std::string phenomenon;
  std::string explanation;
  std::string summary;
  std::vector<std::string> solutions;
};

/// Reads the "key: value" wire format; nullopt unless all five fields are
/// present and non-empty and fault_type names a category, normal or unknown.
/// fault_type is normalized to the category display name.
std::optional<ReportFields> parse_report_fields(std::string_view text);

struct DiagnosisReport {
  std::string fault_type;
  std::string phenomenon;
  std::string explanation;
  std::string summary;
  std::vector<std::string> solutions;
  std::vector<BlueprintVerdict> per_blueprint;
  std::vector<AnomalyFinding> anomalies;

  std::string to_json() const;
  std::string to_text() const;
  static DiagnosisReport from_json(std::string_view text);
};

/// Schema problems of a report document; empty when valid.
std::vector<std::string> validate_report_json(std::string_view text);
bool is_valid_fault_type(std::string_view fault_type);

struct DiagnosisConfig {
  double temperature = 0.0;  // synthesis; verdicts always use 0
  std::uint64_t seed = 0;
};

std::string verdict_prompt(const DiagnosisContext& ctx, const Blueprint& b);
std::string synthesis_prompt(const DiagnosisContext& ctx, const std::vector<BlueprintVerdict>& verdicts);

/// One verdict call per blueprint, then one synthesis call. A synthesis
/// response that does not parse gets a single reformat retry; if that fails
/// too the report degrades to fault_type "unknown" with the raw text kept.
DiagnosisReport run_diagnosis(const DiagnosisContext& ctx, const std::vector<Blueprint>& blueprints,
                              LlmProvider& provider, const DiagnosisConfig& config = {},
                              const std::vector<AnomalyFinding>& findings = {});

/// Deterministic report for a run without anomalous entities.
DiagnosisReport normal_report(const std::vector<AnomalyFinding>& findings = {});

}  // namespace netsem
