#pragma once

// End-to-end run: semanticize, symbolize and detect, update and query the
// knowledge graph, then diagnose. Ablation flags replace components with
// the omission marker.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netsem/datamodel.hpp"
#include "netsem/diagnose.hpp"
#include "netsem/nkg.hpp"
#include "netsem/provider.hpp"
#include "netsem/simeval.hpp"
#include "netsem/symgen.hpp"

namespace netsem {

struct RunConfig {
  std::string provider = "mock";
  int samples = 5;
  double temperature = 0.0;
  int top_k = 5;
  int hops = 2;
  bool no_kg = false;
  bool no_symbolic = false;
  bool semantic_only = false;
  std::uint64_t seed = 0;

  /// Throws Usage for out-of-range values; semantic_only turns on both
  /// no_kg and no_symbolic.
  RunConfig validated() const;
  /// "full", "no_kg", "no_symbolic" or "semantic_only".
  std::string variant_name() const;
};

/// Parses an ablation variant: full, no_kg, no_symbolic, semantic_only, or
/// provider:<name> (full pipeline on another provider).
RunConfig variant_config(std::string_view variant, const RunConfig& base);

struct SymbolicResult {
  std::vector<Rule> rules;
  FactSet facts;  // static facts plus every port_down/link_down seen in any sample
  std::vector<AnomalyFinding> raw_findings;  // one window per sample
  std::vector<AnomalyFinding> findings;      // coalesced over consecutive samples
  std::vector<std::string> warnings;
  std::size_t evaluations = 0;
};

/// Evaluates the class rules derived from `kg` at every sample timestamp.
SymbolicResult symbolize_dataset(const Dataset& d, const KnowledgeGraph& kg);

/// The symbolic block of the diagnosis context.
std::string symbolic_text(const FactSet& facts, const std::vector<Rule>& rules,
                          const std::vector<AnomalyFinding>& findings);

struct RunAudit {
  std::string variant;
  std::string provider;
  std::uint64_t seed = 0;
  std::size_t semantic_samples = 0;
  std::size_t selected_sample = 0;
  std::string prompt_id;
  std::size_t rule_evaluations = 0;
  std::size_t raw_findings = 0;
  std::size_t findings = 0;
  std::size_t retrieval_calls = 0;
  std::size_t provider_calls = 0;
  std::size_t diagnosis_calls = 0;
  std::size_t blueprints = 0;
  bool knowledge_omitted = false;
  bool symbolic_omitted = false;
  std::vector<std::string> anomalous_entities;
  std::vector<std::string> rule_warnings;

  std::string to_json() const;
};

struct PipelineResult {
  DiagnosisReport report;
  DiagnosisContext context;
  std::vector<AnomalyFinding> findings;      // coalesced
  std::vector<AnomalyFinding> raw_findings;  // per sample
  std::vector<Blueprint> blueprints;
  std::map<std::string, std::string> attribution;  // entity -> category display name or "unknown"
  std::vector<SampleLabel> predictions;            // aligned with sample_truth(dataset)
  KnowledgeGraph graph;                            // after the run's updates
  RunAudit audit;
};

/// `kg` is the starting knowledge graph; the generated corpus for the
/// dataset's device classes is used when it is absent.
PipelineResult run_pipeline(const Dataset& d, const RunConfig& config, LlmProvider& provider,
                            const KnowledgeGraph* kg = nullptr);

/// Per-variant metrics on a labeled dataset. Pipeline errors are rethrown
/// with the variant name prefixed.
std::vector<MetricsRow> run_ablation(const Dataset& d, const std::vector<std::string>& variants,
                                     const RunConfig& base, LlmProvider& provider);

}  // namespace netsem
