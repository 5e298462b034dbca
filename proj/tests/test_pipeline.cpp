#include "doctest.h"

#include "gen.hpp"
#include "netsem/error.hpp"
#include "netsem/pipeline.hpp"

using namespace netsem;

namespace {

Dataset scenario() {
  ScenarioSpec spec;
  spec.duration_ms = 4000;
  spec.fault_injections = {*parse_fault_injection("congestion:d1:1000-3000"),
                           *parse_fault_injection("out_of_range:d4:2000-4000")};
  return generate_scenario(spec);
}

}  // namespace

TEST_CASE("full run") {
  const auto d = scenario();
  MockProvider mock;
  const auto result = run_pipeline(d, RunConfig{}, mock);
  CHECK(result.audit.variant == "full");
  CHECK(result.audit.retrieval_calls > 0);
  CHECK(result.audit.diagnosis_calls == result.blueprints.size() + 1);
  CHECK(anomalous_entities(result.findings).ids() == std::vector<std::string>{"d1", "d4"});
  CHECK(result.attribution.at("d1") == "Network Congestion");
  CHECK(result.attribution.at("d4") == "Out of Communication Range");
  CHECK(validate_report_json(result.report.to_json()).empty());
  CHECK(result.predictions.size() == sample_truth(d).size());
  CHECK(run_pipeline(d, RunConfig{}, mock).report.to_json() == result.report.to_json());
}

TEST_CASE("no_kg omits knowledge and never retrieves") {
  MockProvider mock;
  RunConfig c;
  c.no_kg = true;
  const auto result = run_pipeline(scenario(), c, mock);
  CHECK(DiagnosisContext::section_of(result.context.render(), "KNOWLEDGE") == std::string(kOmitted));
  CHECK(result.audit.retrieval_calls == 0);
  CHECK(result.audit.knowledge_omitted);
  CHECK(result.audit.to_json().find("\"retrieval_calls\": 0") != std::string::npos);
}

TEST_CASE("no_symbolic records no rule findings") {
  MockProvider mock;
  RunConfig c;
  c.no_symbolic = true;
  const auto result = run_pipeline(scenario(), c, mock);
  CHECK(result.findings.empty());
  CHECK(result.audit.findings == 0);
  CHECK(result.audit.raw_findings == 0);
  CHECK(result.audit.rule_evaluations == 0);
  CHECK(DiagnosisContext::section_of(result.context.render(), "SYMBOLIC") == std::string(kOmitted));
}

TEST_CASE("semantic_only turns both off") {
  RunConfig c;
  c.semantic_only = true;
  const auto v = c.validated();
  CHECK(v.no_kg);
  CHECK(v.no_symbolic);
  CHECK(v.variant_name() == "semantic_only");
  RunConfig bad;
  bad.samples = 0;
  CHECK_THROWS_AS(bad.validated(), Error);
  CHECK(variant_config("no_kg", RunConfig{}).no_kg);
  CHECK(variant_config("provider:mock", RunConfig{}).provider == "mock");
  CHECK_THROWS_AS(variant_config("half", RunConfig{}), Error);
}

TEST_CASE("ablation table") {
  MockProvider mock;
  const auto rows = run_ablation(scenario(), {"full", "no_kg", "no_symbolic", "semantic_only"}, RunConfig{}, mock);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].variant == "full");
  CHECK(rows[0].metrics.fpr == 0.0);
  CHECK(rows[0].metrics.recall == 1.0);
  for (const auto& r : rows) CHECK(r.metrics.accuracy);
}

TEST_CASE("a quiet network is diagnosed normal") {
  ScenarioSpec spec;
  spec.duration_ms = 2000;
  MockProvider mock;
  InstrumentedProvider counted(mock);
  const auto result = run_pipeline(generate_scenario(spec), RunConfig{}, counted);
  CHECK(result.report.fault_type == "normal");
  CHECK(result.findings.empty());
  CHECK(result.blueprints.empty());
  CHECK(result.audit.diagnosis_calls == 0);
}

TEST_CASE("symbolic text sections") {
  const auto d = scenario();
  const auto kg = build_graph(knowledge_corpus(d.profiles));
  const auto sym = symbolize_dataset(d, kg);
  CHECK(sym.evaluations == 16);
  CHECK(sym.raw_findings.size() >= sym.findings.size());
  const auto text = symbolic_text(sym.facts, sym.rules, sym.findings);
  CHECK(text.find("facts:\n") == 0);
  CHECK(text.find("\nrules:\n") != std::string::npos);
  CHECK(text.find("\nfindings:") != std::string::npos);
}
