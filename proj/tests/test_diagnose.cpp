#include "doctest.h"

#include <algorithm>

#include "gen.hpp"
#include "netsem/diagnose.hpp"
#include "netsem/error.hpp"
#include "netsem/format.hpp"
#include "netsem/nkg.hpp"
#include "netsem/provider.hpp"
#include "netsem/simeval.hpp"

using namespace netsem;

namespace {

AnomalyFinding finding(std::string entity, std::string kpi, double observed, double hi) {
  return {std::move(entity), std::move(kpi), observed, "r." + kpi, 0.0, hi, {1000, 2000}};
}

Entity entity(std::string id, EntityKind kind) { return {id, id, kind, {}, 0}; }

// The congestion fixture: d2 delay and loss above bound on a uav network,
// knowledge retrieved from the generated corpus.
struct CongestionFixture {
  KnowledgeGraph kg;
  std::vector<AnomalyFinding> findings;
  RetrievalResult subgraph;
  DiagnosisContext ctx;
  std::vector<Blueprint> blueprints;

  CongestionFixture() {
    std::map<std::string, DeviceProfile> profiles = {{"d2", network_type_profile(NetworkType::uav, "d2")}};
    kg = index_entities(build_graph(knowledge_corpus(profiles)));
    findings = {finding("d2", "delay_ms", 250, 100), finding("d2", "packet_loss_pct", 8, 5)};
    subgraph = merge_results({retrieve(kg, "d2 delay_ms packet_loss_pct", 5, 2)});
    ctx = concat_context("d2 delay rose to 250 ms.", "findings:\n" + findings[0].to_text(), subgraph.to_text(),
                         make_problem_statement(findings));
    blueprints = generate_blueprints(anomalous_entities(findings), findings, subgraph);
    for (auto& b : blueprints) b.steps = extract_plan(b, kg);
  }
};

}  // namespace

TEST_CASE("problem statement") {
  CHECK(make_problem_statement({}) == kNoViolationSentence);

  const auto one = make_problem_statement({finding("d2", "delay_ms", 250, 100)});
  for (const char* s : {"d2", "delay_ms", "250", "100"}) CHECK(one.find(s) != std::string::npos);

  const std::vector<AnomalyFinding> five = {finding("d3", "rssi_dbm", 1, 0),       finding("d1", "delay_ms", 2, 1),
                                            finding("d2", "delay_ms", 3, 1),       finding("d1", "packet_loss_pct", 9, 5),
                                            finding("d3", "delay_ms", 4, 1)};
  const auto text = make_problem_statement(five);
  const auto lines = split(text, '\n');
  REQUIRE(lines.size() == 5);
  std::vector<std::pair<std::string, std::string>> keys;
  for (const auto& f : five) keys.emplace_back(f.entity, f.kpi);
  std::sort(keys.begin(), keys.end());
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(lines[i].find("Device " + keys[i].first + " ") != std::string::npos);
    CHECK(lines[i].find(keys[i].second) != std::string::npos);
  }
}

TEST_CASE("context concatenation") {
  const auto ctx = concat_context("x", "x", "x", "x");
  const auto r = ctx.render();
  for (const char* h : {"SEMANTIC", "SYMBOLIC", "KNOWLEDGE", "PROBLEM"}) CHECK(DiagnosisContext::section_of(r, h) == "x");

  const auto omitted = concat_context("s", "y", "", "p").render();
  CHECK(DiagnosisContext::section_of(omitted, "KNOWLEDGE") == std::string(kOmitted));
}

TEST_CASE("blueprint generation") {
  CHECK(generate_blueprints({}, {}, {}).empty());

  RetrievalResult sub;
  sub.entities = {entity("delay_ms", EntityKind::metric), entity("network_congestion", EntityKind::fault_type)};
  sub.relations = {{"delay_ms", "indicates", "network_congestion"}};
  const std::vector<AnomalyFinding> f = {finding("d2", "delay_ms", 250, 100)};
  const auto one = generate_blueprints(anomalous_entities(f), f, sub);
  REQUIRE(one.size() == 1);
  CHECK(one[0].cause == "network_congestion");
  CHECK(one[0].evidence.ids() == std::vector<std::string>{"d2"});

  RetrievalResult two;
  two.entities = {entity("insufficient network bandwidth", EntityKind::fault_type),
                  entity("weak transmission signal", EntityKind::fault_type)};
  two.relations = {{"delay_ms", "indicates", "insufficient network bandwidth"},
                   {"delay_ms", "indicates", "weak transmission signal"}};
  const auto both = generate_blueprints(anomalous_entities(f), f, two);
  REQUIRE(both.size() == 2);
  CHECK(both[0].id == "k1");
  CHECK(both[1].id == "k2");
  CHECK(both[0].cause != both[1].cause);

  const auto none = generate_blueprints(anomalous_entities(f), f, RetrievalResult{});
  REQUIRE(none.size() == 1);
  CHECK(none[0].cause == kUnknownCause);
}

TEST_CASE("plan extraction") {
  KnowledgeGraph g;
  g.ensure_entity("network_congestion", EntityKind::fault_type);
  const char* names[] = {"check traffic statistics", "inspect the routing table", "verify interface status"};
  for (int i = 0; i < 3; ++i) {
    const std::string id = "s" + std::to_string(3 - i);  // ids out of declared order
    g.put_entity({id, names[i], EntityKind::step, {}, 0});
    g.put_fact({id, "order", std::to_string(i + 1), 0});
    g.add_relation({"network_congestion", "diagnosed_by", id});
  }
  const Blueprint b{"k1", "network_congestion", EntitySet({"d2"}), {}};
  const auto steps = extract_plan(b, g);
  REQUIRE(steps.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(steps[static_cast<std::size_t>(i)].description == names[i]);
    CHECK_FALSE(steps[static_cast<std::size_t>(i)].builtin);
  }
  CHECK(steps[0].check_kind == CheckKind::traffic_stats);
  CHECK(steps[1].check_kind == CheckKind::routing_table);
  CHECK(steps[2].check_kind == CheckKind::interface_status);

  const Blueprint bare{"k1", "out_of_range", EntitySet({"d4"}), {}};
  const auto fallback = extract_plan(bare, g);
  REQUIRE_FALSE(fallback.empty());
  for (const auto& s : fallback) CHECK(s.builtin);
}

TEST_CASE("mock diagnosis of the congestion fixture") {
  CongestionFixture fx;
  REQUIRE_FALSE(fx.blueprints.empty());
  MockProvider mock;
  InstrumentedProvider counted(mock);
  const auto report = run_diagnosis(fx.ctx, fx.blueprints, counted, {}, fx.findings);
  CHECK(report.fault_type == "Network Congestion");
  CHECK_FALSE(report.phenomenon.empty());
  CHECK_FALSE(report.explanation.empty());
  CHECK_FALSE(report.summary.empty());
  CHECK_FALSE(report.solutions.empty());
  CHECK(counted.call_count() == fx.blueprints.size() + 1);
  CHECK(validate_report_json(report.to_json()).empty());

  const auto again = run_diagnosis(fx.ctx, fx.blueprints, mock, {}, fx.findings);
  CHECK(again.to_json() == report.to_json());
  CHECK(DiagnosisReport::from_json(report.to_json()).to_json() == report.to_json());
}

TEST_CASE("unparseable reports degrade to unknown") {
  const Blueprint b{"k1", "network_congestion", EntitySet({"d2"}), {}};
  ScriptedProvider scripted({"verdict: confirmed\nevidence: d2", "the network seems sad", "still not a report"});
  const auto report = run_diagnosis(concat_context("a", "b", "c", "d"), {b}, scripted);
  CHECK(report.fault_type == "unknown");
  CHECK(report.explanation.find("the network seems sad") != std::string::npos);
  CHECK(validate_report_json(report.to_json()).empty());
}

TEST_CASE("run_diagnosis needs blueprints") {
  MockProvider mock;
  CHECK_THROWS_AS(run_diagnosis(concat_context("a", "b", "c", "d"), {}, mock), Error);
  CHECK(normal_report().fault_type == "normal");
}

TEST_CASE("call budget is one verdict per blueprint plus one synthesis") {
  gen::Rng r(50);
  MockProvider mock;
  const std::vector<std::string> causes = {"network_congestion", "malicious_traffic", "out_of_range",
                                           "network_node_crash", "application_crash", "communication_obstacles"};
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Blueprint> bs;
    for (int i = 0; i < r.integer(1, 6); ++i)
      bs.push_back({"k" + std::to_string(i + 1), r.pick(causes), EntitySet({"d" + std::to_string(r.integer(0, 8))}), {}});
    InstrumentedProvider counted(mock);
    run_diagnosis(concat_context(gen::phrase(r, 2, 8), gen::phrase(r, 2, 8), gen::phrase(r, 0, 8), gen::phrase(r, 2, 8)),
                  bs, counted, {0.0, static_cast<std::uint64_t>(trial)});
    CHECK(counted.call_count() == bs.size() + 1);
  }
}

TEST_CASE("report schema") {
  const auto ok = normal_report().to_json();
  CHECK(validate_report_json(ok).empty());
  CHECK_FALSE(validate_report_json("{}").empty());
  CHECK_FALSE(validate_report_json("not json").empty());
  auto bad = normal_report();
  bad.fault_type = "Sunspots";
  CHECK_FALSE(validate_report_json(bad.to_json()).empty());
  CHECK(is_valid_fault_type("Network Congestion"));

  const auto fields = parse_report_fields(
      "fault_type: Network Congestion\nphenomenon: p\nexplanation: e\nsummary: s\nsolutions:\n- a\n- b\n");
  REQUIRE(fields);
  CHECK(fields->solutions == std::vector<std::string>{"a", "b"});
  CHECK_FALSE(parse_report_fields("hello"));
}
