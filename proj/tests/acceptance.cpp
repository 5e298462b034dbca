// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>

#include "cli.hpp"
#include "json.hpp"
#include "gen.hpp"
#include "netsem/diagnose.hpp"
#include "netsem/format.hpp"
#include "netsem/fsutil.hpp"
#include "netsem/pipeline.hpp"
#include "netsem/semgen.hpp"
#include "oracles.hpp"

using namespace netsem;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool ok = true;
  std::string detail;
  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

std::vector<double> components(const UnitVector& u) {
  return {u.components().data(), u.components().data() + u.dims()};
}

Outcome selector_oracle() {
  Outcome o;
  gen::Rng r(1001);
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = r.integer(2, 10);
    const int d = r.integer(4, 32);
    std::vector<UnitVector> vs;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < n; ++i) {
      vs.push_back(gen::unit_vector(r, d));
      raw.push_back(components(vs.back()));
    }
    const auto got = select_most_central(std::span<const UnitVector>(vs));
    const auto want = oracle::brute_select(raw);
    if (got != want) o.fail("trial " + std::to_string(trial) + ": " + std::to_string(got) + " vs " + std::to_string(want));
  }
  const double secs = seconds_since(t0);
  if (secs >= 5) o.fail("took " + std::to_string(secs) + " s");
  if (o.ok) o.detail = "1000 trials in " + std::to_string(secs) + " s";
  return o;
}

Outcome embedding_invariants() {
  Outcome o;
  gen::Rng r(1002);
  std::vector<UnitVector> batch;
  for (int i = 0; i < 500; ++i) {
    const auto v = embed(gen::phrase(r, 1, 12));
    if (std::abs(v.components().norm() - 1) > 1e-9) o.fail("norm off at " + std::to_string(i));
    batch.push_back(v);
    if (batch.size() == 10) {
      const auto s = similarity_matrix(batch);
      for (int a = 0; a < s.rows(); ++a) {
        if (std::abs(s(a, a) - 1) > 1e-9) o.fail("diagonal off");
        for (int b = 0; b < s.cols(); ++b)
          if (std::abs(s(a, b) - s(b, a)) > 1e-12) o.fail("asymmetric");
      }
      batch.clear();
    }
  }
  if (o.ok) o.detail = "500 embeddings, 50 matrices";
  return o;
}

Outcome retrieval_oracle() {
  Outcome o;
  gen::Rng r(1003);
  const auto t0 = Clock::now();
  for (int trial = 0; trial < 200; ++trial) {
    auto g = gen::graph(r, 50, 150);
    if (r.coin()) g = index_entities(g);
    const auto q = gen::phrase(r, 1, 4);
    const int k = r.integer(1, 8);
    const int hops = r.integer(0, 3);
    if (!(retrieve(g, q, k, hops) == oracle::brute_retrieve(g, q, k, hops)))
      o.fail("trial " + std::to_string(trial) + " differs");
  }
  const double secs = seconds_since(t0);
  if (secs >= 10) o.fail("took " + std::to_string(secs) + " s");
  if (o.ok) o.detail = "200 graphs in " + std::to_string(secs) + " s";
  return o;
}

Outcome rule_oracle() {
  Outcome o;
  gen::Rng r(1004);
  const std::vector<std::string> kpis = {"delay_ms", "packet_loss_pct", "throughput_mbps", "rssi_dbm",
                                         "error_rate_pct"};
  const std::vector<std::string> classes = {"uav", "vehicle", "mobile_phone"};
  for (int trial = 0; trial < 500; ++trial) {
    FactSet facts;
    std::vector<KpiFeatureVector> vectors;
    std::vector<std::string> ids;
    for (int i = 0; i < r.integer(1, 10); ++i) {
      const std::string id = "d" + std::to_string(i);
      ids.push_back(id);
      facts.insert({"class", {id, r.pick(classes)}});
      KpiFeatureVector v{id, {}, {i * 250, i * 250 + 1}};
      for (int k = 0; k < r.integer(1, 5); ++k) {
        const auto& name = kpis[static_cast<std::size_t>(k)];
        v.entries.push_back({name, r.real(-120, 200), default_unit(name)});
      }
      vectors.push_back(v);
    }
    if (r.coin(0.3)) facts.insert({"port_down", {r.pick(ids), r.pick(ids)}});
    std::vector<Rule> rules;
    for (int i = 0; i < r.integer(0, 8); ++i) {
      Rule rule;
      rule.rule_id = "r" + std::to_string(i);
      rule.kpi = r.pick(kpis);
      rule.unit = default_unit(rule.kpi);
      rule.relation = static_cast<RuleRelation>(r.integer(0, 2));
      rule.lo = r.real(-120, 50);
      rule.hi = rule.lo + r.real(0, 150);
      const int scope = r.integer(0, 2);
      if (scope == 1) rule.scope = {RuleScope::Kind::device_class, r.pick(classes)};
      if (scope == 2) rule.scope = {RuleScope::Kind::device_id, r.pick(ids)};
      rules.push_back(rule);
    }
    auto got = evaluate_rules(rules, facts, vectors);
    auto want = oracle::rule_scan(rules, facts, vectors);
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    if (got != want) o.fail("trial " + std::to_string(trial) + " differs");
  }
  if (o.ok) o.detail = "500 instances";
  return o;
}

Outcome metrics_closed_form() {
  Outcome o;
  const auto m = compute_metrics(8, 2, 1, 9);
  const auto row = format_metrics_csv({{"cm", m}});
  if (row != "variant,accuracy,recall,fnr,fpr\ncm,0.8500,0.8000,0.2000,0.1000\n") o.fail("got " + row);
  const auto undefined = format_metrics_csv({{"a", compute_metrics(0, 0, 3, 7)}, {"b", compute_metrics(4, 1, 0, 0)}});
  if (undefined != "variant,accuracy,recall,fnr,fpr\na,0.7000,n/a,n/a,0.3000\nb,0.8000,0.8000,0.2000,n/a\n")
    o.fail("undefined denominators: " + undefined);
  if (o.ok) o.detail = "0.8500/0.8000/0.2000/0.1000, n/a where undefined";
  return o;
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return run_cli(args, out, err);
}

Outcome end_to_end() {
  Outcome o;
  gen::TempDir dir("accept6");
  const auto t0 = Clock::now();
  const auto data = (dir.path / "data").string();
  const std::vector<std::string> faults = {"congestion:d1:1000-4000", "node_crash:d2:2000-5000",
                                           "malicious:d3:3000-6000",  "out_of_range:d4:4000-7000",
                                           "app_crash:d5:1000-3000",  "obstacles:d6:5000-8000"};
  std::vector<std::string> sim = {"simulate", "--topology", "star", "--nodes", "9", "--type", "uav",
                                  "--seed", "42", "--out", data};
  for (const auto& f : faults) sim.insert(sim.end(), {"--fault", f});
  if (cli(sim) != 0) {
    o.fail("simulate failed");
    return o;
  }
  const auto a = dir.path / "a", b = dir.path / "b";
  if (cli({"diagnose", data, "--out", a.string(), "--seed", "7"}) != 0 ||
      cli({"diagnose", data, "--out", b.string(), "--seed", "7"}) != 0) {
    o.fail("diagnose failed");
    return o;
  }
  const auto report = read_file(a / "report.json");
  if (report != read_file(b / "report.json") || read_file(a / "report.txt") != read_file(b / "report.txt"))
    o.fail("reports differ between runs");
  const auto problems = validate_report_json(report);
  if (!problems.empty()) o.fail("schema: " + problems.front());

  // findings.tsv: entity is the first column.
  std::map<std::string, int> per_device;
  const auto tsv = read_file(a / "findings.tsv");
  for (const auto& line : split(tsv, '\n')) {
    if (line.empty() || starts_with(line, "entity\t")) continue;
    ++per_device[split(line, '\t').at(0)];
  }
  for (const char* target : {"d1", "d2", "d3", "d4"})
    if (per_device[target] < 1) o.fail(std::string("no finding on ") + target);
  for (const char* clean : {"d0", "d7", "d8"})
    if (per_device[clean] != 0) o.fail(std::string("finding on un-injected ") + clean);

  const double secs = seconds_since(t0);
  if (secs >= 10) o.fail("took " + std::to_string(secs) + " s");
  if (o.ok) o.detail = "findings on d1-d4 only, identical reports, " + std::to_string(secs) + " s";
  return o;
}

Outcome ablation_structure() {
  Outcome o;
  gen::TempDir dir("accept7");
  const auto data = (dir.path / "data").string();
  if (cli({"simulate", "--out", data, "--duration", "4000", "--fault", "congestion:d1:1000-3000"}) != 0) {
    o.fail("simulate failed");
    return o;
  }
  const auto nokg = dir.path / "nokg", nosym = dir.path / "nosym";
  if (cli({"diagnose", data, "--out", nokg.string(), "--no-kg"}) != 0 ||
      cli({"diagnose", data, "--out", nosym.string(), "--no-symbolic"}) != 0) {
    o.fail("diagnose failed");
    return o;
  }
  const auto audit_kg = nlohmann::json::parse(read_file(nokg / "audit.json"));
  if (audit_kg.at("retrieval_calls") != 0) o.fail("no_kg retrieval_calls = " + audit_kg.at("retrieval_calls").dump());
  if (DiagnosisContext::section_of(read_file(nokg / "context.txt"), "KNOWLEDGE") != std::string(kOmitted))
    o.fail("no_kg KNOWLEDGE section is not omitted");
  const auto audit_sym = nlohmann::json::parse(read_file(nosym / "audit.json"));
  for (const char* field : {"findings", "raw_findings"})
    if (audit_sym.at(field) != 0) o.fail(std::string("no_symbolic ") + field + " != 0");
  if (o.ok) o.detail = "audit: retrieval_calls 0 / findings 0";
  return o;
}

Outcome call_budget() {
  Outcome o;
  MockProvider mock;
  gen::Rng r(1008);
  const char* detectable[] = {"congestion", "node_crash", "malicious", "out_of_range"};
  const char* any[] = {"congestion", "node_crash", "malicious", "out_of_range", "app_crash", "obstacles"};
  for (int trial = 0; trial < 50; ++trial) {
    ScenarioSpec spec;
    spec.topology_kind = static_cast<TopologyKind>(r.integer(0, 2));
    spec.node_count = r.integer(4, 10);
    spec.network_type = static_cast<NetworkType>(r.integer(0, 3));
    spec.duration_ms = 2000;
    spec.seed = static_cast<std::uint64_t>(trial);
    const int faults = r.integer(1, 3);
    for (int i = 0; i < faults; ++i) {
      const std::string cat = i == 0 ? detectable[r.integer(0, 3)] : any[r.integer(0, 5)];
      const std::string dev = "d" + std::to_string(r.integer(1, spec.node_count - 1));
      spec.fault_injections.push_back(*parse_fault_injection(cat + ":" + dev + ":0-1000"));
    }
    const auto d = generate_scenario(spec);
    const auto result = run_pipeline(d, RunConfig{}, mock);
    if (result.blueprints.empty()) {
      o.fail("fixture " + std::to_string(trial) + " produced no blueprints");
      continue;
    }
    InstrumentedProvider counted(mock);
    run_diagnosis(result.context, result.blueprints, counted, {0.0, spec.seed}, result.findings);
    if (counted.call_count() != result.blueprints.size() + 1)
      o.fail("fixture " + std::to_string(trial) + ": " + std::to_string(counted.call_count()) + " calls for " +
             std::to_string(result.blueprints.size()) + " blueprints");
  }
  if (o.ok) o.detail = "50 fixtures";
  return o;
}

Outcome round_trips() {
  Outcome o;
  gen::Rng r(1009);
  gen::TempDir dir("accept9");
  auto tree = [](const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.is_regular_file()) files[fs::relative(e.path(), root).string()] = read_file(e.path());
    return files;
  };
  for (int i = 0; i < 50; ++i) {
    const auto d = gen::dataset(r);
    const auto first = dir.path / ("a" + std::to_string(i)), second = dir.path / ("b" + std::to_string(i));
    write_dataset(d, first);
    write_dataset(load_dataset(first), second);
    if (tree(first) != tree(second)) o.fail("dataset " + std::to_string(i) + " differs");

    const auto g = gen::graph(r, 40, 80);
    const auto kg1 = dir.path / ("g" + std::to_string(i) + ".kg");
    write_file_atomic(kg1, g.serialize());
    if (KnowledgeGraph::parse(read_file(kg1)).serialize() != read_file(kg1))
      o.fail("graph " + std::to_string(i) + " differs");
  }
  if (o.ok) o.detail = "50 datasets, 50 graphs";
  return o;
}

Outcome token_report() {
  Outcome o;
  std::map<std::string, DeviceProfile> profiles;
  const NetworkType types[] = {NetworkType::mobile, NetworkType::vanet, NetworkType::uav, NetworkType::cellular};
  for (int i = 0; i < 16; ++i) {
    const std::string id = "d" + std::to_string(i);
    profiles[id] = network_type_profile(types[i % 4], id);
  }
  const auto g = update_graph(build_graph(knowledge_corpus(profiles)), device_observations(profiles, 0));
  const auto te = token_economy(g);
  char buf[128];
  std::snprintf(buf, sizeof buf, "triples %zu chars, prose %zu chars (%.1f%% smaller)", te.triple_chars,
                te.prose_chars, 100.0 * (1.0 - static_cast<double>(te.triple_chars) / static_cast<double>(te.prose_chars)));
  o.detail = buf;
  if (te.triple_chars > te.prose_chars) o.fail(buf);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"selector oracle equivalence", selector_oracle},
      {"embedding and similarity invariants", embedding_invariants},
      {"retrieval oracle", retrieval_oracle},
      {"rule-engine oracle", rule_oracle},
      {"metrics closed form", metrics_closed_form},
      {"end-to-end deterministic detection", end_to_end},
      {"ablation structure", ablation_structure},
      {"call budget", call_budget},
      {"serialization round-trips", round_trips},
      {"token-economy report", token_report},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.fail(std::string("threw: ") + e.what());
    }
    std::printf("%s %zu %s: %s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
    failed += !o.ok;
  }
  return failed;
}
