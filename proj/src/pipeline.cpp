#include <algorithm>
#include <set>

#include "json.hpp"

#include "netsem/error.hpp"
#include "netsem/format.hpp"
#include "netsem/pipeline.hpp"
#include "netsem/semgen.hpp"

namespace netsem {

RunConfig RunConfig::validated() const {
  RunConfig c = *this;
  if (c.provider != "mock" && c.provider != "remote") throw Error(Errc::Usage, "provider must be mock or remote");
  if (c.samples < 1) throw Error(Errc::Usage, "samples must be >= 1");
  if (c.top_k < 1) throw Error(Errc::Usage, "top-k must be >= 1");
  if (c.hops < 0) throw Error(Errc::Usage, "hops must be >= 0");
  if (!(c.temperature >= 0.0 && c.temperature <= 2.0)) throw Error(Errc::Usage, "temperature must be in [0, 2]");
  if (c.semantic_only) c.no_kg = c.no_symbolic = true;
  return c;
}

std::string RunConfig::variant_name() const {
  if (semantic_only || (no_kg && no_symbolic)) return "semantic_only";
  if (no_kg) return "no_kg";
  if (no_symbolic) return "no_symbolic";
  return "full";
}

RunConfig variant_config(std::string_view variant, const RunConfig& base) {
  RunConfig c = base;
  c.no_kg = c.no_symbolic = c.semantic_only = false;
  if (variant == "full") return c;
  if (variant == "no_kg") c.no_kg = true;
  else if (variant == "no_symbolic") c.no_symbolic = true;
  else if (variant == "semantic_only") c.semantic_only = true;
  else if (starts_with(variant, "provider:") && variant.size() > 9) c.provider = std::string(variant.substr(9));
  else throw Error(Errc::Usage, "unknown ablation variant '" + std::string(variant) + "'");
  return c.validated();
}

std::string RunAudit::to_json() const {
  nlohmann::json j = {
      {"variant", variant},
      {"provider", provider},
      {"seed", seed},
      {"semantic_samples", semantic_samples},
      {"selected_sample", selected_sample},
      {"prompt_id", prompt_id},
      {"rule_evaluations", rule_evaluations},
      {"raw_findings", raw_findings},
      {"findings", findings},
      {"retrieval_calls", retrieval_calls},
      {"provider_calls", provider_calls},
      {"diagnosis_calls", diagnosis_calls},
      {"blueprints", blueprints},
      {"knowledge_omitted", knowledge_omitted},
      {"symbolic_omitted", symbolic_omitted},
      {"anomalous_entities", anomalous_entities},
      {"rule_warnings", rule_warnings},
  };
  return j.dump(2) + "\n";
}

namespace {

std::vector<std::string> class_snippets(const KnowledgeGraph& kg, const Dataset& d) {
  std::set<std::string> classes;
  for (const auto& [id, p] : d.profiles) classes.insert(std::string(to_string(p.device_class)));
  std::vector<std::string> out;
  for (const auto& cls : classes)
    for (const auto& f : kg.facts_of(cls)) out.push_back(format_triple({f.entity, f.attribute, f.value, true}));
  if (out.empty())
    for (const auto& [id, p] : d.profiles)
      out.push_back(format_triple({id, "class", std::string(to_string(p.device_class)), true}));
  return out;
}

std::string device_context(const Dataset& d) {
  std::set<std::string> classes, protocols;
  for (const auto& [id, p] : d.profiles) {
    classes.insert(std::string(to_string(p.device_class)));
    if (!p.protocol.empty()) protocols.insert(p.protocol);
  }
  std::string out = "a " + std::to_string(d.profiles.size()) + "-device " +
                    std::string(to_string(d.topology.kind)) + " network of " +
                    join({classes.begin(), classes.end()}, ", ") + " devices";
  if (!protocols.empty()) out += " using " + join({protocols.begin(), protocols.end()}, ", ");
  return out;
}

std::set<std::string> parse_detected(const std::string& response, const Dataset& d) {
  std::set<std::string> out;
  for (auto raw : split(response, '\n')) {
    auto line = trim(raw);
    if (!starts_with(to_lower(line), "anomalous:")) continue;
    for (auto& item : split(line.substr(10), ',')) {
      auto id = std::string(trim(item));
      if (d.profiles.count(id)) out.insert(id);
    }
  }
  return out;
}

std::string category_of(const std::string& cause, const KnowledgeGraph& kg) {
  if (auto c = parse_category(cause)) return std::string(display_name(*c));
  if (const auto* f = kg.fact(cause, "category"))
    if (auto c = parse_category(f->value)) return std::string(display_name(*c));
  return "unknown";
}

}  // namespace

SymbolicResult symbolize_dataset(const Dataset& d, const KnowledgeGraph& kg) {
  SymbolicResult out;
  std::set<Timestamp> times;
  for (const auto& [id, s] : d.series)
    for (const auto& r : s.rows) times.insert(r.timestamp);
  Timestamp period = 0;
  for (auto it = times.begin(); it != times.end() && std::next(it) != times.end(); ++it) {
    const auto gap = *std::next(it) - *it;
    period = period == 0 ? gap : std::min(period, gap);
  }

  std::set<DeviceClass> seen_classes;
  for (const auto& [id, p] : d.profiles) {
    if (!seen_classes.insert(p.device_class).second) continue;
    auto rs = derive_rules(p, kg);
    out.rules.insert(out.rules.end(), rs.rules.begin(), rs.rules.end());
    for (auto& w : rs.warnings) out.warnings.push_back(w);
    for (auto& m : rs.malformed) out.warnings.push_back("malformed: " + m);
  }

  out.facts = extract_facts(d.topology, d.profiles);
  for (auto t : times) {
    const TimeWindow w{t, t + 1};
    std::vector<KpiFeatureVector> vectors;
    for (const auto& [id, s] : d.series) {
      auto row = std::lower_bound(s.rows.begin(), s.rows.end(), t,
                                  [](const SeriesRow& r, Timestamp ts) { return r.timestamp < ts; });
      if (row != s.rows.end() && row->timestamp == t) vectors.push_back(kpi_vector(s, w));
    }
    const auto facts = extract_facts(d.topology, d.profiles, infer_port_states(d, w));
    for (const auto& a : facts.with_predicate("port_down")) out.facts.insert(a);
    const auto derived = propagate(facts);
    for (const auto& a : derived.atoms()) out.facts.insert(a);
    auto found = evaluate_rules(out.rules, facts, vectors);
    ++out.evaluations;
    out.raw_findings.insert(out.raw_findings.end(), found.begin(), found.end());
  }
  std::sort(out.raw_findings.begin(), out.raw_findings.end());
  out.findings = coalesce_findings(out.raw_findings, period);
  return out;
}

std::string symbolic_text(const FactSet& facts, const std::vector<Rule>& rules,
                          const std::vector<AnomalyFinding>& findings) {
  std::string out = "facts:\n" + facts.to_text();
  if (out.back() != '\n') out += "\n";
  out += "rules:\n";
  for (const auto& r : rules) out += r.to_text() + "\n";
  out += "findings:";
  if (findings.empty()) out += " none";
  for (const auto& f : findings) out += "\n" + f.to_text();
  return out;
}

PipelineResult run_pipeline(const Dataset& d, const RunConfig& config_in, LlmProvider& inner,
                            const KnowledgeGraph* kg_in) {
  const auto config = config_in.validated();
  InstrumentedProvider provider(inner);
  const auto span = d.span();
  if (!span) throw Error(Errc::EmptySelection, "dataset has no samples");

  PipelineResult out;
  auto& audit = out.audit;
  audit.variant = config.variant_name();
  audit.provider = inner.name();
  audit.seed = config.seed;
  audit.knowledge_omitted = config.no_kg;
  audit.symbolic_omitted = config.no_symbolic;

  KnowledgeGraph kg = kg_in ? *kg_in : build_graph(knowledge_corpus(d.profiles));
  if (!config.no_kg) kg = update_graph(kg, device_observations(d.profiles, span->start));

  // Semanticization.
  const auto table_text = render_table(d).to_text();
  const auto prompt = config.no_kg
                          ? build_semantic_prompt(PromptVariant::general_info, table_text, {}, "")
                          : build_semantic_prompt(PromptVariant::self_heuristic, table_text, class_snippets(kg, d),
                                                  device_context(d));
  const auto texts = sample_semantics(prompt, provider, config.samples, config.seed, config.temperature);
  const auto [best_index, best] = select_best(texts);
  audit.semantic_samples = texts.size();
  audit.selected_sample = best_index;
  audit.prompt_id = best.prompt_id;

  // Symbolization and detection.
  std::set<std::string> detected;
  std::string symbolic_block(kOmitted);
  if (!config.no_symbolic) {
    const KnowledgeGraph empty;
    auto sym = symbolize_dataset(d, config.no_kg ? empty : kg);
    audit.rule_evaluations = sym.evaluations;
    audit.rule_warnings = sym.warnings;
    out.raw_findings = std::move(sym.raw_findings);
    out.findings = std::move(sym.findings);
    symbolic_block = symbolic_text(sym.facts, sym.rules, out.findings);
  } else {
    std::string detect(prompt_marker::kDetect);
    detect +=
        "\nList the devices whose KPIs deviate from their typical levels in the table below. Answer with one "
        "line \"anomalous: <comma-separated device ids>\" or \"anomalous: none\".\nTABLE\n" +
        table_text;
    detected = parse_detected(provider.complete(detect, 0.0, config.seed), d);
  }
  audit.raw_findings = out.raw_findings.size();
  audit.findings = out.findings.size();

  const EntitySet anomalous = config.no_symbolic ? EntitySet({detected.begin(), detected.end()})
                                                 : anomalous_entities(out.findings);
  audit.anomalous_entities = anomalous.ids();

  // Knowledge graph update and retrieval.
  std::map<std::string, std::set<std::string>> kpis_of;
  for (const auto& f : out.findings) kpis_of[f.entity].insert(f.kpi);
  RetrievalResult subgraph;
  std::string knowledge_block(kOmitted);
  if (!config.no_kg) {
    std::vector<Observation> exhibits;
    for (const auto& [entity, kpis] : kpis_of)
      for (const auto& k : kpis) exhibits.emplace_back(RelationEdge{entity, "exhibits", k});
    kg = update_graph(kg, exhibits);
    if (anomalous.empty()) {
      knowledge_block = "no anomalous entities; nothing retrieved";
    } else {
      kg = index_entities(kg);
      std::vector<RetrievalResult> parts;
      for (const auto& n : anomalous.ids()) {
        std::string query = n;
        for (const auto& k : kpis_of[n]) query += " " + k;
        parts.push_back(retrieve(kg, query, config.top_k, config.hops));
        ++audit.retrieval_calls;
      }
      subgraph = merge_results(parts);
      knowledge_block = subgraph.to_text();
    }
  }

  std::string problem;
  if (config.no_symbolic && !anomalous.empty())
    problem = "Devices " + join(anomalous.ids(), ", ") +
              " deviate from their typical KPI levels according to the provider; no rule evaluation was performed.";
  else
    problem = make_problem_statement(out.findings);

  out.context = concat_context(best.text, symbolic_block, knowledge_block, problem);

  // Diagnosis.
  out.blueprints = generate_blueprints(anomalous, out.findings, subgraph);
  const KnowledgeGraph no_graph;
  for (auto& b : out.blueprints) b.steps = extract_plan(b, config.no_kg ? no_graph : kg);
  audit.blueprints = out.blueprints.size();
  if (anomalous.empty()) {
    out.report = normal_report(out.findings);
  } else {
    const auto before = provider.call_count();
    out.report = run_diagnosis(out.context, out.blueprints, provider, {config.temperature, config.seed}, out.findings);
    audit.diagnosis_calls = provider.call_count() - before;
  }
  audit.provider_calls = provider.call_count();

  // Per-entity attribution: among confirmed blueprints naming the entity,
  // the cause indicated by the most of its violated KPIs.
  std::set<std::pair<std::string, std::string>> indicates;
  for (const auto& r : subgraph.relations)
    if (r.predicate == "indicates") indicates.insert({r.subject, r.object});
  for (const auto& e : anomalous.ids()) {
    std::string best_cause;
    long best_score = -1;
    for (std::size_t i = 0; i < out.blueprints.size() && i < out.report.per_blueprint.size(); ++i) {
      const auto& b = out.blueprints[i];
      if (out.report.per_blueprint[i].verdict != Verdict::confirmed || !b.evidence.contains(e)) continue;
      long score = 0;
      for (const auto& k : kpis_of[e]) score += indicates.count({k, b.cause}) ? 1 : 0;
      if (score > best_score) best_score = score, best_cause = b.cause;
    }
    out.attribution[e] = best_cause.empty() ? "unknown" : category_of(best_cause, kg);
  }

  for (const auto& [id, s] : d.series) {
    for (const auto& row : s.rows) {
      bool flagged = false;
      if (config.no_symbolic) {
        flagged = detected.count(id) > 0;
      } else {
        for (const auto& f : out.raw_findings)
          if (f.entity == id && f.window.contains(row.timestamp)) {
            flagged = true;
            break;
          }
      }
      SampleLabel p{id, row.timestamp, flagged, std::string(kNormalClass)};
      if (flagged) {
        auto it = out.attribution.find(id);
        p.category = it == out.attribution.end() ? "unknown" : it->second;
      }
      out.predictions.push_back(std::move(p));
    }
  }

  out.graph = std::move(kg);
  return out;
}

std::vector<MetricsRow> run_ablation(const Dataset& d, const std::vector<std::string>& variants,
                                     const RunConfig& base, LlmProvider& provider) {
  if (!d.labels) throw Error(Errc::Usage, "ablation needs a labeled dataset");
  const auto truth = sample_truth(d);
  std::vector<MetricsRow> rows;
  for (const auto& v : variants) {
    try {
      const auto cfg = variant_config(v, base);
      std::unique_ptr<LlmProvider> swapped;
      LlmProvider* p = &provider;
      if (cfg.provider != base.provider) {
        swapped = make_provider(cfg.provider);
        p = swapped.get();
      }
      const auto result = run_pipeline(d, cfg, *p);
      rows.push_back({v, compute_metrics(compute_confusion(result.predictions, truth))});
    } catch (const ProviderError& e) {
      throw ProviderError(v + ": " + e.detail(), e.attempts(), e.timeout_ms());
    } catch (const Error& e) {
      std::string message = e.what();
      const auto prefix = std::string(to_string(e.code())) + ": ";
      if (starts_with(message, prefix)) message.erase(0, prefix.size());
      throw Error(e.code(), v + ": " + message);
    }
  }
  return rows;
}

}  // namespace netsem
