#include <algorithm>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "CLI11.hpp"

#include "cli.hpp"
#include "netsem/datamodel.hpp"
#include "netsem/diagnose.hpp"
#include "netsem/error.hpp"
#include "netsem/format.hpp"
#include "netsem/fsutil.hpp"
#include "netsem/nkg.hpp"
#include "netsem/pipeline.hpp"
#include "netsem/semgen.hpp"
#include "netsem/simeval.hpp"

namespace fs = std::filesystem;

namespace netsem {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProvider = 1;
constexpr int kExitUsage = 2;

struct SimulateArgs {
  std::string topology = "star";
  int nodes = 9;
  std::string type = "uav";
  std::vector<std::string> faults;
  std::uint64_t seed = 0;
  Timestamp duration = 10000;
  Timestamp period = 250;
  double mesh_p = 0.4;
  std::string out;
};

struct DiagnoseArgs {
  std::string dataset;
  std::string out;
  std::string kg_in;
  std::string kg_out;
  RunConfig config;
};

struct KgArgs {
  std::string triples, dataset, graph, observations, out, query;
  int top_k = 5;
  int hops = 1;
};

struct EvalArgs {
  std::string predictions, labels, dataset, ablation;
  bool csv = false;
  RunConfig config;
};

struct StageArgs {
  std::string dataset;
  std::string variant = "self_heuristic";
  int samples = 5;
  std::uint64_t seed = 0;
  std::string provider = "mock";
  bool show_prompt = false;
  bool llm = false;
};

void add_run_flags(CLI::App* cmd, RunConfig& c) {
  cmd->add_option("--provider", c.provider, "LLM provider: mock or remote")->capture_default_str();
  cmd->add_option("--samples", c.samples, "semantic samples n")->capture_default_str();
  cmd->add_option("--temperature", c.temperature, "sampling temperature")->capture_default_str();
  cmd->add_option("--top-k", c.top_k, "retrieval candidates K")->capture_default_str();
  cmd->add_option("--hops", c.hops, "retrieval hops")->capture_default_str();
  cmd->add_flag("--no-kg", c.no_kg, "omit the knowledge graph");
  cmd->add_flag("--no-symbolic", c.no_symbolic, "omit rule evaluation");
  cmd->add_flag("--semantic-only", c.semantic_only, "omit both");
  cmd->add_option("--seed", c.seed, "seed")->capture_default_str();
}

std::string findings_tsv(const std::vector<AnomalyFinding>& findings) {
  auto opt = [](const std::optional<double>& v) { return v ? format_shortest(*v) : std::string(); };
  std::string out = "entity\tkpi\tobserved\trule\tlo\thi\tstart_ms\tend_ms\n";
  for (const auto& f : findings)
    out += f.entity + "\t" + f.kpi + "\t" + format_shortest(f.observed) + "\t" + f.violated_rule + "\t" + opt(f.lo) +
           "\t" + opt(f.hi) + "\t" + std::to_string(f.window.start) + "\t" + std::to_string(f.window.end) + "\n";
  return out;
}

KnowledgeGraph load_graph(const std::string& path) { return KnowledgeGraph::parse(read_file(path)); }

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  ScenarioSpec spec;
  auto kind = parse_topology_kind(a.topology);
  if (!kind || *kind == TopologyKind::unknown) throw Error(Errc::InvalidSpec, "--topology must be star, ring or mesh");
  auto type = parse_network_type(a.type);
  if (!type) throw Error(Errc::InvalidSpec, "--type must be mobile, vanet, uav or cellular");
  spec.topology_kind = *kind;
  spec.node_count = a.nodes;
  spec.network_type = *type;
  spec.duration_ms = a.duration;
  spec.sample_period_ms = a.period;
  spec.seed = a.seed;
  spec.mesh_edge_probability = a.mesh_p;
  for (const auto& f : a.faults) {
    auto inj = parse_fault_injection(f);
    if (!inj) throw Error(Errc::InvalidSpec, "--fault expects <category>:<device>:<start>-<end>, got '" + f + "'");
    spec.fault_injections.push_back(*inj);
  }
  const auto d = generate_scenario(spec);
  write_dataset(d, a.out);
  out << "wrote " << d.profiles.size() << " devices, " << (d.labels ? d.labels->size() : 0) << " fault labels to "
      << a.out << "\n";
  return kExitOk;
}

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
  const auto config = a.config.validated();
  const auto d = load_dataset(a.dataset);
  auto provider = make_provider(config.provider);
  std::optional<KnowledgeGraph> kg;
  if (!a.kg_in.empty()) kg = load_graph(a.kg_in);
  const auto result = run_pipeline(d, config, *provider, kg ? &*kg : nullptr);

  const fs::path target = a.out.empty() ? fs::path(a.dataset) / "diagnosis" : fs::path(a.out);
  const auto staged = staging_dir_for(target);
  write_file_atomic(staged / "report.json", result.report.to_json());
  write_file_atomic(staged / "report.txt", result.report.to_text());
  write_file_atomic(staged / "findings.tsv", findings_tsv(result.findings));
  write_file_atomic(staged / "context.txt", result.context.render());
  write_file_atomic(staged / "audit.json", result.audit.to_json());
  commit_dir(staged, target);
  if (!a.kg_out.empty()) write_file_atomic(a.kg_out, result.graph.serialize());
  out << result.report.to_text();
  return kExitOk;
}

int cmd_kg_build(const KgArgs& a, std::ostream& out, std::ostream& err) {
  GraphInput input;
  if (!a.dataset.empty()) {
    const auto d = load_dataset(a.dataset);
    input = knowledge_corpus(d.profiles);
    for (const auto& obs : device_observations(d.profiles, 0)) {
      if (const auto* e = std::get_if<Entity>(&obs)) input.entities.push_back(*e);
      else if (const auto* f = std::get_if<FactStatement>(&obs)) input.facts.push_back(*f);
    }
  }
  if (!a.triples.empty()) {
    auto parsed = parse_triples_text(read_file(a.triples));
    for (const auto& issue : parsed.errors)
      err << a.triples << ":" << issue.line << ": " << issue.message << ": " << issue.text << "\n";
    input.triples.insert(input.triples.end(), parsed.triples.begin(), parsed.triples.end());
  }
  const auto g = build_graph(input);
  write_file_atomic(a.out, g.serialize());
  out << g.entities().size() << " entities, " << g.relations().size() << " relations, " << g.fact_count()
      << " facts\n";
  return kExitOk;
}

int cmd_kg_update(const KgArgs& a, std::ostream& out) {
  const auto g = load_graph(a.graph);
  const auto observations = parse_observations(read_file(a.observations));
  UpdateStats stats;
  const auto updated = update_graph(g, observations, &stats);
  write_file_atomic(a.out.empty() ? a.graph : a.out, updated.serialize());
  out << stats.applied << " applied, " << stats.stale << " stale\n";
  return kExitOk;
}

int cmd_kg_query(const KgArgs& a, std::ostream& out) {
  if (a.query.empty()) throw Error(Errc::Usage, "--query is required");
  const auto g = index_entities(load_graph(a.graph));
  out << retrieve(g, a.query, a.top_k, a.hops).to_text();
  return kExitOk;
}

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  std::vector<MetricsRow> rows;
  if (!a.ablation.empty()) {
    if (a.dataset.empty()) throw Error(Errc::Usage, "--ablation needs --dataset");
    const auto config = a.config.validated();
    const auto d = load_dataset(a.dataset);
    auto provider = make_provider(config.provider);
    std::vector<std::string> variants;
    for (auto& v : split(a.ablation, ','))
      if (!trim(v).empty()) variants.emplace_back(trim(v));
    rows = run_ablation(d, variants, config, *provider);
  } else {
    if (a.predictions.empty() || a.labels.empty())
      throw Error(Errc::Usage, "eval needs --predictions and --labels, or --ablation with --dataset");
    const auto predictions = read_labels_csv(read_file(a.predictions));
    const auto truth = read_labels_csv(read_file(a.labels));
    rows.push_back({"eval", compute_metrics(compute_confusion(predictions, truth))});
  }
  out << (a.csv ? format_metrics_csv(rows) : format_metrics_table(rows));
  return kExitOk;
}

int cmd_semanticize(const StageArgs& a, std::ostream& out) {
  const auto d = load_dataset(a.dataset);
  auto variant = parse_prompt_variant(a.variant);
  if (!variant) throw Error(Errc::Usage, "unknown prompt variant '" + a.variant + "'");
  const auto table = render_table(d).to_text();
  std::vector<std::string> snippets;
  std::string context;
  if (*variant == PromptVariant::self_heuristic) {
    const auto kg = build_graph(knowledge_corpus(d.profiles));
    for (const auto& [id, p] : d.profiles)
      for (const auto& f : kg.facts_of(to_string(p.device_class)))
        snippets.push_back(format_triple({f.entity, f.attribute, f.value, true}));
    std::sort(snippets.begin(), snippets.end());
    snippets.erase(std::unique(snippets.begin(), snippets.end()), snippets.end());
    context = std::to_string(d.profiles.size()) + " " + std::string(to_string(d.topology.kind)) + " network devices";
  }
  const auto prompt = build_semantic_prompt(*variant, table, snippets, context);
  if (a.show_prompt) out << prompt.render() << "\n";
  auto provider = make_provider(a.provider);
  const auto texts = sample_semantics(prompt, *provider, a.samples, a.seed);
  const auto [index, best] = select_best(texts);
  out << "selected sample " << index << " of " << texts.size() << " (prompt " << best.prompt_id << ")\n";
  out << best.text << "\n";
  return kExitOk;
}

int cmd_symbolize(const StageArgs& a, std::ostream& out) {
  const auto d = load_dataset(a.dataset);
  if (a.llm) {
    std::string input;
    for (const auto& [id, p] : d.profiles) input += "device " + id + " class " + std::string(to_string(p.device_class)) + "\n";
    for (const auto& [x, y] : d.topology.edges) input += "edge " + x + " " + y + "\n";
    const auto prompt = build_symbolic_prompt({builtin_symbolic_demonstration()}, input);
    if (a.show_prompt) out << prompt.render() << "\n";
    auto provider = make_provider(a.provider);
    out << provider->complete(prompt.render(), 0.0, a.seed);
    return kExitOk;
  }
  const auto kg = build_graph(knowledge_corpus(d.profiles));
  const auto sym = symbolize_dataset(d, kg);
  for (const auto& w : sym.warnings) out << "warning: " << w << "\n";
  out << symbolic_text(sym.facts, sym.rules, sym.findings) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"semantic and symbolic network fault diagnosis", "netsem"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "generate a labeled synthetic dataset");
  simulate->add_option("--topology", sim.topology, "star, ring or mesh")->capture_default_str();
  simulate->add_option("--nodes", sim.nodes, "node count")->capture_default_str();
  simulate->add_option("--type", sim.type, "mobile, vanet, uav or cellular")->capture_default_str();
  simulate->add_option("--fault", sim.faults, "<category>:<device>:<start>-<end>, repeatable");
  simulate->add_option("--seed", sim.seed, "seed")->capture_default_str();
  simulate->add_option("--duration", sim.duration, "duration in ms")->capture_default_str();
  simulate->add_option("--period", sim.period, "sample period in ms")->capture_default_str();
  simulate->add_option("--mesh-p", sim.mesh_p, "mesh edge probability")->capture_default_str();
  simulate->add_option("--out", sim.out, "output dataset directory")->required();

  DiagnoseArgs diag;
  auto* diagnose = app.add_subcommand("diagnose", "run the diagnosis pipeline on a dataset");
  diagnose->add_option("dataset", diag.dataset, "dataset directory")->required();
  diagnose->add_option("--out", diag.out, "report directory (default <dataset>/diagnosis)");
  diagnose->add_option("--kg", diag.kg_in, "starting knowledge graph file");
  diagnose->add_option("--kg-out", diag.kg_out, "write the updated knowledge graph here");
  add_run_flags(diagnose, diag.config);

  KgArgs kga;
  auto* kg = app.add_subcommand("kg", "build, update or query a knowledge graph file");
  kg->require_subcommand(1);
  auto* kg_build = kg->add_subcommand("build", "build a graph from triples and/or a dataset's corpus");
  kg_build->add_option("--triples", kga.triples, "triple file");
  kg_build->add_option("--dataset", kga.dataset, "add the generated corpus for this dataset");
  kg_build->add_option("--out", kga.out, "graph file")->required();
  auto* kg_update = kg->add_subcommand("update", "apply E/F/R observation records");
  kg_update->add_option("--graph", kga.graph, "graph file")->required();
  kg_update->add_option("--observations", kga.observations, "observation file")->required();
  kg_update->add_option("--out", kga.out, "output graph file (default: overwrite --graph)");
  auto* kg_query = kg->add_subcommand("query", "retrieve a subgraph");
  kg_query->add_option("--graph", kga.graph, "graph file")->required();
  kg_query->add_option("--query", kga.query, "query text")->required();
  kg_query->add_option("--top-k", kga.top_k, "candidates K")->capture_default_str();
  kg_query->add_option("--hops", kga.hops, "hops")->capture_default_str();

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "compute metrics");
  eval->add_option("--predictions", ev.predictions, "prediction labels CSV");
  eval->add_option("--labels", ev.labels, "truth labels CSV");
  eval->add_option("--dataset", ev.dataset, "labeled dataset for --ablation");
  eval->add_option("--ablation", ev.ablation, "comma-separated variants");
  eval->add_flag("--csv", ev.csv, "print variant,accuracy,recall,fnr,fpr rows");
  add_run_flags(eval, ev.config);

  StageArgs sem;
  auto* semanticize = app.add_subcommand("semanticize", "print the selected semantic description");
  semanticize->add_option("dataset", sem.dataset, "dataset directory")->required();
  semanticize->add_option("--variant", sem.variant, "zero_shot, general_info, expertise or self_heuristic")
      ->capture_default_str();
  semanticize->add_option("--samples", sem.samples, "samples n")->capture_default_str();
  semanticize->add_option("--seed", sem.seed, "seed")->capture_default_str();
  semanticize->add_option("--provider", sem.provider, "mock or remote")->capture_default_str();
  semanticize->add_flag("--show-prompt", sem.show_prompt, "print the rendered prompt first");

  StageArgs sym;
  auto* symbolize = app.add_subcommand("symbolize", "print facts, rules and findings");
  symbolize->add_option("dataset", sym.dataset, "dataset directory")->required();
  symbolize->add_flag("--llm", sym.llm, "symbolize the topology through the provider instead");
  symbolize->add_option("--provider", sym.provider, "mock or remote")->capture_default_str();
  symbolize->add_option("--seed", sym.seed, "seed")->capture_default_str();
  symbolize->add_flag("--show-prompt", sym.show_prompt, "print the rendered prompt first");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*simulate) return cmd_simulate(sim, out);
    if (*diagnose) return cmd_diagnose(diag, out);
    if (*kg_build) return cmd_kg_build(kga, out, err);
    if (*kg_update) return cmd_kg_update(kga, out);
    if (*kg_query) return cmd_kg_query(kga, out);
    if (*eval) return cmd_eval(ev, out);
    if (*semanticize) return cmd_semanticize(sem, out);
    if (*symbolize) return cmd_symbolize(sym, out);
  } catch (const ProviderError& e) {
    err << "error: " << e.what();
    if (e.attempts() > 1) err << " after " << e.attempts() << " attempts";
    err << "\n";
    return kExitProvider;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == Errc::InvalidSpec) err << "usage: netsem simulate --help\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace netsem
