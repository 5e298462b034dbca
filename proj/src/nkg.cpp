#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

#include "netsem/error.hpp"
#include "netsem/format.hpp"
#include "netsem/nkg.hpp"
#include "netsem/symgen.hpp"

namespace netsem {

namespace {

constexpr EntityKind kAllKinds[] = {EntityKind::device,     EntityKind::metric, EntityKind::fault_type,
                                    EntityKind::state,      EntityKind::protocol, EntityKind::step,
                                    EntityKind::device_class};

std::string escape_field(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '\\') out += "\\\\";
    else if (c == '\t') out += "\\t";
    else if (c == '\n') out += "\\n";
    else out += c;
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '\\' || i + 1 == s.size()) {
      out += s[i];
      continue;
    }
    char n = s[++i];
    if (n == 't') out += '\t';
    else if (n == 'n') out += '\n';
    else out += n;
  }
  return out;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == '\t') {
      out.push_back(unescape_field(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

Timestamp parse_ts(const std::string& text, std::size_t line_no) {
  auto v = parse_int(text);
  if (!v) throw Error(Errc::ParseError, "line " + std::to_string(line_no) + ": bad timestamp '" + text + "'");
  return *v;
}

std::string humanize(std::string_view id) {
  std::string out(id);
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

}  // namespace

std::string_view to_string(EntityKind k) {
  switch (k) {
    case EntityKind::device: return "device";
    case EntityKind::metric: return "metric";
    case EntityKind::fault_type: return "fault_type";
    case EntityKind::state: return "state";
    case EntityKind::protocol: return "protocol";
    case EntityKind::step: return "step";
    case EntityKind::device_class: return "device_class";
  }
  return "state";
}

std::optional<EntityKind> parse_entity_kind(std::string_view text) {
  for (auto k : kAllKinds)
    if (to_string(k) == text) return k;
  return std::nullopt;
}

std::vector<FactStatement> KnowledgeGraph::facts() const {
  std::vector<FactStatement> out;
  out.reserve(facts_.size());
  for (const auto& [key, f] : facts_) out.push_back(f);
  return out;
}

const Entity* KnowledgeGraph::entity(std::string_view id) const {
  auto it = entities_.find(std::string(id));
  return it == entities_.end() ? nullptr : &it->second;
}

const FactStatement* KnowledgeGraph::fact(std::string_view entity, std::string_view attribute) const {
  auto it = facts_.find({std::string(entity), std::string(attribute)});
  return it == facts_.end() ? nullptr : &it->second;
}

std::vector<FactStatement> KnowledgeGraph::facts_of(std::string_view entity) const {
  std::vector<FactStatement> out;
  const std::string id(entity);
  for (auto it = facts_.lower_bound({id, ""}); it != facts_.end() && it->first.first == id; ++it)
    out.push_back(it->second);
  return out;
}

std::vector<RelationEdge> KnowledgeGraph::out_edges(std::string_view id) const {
  std::vector<RelationEdge> out;
  const std::string s(id);
  for (auto it = relations_.lower_bound({s, "", ""}); it != relations_.end() && it->subject == s; ++it)
    out.push_back(*it);
  return out;
}

std::vector<RelationEdge> KnowledgeGraph::in_edges(std::string_view id) const {
  std::vector<RelationEdge> out;
  for (const auto& r : relations_)
    if (r.object == id) out.push_back(r);
  return out;
}

std::vector<std::string> KnowledgeGraph::neighbors(std::string_view id) const {
  auto it = adjacency_.find(std::string(id));
  if (it == adjacency_.end()) return {};
  return {it->second.begin(), it->second.end()};
}

void KnowledgeGraph::put_entity(Entity e) {
  e.attributes.clear();
  for (const auto& f : facts_of(e.id)) e.attributes[f.attribute] = f.value;
  if (index_) index_->erase(e.id);
  entities_[e.id] = std::move(e);
}

void KnowledgeGraph::ensure_entity(const std::string& id, EntityKind kind, Timestamp at) {
  if (entities_.count(id)) return;
  put_entity(Entity{id, id, kind, {}, at});
}

void KnowledgeGraph::add_relation(RelationEdge r) {
  ensure_entity(r.subject, EntityKind::state);
  ensure_entity(r.object, EntityKind::state);
  adjacency_[r.subject].insert(r.object);
  adjacency_[r.object].insert(r.subject);
  relations_.insert(std::move(r));
}

void KnowledgeGraph::put_fact(FactStatement f) {
  ensure_entity(f.entity, EntityKind::state);
  entities_[f.entity].attributes[f.attribute] = f.value;
  if (index_) index_->erase(f.entity);
  auto key = std::make_pair(f.entity, f.attribute);
  facts_[key] = std::move(f);
}

void KnowledgeGraph::invalidate(const std::string& id) {
  if (index_) index_->erase(id);
}

bool KnowledgeGraph::referentially_intact() const {
  for (const auto& r : relations_)
    if (!entities_.count(r.subject) || !entities_.count(r.object)) return false;
  for (const auto& [key, f] : facts_)
    if (!entities_.count(key.first)) return false;
  if (index_)
    for (const auto& [id, v] : *index_)
      if (!entities_.count(id)) return false;
  return true;
}

std::string KnowledgeGraph::serialize() const {
  std::vector<std::string> e_lines, r_lines, f_lines;
  for (const auto& [id, e] : entities_)
    e_lines.push_back("E\t" + escape_field(e.id) + "\t" + escape_field(e.name) + "\t" +
                      std::string(to_string(e.kind)) + "\t" + std::to_string(e.updated_at));
  for (const auto& r : relations_)
    r_lines.push_back("R\t" + escape_field(r.subject) + "\t" + escape_field(r.predicate) + "\t" +
                      escape_field(r.object));
  for (const auto& [key, f] : facts_)
    f_lines.push_back("F\t" + escape_field(f.entity) + "\t" + escape_field(f.attribute) + "\t" +
                      escape_field(f.value) + "\t" + std::to_string(f.updated_at));
  std::string out;
  for (auto* section : {&e_lines, &r_lines, &f_lines}) {
    std::sort(section->begin(), section->end());
    for (const auto& l : *section) out += l + "\n";
  }
  return out;
}

KnowledgeGraph KnowledgeGraph::parse(std::string_view text) {
  KnowledgeGraph g;
  std::vector<RelationEdge> relations;
  std::vector<FactStatement> facts;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    auto fields = split_fields(line);
    const auto where = "line " + std::to_string(line_no);
    if (fields[0] == "E" && fields.size() == 5) {
      auto kind = parse_entity_kind(fields[3]);
      if (!kind) throw Error(Errc::ParseError, where + ": unknown entity kind '" + fields[3] + "'");
      g.put_entity(Entity{fields[1], fields[2], *kind, {}, parse_ts(fields[4], line_no)});
    } else if (fields[0] == "R" && fields.size() == 4) {
      relations.push_back({fields[1], fields[2], fields[3]});
    } else if (fields[0] == "F" && fields.size() == 5) {
      facts.push_back({fields[1], fields[2], fields[3], parse_ts(fields[4], line_no)});
    } else {
      throw Error(Errc::ParseError, where + ": expected an E, R or F record");
    }
  }
  for (auto& r : relations) g.add_relation(std::move(r));
  for (auto& f : facts) g.put_fact(std::move(f));
  return g;
}

KnowledgeGraph build_graph(const GraphInput& input) {
  KnowledgeGraph g;
  std::vector<Entity> entities = input.entities;
  std::sort(entities.begin(), entities.end(), [](const Entity& a, const Entity& b) {
    return std::tie(a.id, a.updated_at) < std::tie(b.id, b.updated_at);
  });
  for (const auto& e : entities) {
    g.put_entity(Entity{e.id, e.name.empty() ? e.id : e.name, e.kind, {}, e.updated_at});
  }
  std::vector<FactStatement> facts = input.facts;
  for (const auto& e : entities)
    for (const auto& [attr, value] : e.attributes) facts.push_back({e.id, attr, value, e.updated_at});

  std::vector<Triple> triples = input.triples;
  std::sort(triples.begin(), triples.end());
  for (const auto& t : triples) {
    if (t.literal) {
      facts.push_back({t.subject, t.predicate, t.object, 0});
    } else if (t.predicate == "is_a" && parse_entity_kind(t.object)) {
      const auto* cur = g.entity(t.subject);
      Entity e = cur ? *cur : Entity{t.subject, t.subject, EntityKind::state, {}, 0};
      e.kind = *parse_entity_kind(t.object);
      g.put_entity(std::move(e));
    } else {
      g.add_relation({t.subject, t.predicate, t.object});
    }
  }
  // Order independence: the larger (updated_at, value) wins per key.
  std::sort(facts.begin(), facts.end(), [](const FactStatement& a, const FactStatement& b) {
    return std::tie(a.entity, a.attribute, a.updated_at, a.value) <
           std::tie(b.entity, b.attribute, b.updated_at, b.value);
  });
  for (auto& f : facts) g.put_fact(std::move(f));
  return g;
}

std::optional<Triple> parse_triple_line(std::string_view line) {
  line = trim(line);
  std::string s, p, o;
  if (line.size() >= 2 && line.front() == '(' && line.back() == ')') {
    auto inner = line.substr(1, line.size() - 2);
    auto c1 = inner.find(',');
    if (c1 == std::string_view::npos) return std::nullopt;
    auto c2 = inner.find(',', c1 + 1);
    if (c2 == std::string_view::npos) return std::nullopt;
    s = std::string(trim(inner.substr(0, c1)));
    p = std::string(trim(inner.substr(c1 + 1, c2 - c1 - 1)));
    o = std::string(trim(inner.substr(c2 + 1)));
  } else {
    auto fields = split(line, '\t');
    if (fields.size() != 3) return std::nullopt;
    s = std::string(trim(fields[0]));
    p = std::string(trim(fields[1]));
    o = std::string(trim(fields[2]));
  }
  bool literal = false;
  if (o.size() >= 2 && o.front() == '"' && o.back() == '"') {
    o = o.substr(1, o.size() - 2);
    literal = true;
  }
  if (s.empty() || p.empty() || (o.empty() && !literal)) return std::nullopt;
  return Triple{s, p, o, literal};
}

std::string format_triple(const Triple& t) {
  return "(" + t.subject + ", " + t.predicate + ", " + (t.literal ? "\"" + t.object + "\"" : t.object) + ")";
}

TripleExtraction parse_triples_text(std::string_view text) {
  TripleExtraction out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (auto t = parse_triple_line(line)) out.triples.push_back(*t);
    else out.errors.push_back({line_no, std::string(line), "expected (subject, predicate, object)"});
  }
  return out;
}

TripleExtraction extract_triples(const std::string& text, LlmProvider& provider, std::uint64_t seed) {
  if (trim(text).empty()) return {};
  std::string prompt(prompt_marker::kTriples);
  prompt +=
      "\nExtract knowledge triples from the text below. Answer with one triple per line in the form "
      "(subject, predicate, object). Quote literal values.\nTEXT\n";
  prompt += text;
  return parse_triples_text(provider.complete(prompt, 0.0, seed));
}

KnowledgeGraph update_graph(const KnowledgeGraph& g, const std::vector<Observation>& observations,
                            UpdateStats* stats) {
  KnowledgeGraph out = g;
  UpdateStats st;
  auto note_new = [&](const std::string& id) {
    if (!out.entity(id)) ++st.inserted_entities;
  };
  for (const auto& obs : observations) {
    if (const auto* e = std::get_if<Entity>(&obs)) {
      const auto* cur = out.entity(e->id);
      const std::string kind(to_string(e->kind));
      if (!cur || std::tie(e->updated_at, e->name, kind) >
                      std::make_tuple(cur->updated_at, cur->name, std::string(to_string(cur->kind)))) {
        note_new(e->id);
        out.put_entity(Entity{e->id, e->name.empty() ? e->id : e->name, e->kind, {}, e->updated_at});
        ++st.applied;
        st.touched.insert(e->id);
      } else {
        ++st.stale;
      }
      for (const auto& [attr, value] : e->attributes) {
        const auto* f = out.fact(e->id, attr);
        if (!f || std::tie(e->updated_at, value) > std::tie(f->updated_at, f->value)) {
          out.put_fact({e->id, attr, value, e->updated_at});
          st.touched.insert(e->id);
        }
      }
    } else if (const auto* f = std::get_if<FactStatement>(&obs)) {
      const auto* cur = out.fact(f->entity, f->attribute);
      if (!cur || std::tie(f->updated_at, f->value) > std::tie(cur->updated_at, cur->value)) {
        note_new(f->entity);
        out.put_fact(*f);
        ++st.applied;
        st.touched.insert(f->entity);
      } else {
        ++st.stale;
      }
    } else {
      const auto& r = std::get<RelationEdge>(obs);
      if (!out.relations().count(r)) {
        note_new(r.subject);
        if (r.object != r.subject) note_new(r.object);
        out.add_relation(r);
        ++st.applied;
        st.touched.insert(r.subject);
        st.touched.insert(r.object);
      }
    }
  }
  for (const auto& id : st.touched) out.invalidate(id);
  if (stats) *stats = std::move(st);
  return out;
}

std::vector<Observation> parse_observations(std::string_view text) {
  std::vector<Observation> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty() || trim(line).front() == '#') continue;
    auto fields = split_fields(line);
    const auto where = "line " + std::to_string(line_no);
    if (fields[0] == "E" && fields.size() == 5) {
      auto kind = parse_entity_kind(fields[3]);
      if (!kind) throw Error(Errc::ParseError, where + ": unknown entity kind '" + fields[3] + "'");
      out.emplace_back(Entity{fields[1], fields[2], *kind, {}, parse_ts(fields[4], line_no)});
    } else if (fields[0] == "R" && fields.size() == 4) {
      out.emplace_back(RelationEdge{fields[1], fields[2], fields[3]});
    } else if (fields[0] == "F" && fields.size() == 5) {
      out.emplace_back(FactStatement{fields[1], fields[2], fields[3], parse_ts(fields[4], line_no)});
    } else {
      throw Error(Errc::ParseError, where + ": expected an E, R or F record");
    }
  }
  return out;
}

std::string entity_embedding_text(const Entity& e) {
  std::string out = e.name + " " + std::string(to_string(e.kind));
  for (const auto& [attr, value] : e.attributes) out += " " + attr;
  return out;
}

KnowledgeGraph index_entities(const KnowledgeGraph& g, const Embedder& embedder) {
  KnowledgeGraph out = g;
  std::map<std::string, UnitVector> index;
  const auto* existing = g.index();
  for (const auto& [id, e] : g.entities()) {
    if (existing) {
      auto it = existing->find(id);
      if (it != existing->end()) {
        index.emplace(id, it->second);
        continue;
      }
    }
    index.emplace(id, embedder.embed(entity_embedding_text(e)));
  }
  out.set_index(std::move(index));
  return out;
}

double quantize_score(double score) { return std::round(score * 1e12) / 1e12; }

namespace {

void sort_candidates(std::vector<std::pair<std::string, double>>& c) {
  std::sort(c.begin(), c.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
}

std::string format_score(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", s);
  return buf;
}

}  // namespace

std::string RetrievalResult::to_text() const {
  std::string out = "candidates:";
  for (std::size_t i = 0; i < candidates.size(); ++i)
    out += (i ? ", " : " ") + candidates[i].first + " (" + format_score(candidates[i].second) + ")";
  out += "\n";
  for (const auto& r : relations) out += "(" + r.subject + ", " + r.predicate + ", " + r.object + ")\n";
  for (const auto& f : facts) out += "(" + f.entity + ", " + f.attribute + ", \"" + f.value + "\")\n";
  return out;
}

RetrievalResult retrieve(const KnowledgeGraph& g, std::string_view query, int top_k, int hops,
                         const Embedder& embedder) {
  if (g.empty()) throw Error(Errc::EmptyGraph, "cannot retrieve from an empty graph");
  if (top_k < 1) throw Error(Errc::Usage, "top_k must be >= 1");
  if (hops < 0) throw Error(Errc::Usage, "hops must be >= 0");
  if (trim(query).empty()) throw Error(Errc::EmptyText, "empty retrieval query");
  const auto q = embedder.embed(query);
  const auto* index = g.index();

  std::vector<std::pair<std::string, double>> scored;
  scored.reserve(g.entities().size());
  for (const auto& [id, e] : g.entities()) {
    std::optional<double> s;
    if (index) {
      auto it = index->find(id);
      if (it != index->end()) s = q.dot(it->second);
    }
    if (!s) s = q.dot(embedder.embed(entity_embedding_text(e)));
    scored.emplace_back(id, quantize_score(*s));
  }
  sort_candidates(scored);
  scored.resize(std::min<std::size_t>(scored.size(), static_cast<std::size_t>(top_k)));

  std::map<std::string, int> dist;
  std::deque<std::string> queue;
  for (const auto& [id, s] : scored) {
    dist[id] = 0;
    queue.push_back(id);
  }
  while (!queue.empty()) {
    auto cur = queue.front();
    queue.pop_front();
    const int d = dist[cur];
    if (d >= hops) continue;
    for (const auto& n : g.neighbors(cur)) {
      if (dist.count(n)) continue;
      dist[n] = d + 1;
      queue.push_back(n);
    }
  }

  RetrievalResult out;
  out.candidates = std::move(scored);
  for (const auto& [id, d] : dist) {
    out.entities.push_back(*g.entity(id));
    for (auto& f : g.facts_of(id)) out.facts.push_back(std::move(f));
  }
  auto expands = [&](const std::string& id) {
    auto it = dist.find(id);
    return it != dist.end() && it->second < hops;
  };
  for (const auto& r : g.relations())
    if (expands(r.subject) || expands(r.object)) out.relations.push_back(r);
  std::sort(out.facts.begin(), out.facts.end());
  return out;
}

RetrievalResult merge_results(const std::vector<RetrievalResult>& parts) {
  std::map<std::string, double> best;
  std::map<std::string, Entity> entities;
  std::set<RelationEdge> relations;
  std::set<FactStatement> facts;
  for (const auto& p : parts) {
    for (const auto& [id, s] : p.candidates) {
      auto it = best.find(id);
      if (it == best.end() || s > it->second) best[id] = s;
    }
    for (const auto& e : p.entities) entities.emplace(e.id, e);
    relations.insert(p.relations.begin(), p.relations.end());
    facts.insert(p.facts.begin(), p.facts.end());
  }
  RetrievalResult out;
  out.candidates.assign(best.begin(), best.end());
  sort_candidates(out.candidates);
  for (auto& [id, e] : entities) out.entities.push_back(std::move(e));
  out.relations.assign(relations.begin(), relations.end());
  out.facts.assign(facts.begin(), facts.end());
  return out;
}

namespace {

struct FaultKnowledge {
  FaultCategory category;
  std::string phenomenon;
  std::string solution;
  std::vector<std::string> metrics;
  std::vector<std::pair<std::string, std::string>> steps;  // description, check kind
};

const std::vector<FaultKnowledge>& fault_knowledge() {
  static const std::vector<FaultKnowledge> k = {
      {FaultCategory::application_crash,
       "application throughput drops to zero while the link stays up",
       "restart the application process; inspect application logs",
       {"app_throughput_mbps"},
       {{"check application process status", "generic"},
        {"compare application and link throughput", "traffic_stats"}}},
      {FaultCategory::malicious_traffic,
       "packet rate and error rate rise far above normal levels",
       "block the offending source; rate-limit the affected interface",
       {"packet_rate_pps", "error_rate_pct"},
       {{"check traffic statistics for abnormal packet rates", "traffic_stats"},
        {"review firewall and access configuration", "config"}}},
      {FaultCategory::network_congestion,
       "delay and packet loss increase on a busy path",
       "reroute traffic over a less loaded path; increase link capacity or apply traffic shaping",
       {"delay_ms", "packet_loss_pct"},
       {{"check traffic statistics", "traffic_stats"},
        {"inspect the routing table for path changes", "routing_table"},
        {"verify link queue configuration", "config"}}},
      {FaultCategory::network_node_crash,
       "a node stops sending and its neighbors report ports down",
       "restart the crashed node; restore the failed links",
       {"throughput_mbps", "port_state"},
       {{"check network interface status", "interface_status"},
        {"verify device power and process state", "generic"}}},
      {FaultCategory::out_of_range,
       "signal strength falls below the receiver floor as distance exceeds range",
       "move the device back within communication range; add a relay node",
       {"rssi_dbm", "distance_m"},
       {{"check received signal strength", "signal"},
        {"verify device position against communication range", "generic"}}},
      {FaultCategory::communication_obstacles,
       "signal strength fluctuates and packet loss rises intermittently",
       "reposition the devices to restore line of sight; increase transmit power",
       {"rssi_dbm", "packet_loss_pct"},
       {{"check received signal strength over time", "signal"},
        {"inspect the line of sight between peers", "generic"}}},
  };
  return k;
}

}  // namespace

GraphInput knowledge_corpus(const std::map<std::string, DeviceProfile>& profiles) {
  GraphInput in;
  auto entity = [&](std::string id, EntityKind kind) {
    in.entities.push_back(Entity{id, id, kind, {}, 0});
  };
  auto fact = [&](std::string e, std::string a, std::string v) {
    in.facts.push_back({std::move(e), std::move(a), std::move(v), 0});
  };
  auto rel = [&](std::string s, std::string p, std::string o) {
    in.triples.push_back({std::move(s), std::move(p), std::move(o), false});
  };

  const std::vector<std::string> metrics = {"delay_ms",        "packet_loss_pct", "throughput_mbps",
                                            "error_rate_pct",  "rssi_dbm",        "packet_rate_pps",
                                            "app_throughput_mbps", "distance_m", std::string(kPortStateKpi)};
  for (const auto& m : metrics) {
    entity(m, EntityKind::metric);
    fact(m, "unit", m == kPortStateKpi ? "1" : default_unit(m));
  }

  for (const auto& k : fault_knowledge()) {
    const std::string id(fault_entity(k.category));
    entity(id, EntityKind::fault_type);
    fact(id, "category", std::string(display_name(k.category)));
    fact(id, "phenomenon", k.phenomenon);
    fact(id, "solution", k.solution);
    for (const auto& m : k.metrics) rel(m, "indicates", id);
    for (std::size_t i = 0; i < k.steps.size(); ++i) {
      const auto step = "step." + id + "." + std::to_string(i + 1);
      in.entities.push_back(Entity{step, k.steps[i].first, EntityKind::step, {}, 0});
      fact(step, "order", std::to_string(i + 1));
      fact(step, "check_kind", k.steps[i].second);
      rel(id, "diagnosed_by", step);
    }
  }

  std::map<DeviceClass, const DeviceProfile*> classes;
  for (const auto& [id, p] : profiles) classes.emplace(p.device_class, &p);
  for (const auto& [cls, p] : classes) {
    const std::string id(to_string(cls));
    entity(id, EntityKind::device_class);
    const auto nominal = nominal_kpis(cls);
    fact(id, "threshold:delay_ms", "within[0,100] ms");
    fact(id, "threshold:packet_loss_pct", "within[0,5] %");
    fact(id, "threshold:error_rate_pct", "within[0,2] %");
    fact(id, "threshold:rssi_dbm", ">= -90 dBm");
    fact(id, "threshold:throughput_mbps", ">= 0.1 Mbps");
    fact(id, "threshold:packet_rate_pps", "<= " + format_shortest(5 * nominal.packet_rate_pps) + " pps");
    if (p->range_m > 0) fact(id, "threshold:distance_m", "<= " + format_shortest(p->range_m) + " m");
    for (const auto& m : metrics) rel(id, "has_metric", m);
    if (!p->protocol.empty()) {
      entity(p->protocol, EntityKind::protocol);
      rel(id, "uses_protocol", p->protocol);
    }
  }
  return in;
}

std::vector<Observation> device_observations(const std::map<std::string, DeviceProfile>& profiles,
                                             Timestamp at) {
  std::vector<Observation> out;
  for (const auto& [id, p] : profiles) {
    out.emplace_back(Entity{id, id, EntityKind::device, {}, at});
    out.emplace_back(FactStatement{id, "class", std::string(to_string(p.device_class)), at});
    if (!p.protocol.empty()) out.emplace_back(FactStatement{id, "protocol", p.protocol, at});
    out.emplace_back(FactStatement{id, "range_m", format_shortest(p.range_m) + " m", at});
  }
  return out;
}

std::string render_prose(const KnowledgeGraph& g) {
  std::ostringstream out;
  for (const auto& [id, e] : g.entities()) {
    out << "The entity named " << e.name << " is a " << humanize(to_string(e.kind)) << ".";
    for (const auto& [attr, value] : e.attributes)
      out << " The " << humanize(attr) << " of " << e.name << " is " << value << ".";
    out << "\n";
  }
  for (const auto& r : g.relations()) {
    const auto* s = g.entity(r.subject);
    const auto* o = g.entity(r.object);
    out << "The " << (s ? s->name : r.subject) << " entity " << humanize(r.predicate) << " the "
        << (o ? o->name : r.object) << " entity.\n";
  }
  return out.str();
}

TokenEconomy token_economy(const KnowledgeGraph& g) {
  std::size_t triples = 0;
  for (const auto& r : g.relations()) triples += format_triple({r.subject, r.predicate, r.object, false}).size() + 1;
  for (const auto& f : g.facts()) triples += format_triple({f.entity, f.attribute, f.value, true}).size() + 1;
  return {triples, render_prose(g).size()};
}

}  // namespace netsem
