#pragma once

// Network knowledge graph G = {E, R, F}: entities, relation edges and fact
// statements, with an entity embedding index for similarity retrieval and
// multi-hop neighborhood expansion.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "netsem/datamodel.hpp"
#include "netsem/embedding.hpp"
#include "netsem/provider.hpp"

namespace netsem {

enum class EntityKind { device, metric, fault_type, state, protocol, step, device_class };

std::string_view to_string(EntityKind k);
std::optional<EntityKind> parse_entity_kind(std::string_view text);

struct Entity {
  std::string id;
  std::string name;
  EntityKind kind = EntityKind::state;
  /// Mirrors the entity's current fact statements (attribute -> value).
  std::map<std::string, std::string> attributes;
  Timestamp updated_at = 0;
  friend bool operator==(const Entity&, const Entity&) = default;
};

struct RelationEdge {
  std::string subject;
  std::string predicate;
  std::string object;
  friend auto operator<=>(const RelationEdge&, const RelationEdge&) = default;
};

struct FactStatement {
  std::string entity;
  std::string attribute;
  std::string value;  // text, or "<number> <unit>"
  Timestamp updated_at = 0;
  friend auto operator<=>(const FactStatement&, const FactStatement&) = default;
};

/// Raw (subject, predicate, object) as extracted from text. A literal
/// object becomes a fact statement rather than a relation.
struct Triple {
  std::string subject;
  std::string predicate;
  std::string object;
  bool literal = false;
  friend auto operator<=>(const Triple&, const Triple&) = default;
};

struct GraphInput {
  std::vector<Entity> entities;
  std::vector<Triple> triples;
  std::vector<FactStatement> facts;
};

class KnowledgeGraph {
 public:
  const std::map<std::string, Entity>& entities() const { return entities_; }
  const std::set<RelationEdge>& relations() const { return relations_; }
  std::vector<FactStatement> facts() const;
  std::size_t fact_count() const { return facts_.size(); }
  bool empty() const { return entities_.empty(); }

  const Entity* entity(std::string_view id) const;
  const FactStatement* fact(std::string_view entity, std::string_view attribute) const;
  std::vector<FactStatement> facts_of(std::string_view entity) const;
  std::vector<RelationEdge> out_edges(std::string_view id) const;
  std::vector<RelationEdge> in_edges(std::string_view id) const;
  /// Undirected neighbors over relation edges, sorted.
  std::vector<std::string> neighbors(std::string_view id) const;

  /// Inserts or replaces an entity; keeps attributes in sync with facts.
  void put_entity(Entity e);
  /// Auto-creates a bare entity of `kind` if `id` is unseen.
  void ensure_entity(const std::string& id, EntityKind kind, Timestamp at = 0);
  void add_relation(RelationEdge r);
  void put_fact(FactStatement f);

  bool has_index() const { return index_.has_value(); }
  const std::map<std::string, UnitVector>* index() const { return index_ ? &*index_ : nullptr; }
  void set_index(std::map<std::string, UnitVector> index) { index_ = std::move(index); }
  void invalidate(const std::string& id);

  /// Every relation and fact endpoint resolves, and the index (if any)
  /// covers no unknown entity.
  bool referentially_intact() const;

  /// Tab-separated E/R/F lines, sorted within each section.
  std::string serialize() const;
  static KnowledgeGraph parse(std::string_view text);

  /// Set equality over entities, relations and facts; the index is ignored.
  friend bool operator==(const KnowledgeGraph& a, const KnowledgeGraph& b) {
    return a.entities_ == b.entities_ && a.relations_ == b.relations_ && a.facts_ == b.facts_;
  }

 private:
  std::map<std::string, Entity> entities_;
  std::set<RelationEdge> relations_;
  std::map<std::pair<std::string, std::string>, FactStatement> facts_;
  std::map<std::string, std::set<std::string>> adjacency_;
  std::optional<std::map<std::string, UnitVector>> index_;
};

/// Referential integrity by auto-creating endpoints as kind=state. A triple
/// (x, is_a, <kind name>) declares x's kind instead of adding an edge.
KnowledgeGraph build_graph(const GraphInput& input);

/// Parses "(s, p, o)" or tab-separated "s<TAB>p<TAB>o"; a double-quoted
/// object is a literal. Returns nullopt for malformed lines.
std::optional<Triple> parse_triple_line(std::string_view line);
std::string format_triple(const Triple& t);

struct ParseIssue {
  std::size_t line = 0;
  std::string text;
  std::string message;
};

struct TripleExtraction {
  std::vector<Triple> triples;
  std::vector<ParseIssue> errors;
};

/// LLM-backed triple extraction; malformed response lines are reported and
/// skipped, valid ones kept.
TripleExtraction extract_triples(const std::string& text, LlmProvider& provider, std::uint64_t seed = 0);

/// Reads a triples file: one triple per line, '#' comments.
TripleExtraction parse_triples_text(std::string_view text);

using Observation = std::variant<Entity, FactStatement, RelationEdge>;

struct UpdateStats {
  std::size_t applied = 0;
  std::size_t stale = 0;
  std::size_t inserted_entities = 0;
  std::set<std::string> touched;
};

/// Last-writer-wins per (entity, attribute) on updated_at; equal stamps
/// resolve to the larger value. Touched entities lose their index entry.
KnowledgeGraph update_graph(const KnowledgeGraph& g, const std::vector<Observation>& observations,
                            UpdateStats* stats = nullptr);

/// Observation records in graph-file syntax (E, F and R lines), in order.
std::vector<Observation> parse_observations(std::string_view text);

/// "name kind attribute-keys..."
std::string entity_embedding_text(const Entity& e);

/// Computes missing or invalidated entity vectors; existing ones are kept.
KnowledgeGraph index_entities(const KnowledgeGraph& g, const Embedder& embedder = default_embedder());

struct RetrievalResult {
  std::vector<std::pair<std::string, double>> candidates;  // non-increasing score
  std::vector<Entity> entities;                            // visited, sorted by id
  std::vector<RelationEdge> relations;                     // traversed, sorted
  std::vector<FactStatement> facts;                        // of visited entities, sorted

  bool empty() const { return candidates.empty(); }
  /// Readable triple lines used as the knowledge block of a prompt.
  std::string to_text() const;
  friend bool operator==(const RetrievalResult&, const RetrievalResult&) = default;
};

/// Cosine scores are rounded to 1e-12 before ranking so that equal scores
/// tie exactly; ties go to the smaller entity id.
double quantize_score(double score);

/// Top-K entities by cosine to the query, then a BFS of depth `hops` over
/// undirected relation edges from every candidate.
RetrievalResult retrieve(const KnowledgeGraph& g, std::string_view query, int top_k, int hops,
                         const Embedder& embedder = default_embedder());

/// Union of several retrievals; candidates re-ranked by (score desc, id).
RetrievalResult merge_results(const std::vector<RetrievalResult>& parts);

/// Generated domain knowledge: the six fault types, their indicating
/// metrics, diagnostic steps, and per-class KPI thresholds for the classes
/// present in `profiles`.
GraphInput knowledge_corpus(const std::map<std::string, DeviceProfile>& profiles);

/// Device entities plus class/protocol facts for every profile.
std::vector<Observation> device_observations(const std::map<std::string, DeviceProfile>& profiles,
                                             Timestamp at);

struct TokenEconomy {
  std::size_t triple_chars = 0;
  std::size_t prose_chars = 0;
};

std::string render_prose(const KnowledgeGraph& g);
TokenEconomy token_economy(const KnowledgeGraph& g);

}  // namespace netsem
