#include "doctest.h"

#include <algorithm>
#include <deque>

#include "gen.hpp"
#include "oracles.hpp"
#include "netsem/error.hpp"
#include "netsem/fsutil.hpp"
#include "netsem/nkg.hpp"
#include "netsem/provider.hpp"
#include "netsem/simeval.hpp"

using namespace netsem;

namespace {

std::vector<Triple> random_triples(gen::Rng& r, int n) {
  std::vector<Triple> out;
  for (int i = 0; i < n; ++i) {
    const bool literal = r.coin(0.3);
    out.push_back({"e" + std::to_string(r.integer(0, 60)), r.pick(gen::words()),
                   literal ? std::to_string(r.integer(0, 999)) : "e" + std::to_string(r.integer(0, 60)), literal});
  }
  return out;
}

std::map<std::string, DeviceProfile> devices(int n) {
  std::map<std::string, DeviceProfile> out;
  const NetworkType types[] = {NetworkType::mobile, NetworkType::vanet, NetworkType::uav, NetworkType::cellular};
  for (int i = 0; i < n; ++i) {
    const std::string id = "d" + std::to_string(i);
    out[id] = network_type_profile(types[i % 4], id);
  }
  return out;
}

}  // namespace

TEST_CASE("build_graph") {
  CHECK(build_graph({}).empty());
  GraphInput in;
  in.triples = {{"uav", "has_metric", "delay_ms", false}, {"delay_ms", "threshold", "within[0,100]", true}};
  const auto g = build_graph(in);
  CHECK(g.entities().size() == 2);
  CHECK(g.relations().size() == 1);
  CHECK(g.fact_count() == 1);
  CHECK(g.referentially_intact());
  CHECK(g.fact("delay_ms", "threshold")->value == "within[0,100]");
}

TEST_CASE("build_graph is permutation invariant") {
  gen::Rng r(3);
  GraphInput in;
  in.triples = random_triples(r, 500);
  const auto reference = build_graph(in).serialize();
  for (int i = 0; i < 2; ++i) {
    std::shuffle(in.triples.begin(), in.triples.end(), r.engine());
    CHECK(build_graph(in).serialize() == reference);
  }
}

TEST_CASE("triple lines") {
  const auto t = parse_triple_line("(a, rel, \"x y\")");
  REQUIRE(t);
  CHECK(t->literal);
  CHECK(t->object == "x y");
  CHECK(format_triple(*t) == "(a, rel, \"x y\")");
  CHECK_FALSE(parse_triple_line("a rel b"));
}

TEST_CASE("extract_triples") {
  MockProvider mock;
  CHECK(extract_triples("", mock).triples.empty());

  const auto prose = read_file(std::filesystem::path(NETSEM_FIXTURES) / "prose.txt");
  const auto golden = parse_triples_text(read_file(std::filesystem::path(NETSEM_FIXTURES) / "prose.triples"));
  const auto got = extract_triples(prose, mock);
  CHECK(got.errors.empty());
  CHECK(got.triples == golden.triples);

  ScriptedProvider scripted({"(a, r, b)\n(b, r, c)\nnot a triple\n(c, r, d)\n(d, r, \"5\")\n"});
  const auto partial = extract_triples("anything", scripted);
  CHECK(partial.triples.size() == 4);
  REQUIRE(partial.errors.size() == 1);
  CHECK(partial.errors[0].line == 3);
}

TEST_CASE("update_graph") {
  KnowledgeGraph g;
  g.put_fact({"uav", "delay_ms.max", "100 ms", 50});
  UpdateStats st;
  const auto same = update_graph(g, {FactStatement{"uav", "delay_ms.max", "90 ms", 10}}, &st);
  CHECK(same == g);
  CHECK(st.stale == 1);
  CHECK(st.applied == 0);

  const auto grown = update_graph(g, {Entity{"d9", "d9", EntityKind::device, {}, 60}}, &st);
  REQUIRE(grown.entity("d9"));
  CHECK(grown.entity("d9")->kind == EntityKind::device);
  CHECK(st.inserted_entities == 1);
  const auto hit = retrieve(grown, "d9 device", 1, 0);
  CHECK(hit.candidates.at(0).first == "d9");
}

TEST_CASE("update order does not matter") {
  gen::Rng r(17);
  for (int trial = 0; trial < 20; ++trial) {
    const auto base = gen::graph(r, 10, 10);
    std::vector<Observation> obs;
    for (int i = 0; i < 30; ++i) {
      const auto ts = 1000 + trial * 100 + i;  // distinct
      const std::string id = "e" + std::to_string(r.integer(0, 12));
      switch (r.integer(0, 2)) {
        case 0: obs.push_back(Entity{id, gen::phrase(r, 1, 2), EntityKind::device, {}, ts}); break;
        case 1: obs.push_back(FactStatement{id, r.pick(gen::words()), gen::phrase(r, 1, 2), ts}); break;
        default: obs.push_back(RelationEdge{id, "links", "e" + std::to_string(r.integer(0, 12))});
      }
    }
    auto shuffled = obs;
    std::shuffle(shuffled.begin(), shuffled.end(), r.engine());
    CHECK(update_graph(base, obs).serialize() == update_graph(base, shuffled).serialize());
  }
}

TEST_CASE("observation records") {
  const auto obs = parse_observations("E\td1\td1\tdevice\t5\nF\td1\trole\thub\t6\nR\td1\tconnected_to\td2\n");
  REQUIRE(obs.size() == 3);
  CHECK(std::holds_alternative<Entity>(obs[0]));
  CHECK(std::get<FactStatement>(obs[1]).value == "hub");
  CHECK(std::get<RelationEdge>(obs[2]).object == "d2");
  CHECK_THROWS_AS(parse_observations("X\t1\n"), Error);
}

TEST_CASE("index_entities") {
  CHECK(index_entities(KnowledgeGraph{}).index()->empty());
  gen::Rng r(5);
  const auto g = index_entities(gen::graph(r, 20, 30));
  CHECK(index_entities(g).index()->size() == g.entities().size());
  for (const auto& [id, v] : *g.index()) CHECK(index_entities(g).index()->at(id) == v);

  const std::string target = g.entities().begin()->first;
  const auto updated = index_entities(update_graph(g, {FactStatement{target, "fresh_attribute", "x", 1000}}));
  for (const auto& [id, v] : *g.index()) {
    if (id == target) CHECK_FALSE(updated.index()->at(id) == v);
    else CHECK(updated.index()->at(id) == v);
  }
}

TEST_CASE("retrieve edge cases") {
  gen::Rng r(6);
  const auto g = index_entities(gen::graph(r, 12, 20));
  const auto zero = retrieve(g, "delay uav", 2, 0);
  CHECK(zero.candidates.size() == 2);
  CHECK(zero.entities.size() == 2);
  CHECK(zero.relations.empty());
  for (const auto& f : zero.facts)
    CHECK((f.entity == zero.candidates[0].first || f.entity == zero.candidates[1].first));

  const auto all = retrieve(g, "delay uav", 1000, 1);
  CHECK(all.candidates.size() == g.entities().size());
  CHECK(retrieve(g, "delay uav", 3, 2) == retrieve(g, "delay uav", 3, 2));
  CHECK_THROWS_AS(retrieve(KnowledgeGraph{}, "x", 1, 1), Error);
}

TEST_CASE("retrieve equals the brute-force oracle") {
  gen::Rng r(40);
  for (int trial = 0; trial < 50; ++trial) {
    auto g = gen::graph(r, 40, 80);
    if (r.coin()) g = index_entities(g);
    const auto query = gen::phrase(r, 1, 4);
    const int k = r.integer(1, 8);
    const int hops = r.integer(0, 3);
    CHECK(retrieve(g, query, k, hops) == oracle::brute_retrieve(g, query, k, hops));
  }
}

TEST_CASE("graph file round-trip") {
  gen::Rng r(9);
  for (int i = 0; i < 20; ++i) {
    auto g = gen::graph(r, 30, 40);
    g.put_fact({"e0", "note", "tab\there\nnewline \\ slash", 3});
    const auto text = g.serialize();
    const auto back = KnowledgeGraph::parse(text);
    CHECK(back == g);
    CHECK(back.serialize() == text);
  }
}

TEST_CASE("knowledge corpus") {
  const auto g = build_graph(knowledge_corpus(devices(4)));
  for (auto c : kAllCategories) {
    REQUIRE(g.entity(fault_entity(c)));
    CHECK(g.entity(fault_entity(c))->kind == EntityKind::fault_type);
  }
  CHECK(g.fact("uav", "threshold:delay_ms"));
  CHECK(g.referentially_intact());
}

TEST_CASE("triple form is no longer than prose") {
  auto g = build_graph(knowledge_corpus(devices(16)));
  g = update_graph(g, device_observations(devices(16), 0));
  const auto te = token_economy(g);
  CHECK(te.triple_chars > 0);
  CHECK(te.triple_chars <= te.prose_chars);
  CHECK(render_prose(g).size() == te.prose_chars);
}
