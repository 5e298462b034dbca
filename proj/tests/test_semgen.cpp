#include "doctest.h"

#include <cmath>

#include "gen.hpp"
#include "oracles.hpp"
#include "netsem/error.hpp"
#include "netsem/provider.hpp"
#include "netsem/semgen.hpp"

using namespace netsem;

namespace {

Dataset tiny(int devices, int kpis, int stamps) {
  Dataset d;
  for (int i = 1; i <= devices; ++i) {
    const std::string id = "d" + std::to_string(i);
    DeviceProfile p;
    p.device_id = id;
    p.device_class = DeviceClass::base_station;
    p.bandwidth_mhz = 100;
    p.range_m = 500;
    d.profiles[id] = p;
    d.topology.nodes.insert(id);
    DeviceSeries s;
    s.device_id = id;
    for (int k = 0; k < kpis; ++k) {
      s.kpi_names.push_back(k == 0 ? "delay" : "kpi" + std::to_string(k));
      s.units.push_back("ms");
    }
    for (int t = 0; t < stamps; ++t) s.rows.push_back({1000 + t * 1000, std::vector<double>(kpis, 5.0)});
    d.series[id] = s;
  }
  return d;
}

std::vector<double> components(const UnitVector& u) {
  return {u.components().data(), u.components().data() + u.dims()};
}

}  // namespace

TEST_CASE("render_table line grammar") {
  Dataset d = tiny(1, 1, 1);
  const auto text = render_table(d).to_text();
  CHECK(text == "d1 @ 1000: delay=5 ms\n");
  CHECK(text.find("d1") != std::string::npos);
  CHECK(text.find("1000") != std::string::npos);
  CHECK(text.find("delay=5 ms") != std::string::npos);
}

TEST_CASE("render_table counts and order") {
  const auto table = render_table(tiny(2, 2, 2));
  CHECK(table.line_count() == 4);
  const auto text = table.to_text();
  CHECK(text.find("d1 @") < text.find("d2 @"));
  CHECK(parse_table_text(text) == table);
}

TEST_CASE("render_table of an empty window") {
  CHECK_THROWS_AS(render_table(tiny(1, 1, 1), TimeWindow{0, 10}), Error);
}

TEST_CASE("zero_shot prompt holds only the task and the input") {
  const auto p = build_semantic_prompt(PromptVariant::zero_shot, "X", {}, "");
  CHECK(p.populated_slots() == 2);
  CHECK(p.content.input == "X");
  CHECK_FALSE(p.instructions.task_description.empty());
  const auto r = p.render();
  CHECK(r.find("<role>") == std::string::npos);
  CHECK(r.find("CONSTRAINT") == std::string::npos);
}

TEST_CASE("self_heuristic prompt") {
  const std::vector<std::string> snippets = {"(uav, delay_ms.max, \"100 ms\")", "(uav, uses_protocol, 802.11AC)"};
  const auto p = build_semantic_prompt(PromptVariant::self_heuristic, "d1 @ 0: delay_ms=1 ms", snippets, "9 uav");
  CHECK(p.populated_slots() == 8);  // every semantic slot; demonstrations are symbolic-only
  const auto r = p.render();
  const auto constraint = r.find("CONSTRAINT");
  REQUIRE(constraint != std::string::npos);
  for (const auto& s : snippets) CHECK(r.find(s, constraint) != std::string::npos);
  CHECK(r.find("INSTRUCTIONS") < r.find("CONTENT"));
  CHECK(r.find("CONTENT") < constraint);

  try {
    build_semantic_prompt(PromptVariant::self_heuristic, "x", {}, "ctx");
    FAIL("expected MissingContext");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MissingContext);
  }
}

TEST_CASE("symbolic prompt layouts") {
  const auto one = build_symbolic_prompt({{"in0", "out0"}}, "INPUT").render();
  const auto task = one.find("<task description>");
  const auto demo = one.find("<demonstration example>");
  const auto input = one.find("<input>");
  CHECK(task < demo);
  CHECK(demo < input);

  const auto three = build_symbolic_prompt({{"A1", "B1"}, {"A2", "B2"}, {"A3", "B3"}}, "LAST").render();
  const auto a1 = three.find("A1"), a2 = three.find("A2"), a3 = three.find("A3");
  CHECK(a1 < a2);
  CHECK(a2 < a3);
  CHECK(a3 < three.find("LAST"));

  try {
    build_symbolic_prompt({}, "x");
    FAIL("expected NoDemonstrations");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoDemonstrations);
  }
}

TEST_CASE("semantic sampling with the mock") {
  MockProvider mock;
  const auto p = build_semantic_prompt(PromptVariant::general_info, render_table(tiny(2, 2, 3)).to_text(), {}, "");
  const auto a = sample_semantics(p, mock, 1, 7);
  REQUIRE(a.size() == 1);
  CHECK(a == sample_semantics(p, mock, 1, 7));
  const auto five = sample_semantics(p, mock, 5, 3);
  CHECK(five.size() == 5);
  CHECK(five == sample_semantics(p, mock, 5, 3));
  for (int i = 0; i < 5; ++i) CHECK(five[static_cast<std::size_t>(i)].sample_index == i);
}

TEST_CASE("unreachable remote fails at sample 0") {
  RemoteConfig c;
  c.endpoint = "http://127.0.0.1:9/v1/chat/completions";
  c.model = "m";
  c.timeout_ms = 500;
  c.network_retries = 0;
  c.backoff_ms = 1;
  RemoteProvider remote(c);
  const auto p = build_semantic_prompt(PromptVariant::zero_shot, "x", {}, "");
  try {
    sample_semantics(p, remote, 5, 0);
    FAIL("expected ProviderError");
  } catch (const ProviderError& e) {
    CHECK(e.sample_index() == 0);
  }
}

TEST_CASE("remote wire format") {
  RemoteConfig c;
  c.model = "m1";
  const auto body = RemoteProvider::request_body(c, "hi", 0.5, 3);
  CHECK(body.find("\"model\":\"m1\"") != std::string::npos);
  CHECK(body.find("\"content\":\"hi\"") != std::string::npos);
  CHECK(RemoteProvider::parse_response(R"({"choices":[{"message":{"content":"ok"}}]})") == "ok");
  CHECK_THROWS_AS(RemoteProvider::parse_response("{}"), ProviderError);
}

TEST_CASE("similarity matrix") {
  SUBCASE("identical vectors") {
    gen::Rng r(1);
    const auto u = gen::unit_vector(r, 8);
    const std::vector<UnitVector> vs(4, u);
    const auto s = similarity_matrix(vs);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) CHECK(std::abs(s(i, j) - 1) <= 1e-9);
  }
  SUBCASE("orthogonal") {
    Eigen::VectorXd a(2), b(2);
    a << 1, 0;
    b << 0, 1;
    const std::vector<UnitVector> vs = {UnitVector::normalized(a), UnitVector::normalized(b)};
    const auto s = similarity_matrix(vs);
    CHECK(s(0, 0) == 1);
    CHECK(s(0, 1) == 0);
    CHECK(s(1, 0) == 0);
    CHECK(s(1, 1) == 1);
  }
  SUBCASE("brute-force dot products") {
    gen::Rng r(2);
    std::vector<UnitVector> vs;
    for (int i = 0; i < 6; ++i) vs.push_back(gen::unit_vector(r, 12));
    const auto s = similarity_matrix(vs);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) {
        const auto a = components(vs[static_cast<std::size_t>(i)]);
        const auto b = components(vs[static_cast<std::size_t>(j)]);
        double dot = 0;
        for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
        CHECK(std::abs(s(i, j) - dot) <= 1e-12);
      }
  }
}

TEST_CASE("mean centrality") {
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(3, 3);
  CHECK(mean_centrality(ones) == Eigen::Vector3d(1, 1, 1));

  Eigen::VectorXd x(2), y(2);
  x << 1, 0;
  y << 0, 1;
  const std::vector<UnitVector> vs = {UnitVector::normalized(x), UnitVector::normalized(x), UnitVector::normalized(y)};
  const auto mu = mean_centrality(similarity_matrix(vs));
  CHECK(mu[0] == doctest::Approx(0.5));
  CHECK(mu[1] == doctest::Approx(0.5));
  CHECK(mu[2] == doctest::Approx(0));
  CHECK(select_most_central(std::span<const UnitVector>(vs)) == 0);

  Eigen::MatrixXd single = Eigen::MatrixXd::Ones(1, 1);
  CHECK_THROWS_AS(mean_centrality(single), Error);
}

TEST_CASE("select_best") {
  const std::vector<SemanticText> one = {{"only", "p", 0}};
  CHECK(select_best(one).first == 0);

  gen::Rng r(5);
  std::vector<SemanticText> texts;
  for (int i = 0; i < 8; ++i) texts.push_back({gen::phrase(r, 3, 10), "p", i});
  std::vector<std::vector<double>> raw;
  const HashingEmbedder e;
  for (const auto& t : texts) raw.push_back(components(e.embed(t.text)));
  CHECK(select_best(texts).first == oracle::brute_select(raw));
}

TEST_CASE("selector matches the brute-force oracle on random vectors") {
  gen::Rng r(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = r.integer(2, 10);
    const int d = r.integer(4, 32);
    std::vector<UnitVector> vs;
    std::vector<std::vector<double>> raw;
    for (int i = 0; i < n; ++i) {
      vs.push_back(gen::unit_vector(r, d));
      raw.push_back(components(vs.back()));
    }
    if (r.coin(0.2)) {  // force a tie
      vs[1] = vs[0];
      raw[1] = raw[0];
    }
    CHECK(select_most_central(std::span<const UnitVector>(vs)) == oracle::brute_select(raw));
  }
}

TEST_CASE("hashing embedder") {
  CHECK(HashingEmbedder::tokenize("Delay_ms rose, to 250!") ==
        std::vector<std::string>{"delay", "ms", "rose", "to", "250"});
  const HashingEmbedder e;
  CHECK(e.embed("delay high") == e.embed("DELAY   high"));
  CHECK(std::abs(e.embed("delay high").components().norm() - 1) <= 1e-12);
  CHECK(e.embed("delay high queue").dot(e.embed("delay high")) > e.embed("delay high").dot(e.embed("rssi weak")));
  CHECK_THROWS_AS(e.embed(""), Error);
  CHECK(e.embed("abc") == e.embed("abc"));
  CHECK(e.embed("packet loss high").dot(e.embed("packet loss high again")) >
        e.embed("packet loss high").dot(e.embed("zzzz qqqq")));
}
