#include "doctest.h"

#include <algorithm>

#include "gen.hpp"
#include "netsem/datamodel.hpp"
#include "netsem/error.hpp"
#include "netsem/fsutil.hpp"
#include "netsem/simeval.hpp"

using namespace netsem;

namespace {

std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(NETSEM_FIXTURES) / name; }

Errc error_code(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::Usage;
}

Dataset star9() {
  ScenarioSpec spec;
  spec.duration_ms = 1000;
  return generate_scenario(spec);
}

}  // namespace

TEST_CASE("load of an empty directory is MissingFile") {
  gen::TempDir dir("empty");
  CHECK(error_code([&] { load_dataset(dir.path); }) == Errc::MissingFile);
  CHECK(error_code([&] { load_dataset(dir.path / "nope"); }) == Errc::MissingFile);
}

TEST_CASE("rows are sorted ascending on load") {
  const auto d = load_dataset(fixture("shuffled"));
  REQUIRE(d.series.size() == 1);
  const auto& s = d.series.at("d1");
  CHECK(s.kpi_names == std::vector<std::string>{"delay_ms", "throughput_mbps"});
  CHECK(s.units == std::vector<std::string>{"ms", "Mbps"});
  REQUIRE(s.rows.size() == 3);
  CHECK(s.rows[0].timestamp == 0);
  CHECK(s.rows[1].timestamp == 1000);
  CHECK(s.rows[2].timestamp == 2000);
  CHECK(s.rows[0].values == std::vector<double>{20, 80});
}

TEST_CASE("a NaN value is a SchemaViolation") {
  CHECK(error_code([&] { load_dataset(fixture("nan_row")); }) == Errc::SchemaViolation);
}

TEST_CASE("validate: generated star is clean") { CHECK(validate_dataset(star9()).empty()); }

TEST_CASE("validate: unknown edge endpoint is named") {
  auto d = star9();
  d.topology.edges.insert(make_edge("d1", "n99"));
  d.topology.kind = TopologyKind::unknown;
  const auto report = validate_dataset(d);
  REQUIRE(report.size() == 1);
  CHECK(report[0].entity == "n99");
}

TEST_CASE("validate: star flagged as ring is a kind mismatch") {
  auto d = star9();
  d.topology.kind = TopologyKind::ring;
  // Independent degree-count oracle: a ring has every degree 2.
  const auto deg = d.topology.degrees();
  const bool ring_degrees = std::all_of(deg.begin(), deg.end(), [](const auto& kv) { return kv.second == 2; });
  REQUIRE_FALSE(ring_degrees);
  const auto report = validate_dataset(d);
  REQUIRE(report.size() == 1);
  CHECK(report[0].invariant == "kind mismatch");
}

TEST_CASE("topology classification") {
  Topology ring;
  for (int i = 0; i < 5; ++i) {
    ring.nodes.insert("r" + std::to_string(i));
    ring.edges.insert(make_edge("r" + std::to_string(i), "r" + std::to_string((i + 1) % 5)));
  }
  CHECK(classify(ring) == TopologyKind::ring);
  CHECK(is_connected(ring));
  CHECK(classify(star9().topology) == TopologyKind::star);
  CHECK(make_edge("b", "a") == Edge{"a", "b"});
}

TEST_CASE("fault category names parse in every spelling") {
  for (auto c : kAllCategories) {
    CHECK(parse_category(display_name(c)) == c);
    CHECK(parse_category(token(c)) == c);
    CHECK(parse_category(fault_entity(c)) == c);
  }
  CHECK_FALSE(parse_category("meteor strike"));
}

TEST_CASE("load, write, load round-trips on random datasets") {
  gen::Rng r(11);
  for (int i = 0; i < 20; ++i) {
    const auto d = gen::dataset(r);
    REQUIRE(validate_dataset(d).empty());
    gen::TempDir dir("rt");
    write_dataset(d, dir.path / "a");
    const auto back = load_dataset(dir.path / "a");
    CHECK(back == d);
  }
}

TEST_CASE("atomic directory commit replaces the target") {
  gen::TempDir dir("commit");
  const auto target = dir.path / "out";
  auto staged = staging_dir_for(target);
  write_file_atomic(staged / "x.txt", "one");
  commit_dir(staged, target);
  staged = staging_dir_for(target);
  write_file_atomic(staged / "y.txt", "two");
  commit_dir(staged, target);
  CHECK_FALSE(std::filesystem::exists(target / "x.txt"));
  CHECK(read_file(target / "y.txt") == "two");
}
