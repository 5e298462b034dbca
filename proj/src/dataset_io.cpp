#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "netsem/datamodel.hpp"
#include "netsem/error.hpp"
#include "netsem/format.hpp"
#include "netsem/fsutil.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace netsem {
namespace {

json parse_json_file(const fs::path& path, const std::string& label) {
  if (!fs::exists(path)) throw Error(Errc::MissingFile, label + " not found in " + path.parent_path().string());
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::SchemaViolation,
                label + " line " + std::to_string(e.byte) + " (byte offset): " + e.what());
  }
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw Error(Errc::SchemaViolation, where + ": missing field '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(Errc::SchemaViolation, where + ": field '" + key + "': " + e.what());
  }
}

DeviceProfile parse_profile(const std::string& id, const json& j) {
  const std::string where = "profiles.json device " + id;
  if (!j.is_object()) throw Error(Errc::SchemaViolation, where + ": expected object");
  DeviceProfile p;
  p.device_id = id;
  auto cls = field<std::string>(j, "device_class", where);
  auto parsed = parse_device_class(cls);
  if (!parsed) throw Error(Errc::SchemaViolation, where + ": unknown device_class '" + cls + "'");
  p.device_class = *parsed;
  p.transmit_power_dbm = field<double>(j, "transmit_power_dbm", where);
  p.bandwidth_mhz = field<double>(j, "bandwidth_mhz", where);
  p.protocol = field<std::string>(j, "protocol", where);
  p.range_m = field<double>(j, "range_m", where);
  if (j.contains("speed_mps") && !j.at("speed_mps").is_null())
    p.speed_mps = field<double>(j, "speed_mps", where);
  if (j.contains("kpi_units"))
    p.kpi_units = field<std::map<std::string, std::string>>(j, "kpi_units", where);
  if (!(p.range_m > 0) || !(p.bandwidth_mhz > 0))
    throw Error(Errc::SchemaViolation, where + ": range_m and bandwidth_mhz must be > 0");
  if (!p.speed_mps && !is_fixed(p.device_class))
    throw Error(Errc::SchemaViolation, where + ": speed_mps required for mobile device");
  return p;
}

Topology parse_topology(const json& j) {
  const std::string where = "topology.json";
  Topology t;
  auto kind = j.contains("kind") ? field<std::string>(j, "kind", where) : std::string("unknown");
  t.kind = parse_topology_kind(kind).value_or(TopologyKind::unknown);
  for (auto& n : field<std::vector<std::string>>(j, "nodes", where)) t.nodes.insert(n);
  auto edges = field<std::vector<std::vector<std::string>>>(j, "edges", where);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const auto& e = edges[i];
    const std::string at = where + " edge " + std::to_string(i);
    if (e.size() != 2) throw Error(Errc::SchemaViolation, at + ": expected [a, b]");
    if (e[0] == e[1]) throw Error(Errc::SchemaViolation, at + ": self-loop on " + e[0]);
    for (const auto& end : e)
      if (!t.nodes.count(end))
        throw Error(Errc::SchemaViolation, at + ": unknown node " + end);
    t.edges.insert(make_edge(e[0], e[1]));
  }
  if ((t.kind == TopologyKind::star && !is_star(t)) ||
      (t.kind == TopologyKind::ring && !is_ring(t)))
    throw Error(Errc::SchemaViolation, where + ": kind mismatch for '" + kind + "'");
  return t;
}

std::vector<FaultLabel> parse_labels(const json& j) {
  const std::string where = "labels.json";
  if (!j.is_array()) throw Error(Errc::SchemaViolation, where + ": expected array");
  std::vector<FaultLabel> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + " entry " + std::to_string(i);
    FaultLabel l;
    l.target = field<std::string>(j[i], "target", at);
    if (j[i].contains("peer")) l.peer = field<std::string>(j[i], "peer", at);
    auto cat = field<std::string>(j[i], "category", at);
    auto parsed = parse_category(cat);
    if (!parsed) throw Error(Errc::SchemaViolation, at + ": unknown category '" + cat + "'");
    l.category = *parsed;
    l.start_ms = field<Timestamp>(j[i], "start_ms", at);
    l.end_ms = field<Timestamp>(j[i], "end_ms", at);
    if (!(l.start_ms < l.end_ms)) throw Error(Errc::SchemaViolation, at + ": start_ms >= end_ms");
    out.push_back(std::move(l));
  }
  return out;
}

Timestamp parse_timestamp(std::string_view text, const std::string& where) {
  if (auto i = parse_int(text)) {
    if (*i < 0) throw Error(Errc::SchemaViolation, where + ": negative timestamp");
    return *i;
  }
  auto d = parse_double(text);
  if (!d || !std::isfinite(*d)) throw Error(Errc::SchemaViolation, where + ": bad timestamp '" + std::string(text) + "'");
  if (*d < 0) throw Error(Errc::SchemaViolation, where + ": negative timestamp");
  return static_cast<Timestamp>(std::trunc(*d));
}

DeviceSeries parse_series(const std::string& id, const std::string& text,
                          const DeviceProfile& profile) {
  const std::string file = "series/" + id + ".csv";
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  DeviceSeries s;
  s.device_id = id;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    auto view = trim(line);
    if (view.empty()) continue;
    auto cells = split(view, ',');
    const std::string where = file + " line " + std::to_string(line_no);
    if (!header) {
      if (trim(cells[0]) != "timestamp")
        throw Error(Errc::SchemaViolation, where + ": header must start with 'timestamp'");
      for (std::size_t i = 1; i < cells.size(); ++i) {
        std::string name(trim(cells[i]));
        if (name.empty()) throw Error(Errc::SchemaViolation, where + ": empty KPI name");
        if (s.kpi_index(name)) throw Error(Errc::SchemaViolation, where + ": duplicate KPI " + name);
        auto unit = profile.kpi_units.count(name) ? profile.kpi_units.at(name) : default_unit(name);
        s.kpi_names.push_back(name);
        s.units.push_back(unit);
      }
      header = true;
      continue;
    }
    if (cells.size() != s.kpi_names.size() + 1)
      throw Error(Errc::SchemaViolation, where + ": expected " + std::to_string(s.kpi_names.size() + 1) + " cells");
    SeriesRow row;
    row.timestamp = parse_timestamp(cells[0], where);
    for (std::size_t i = 1; i < cells.size(); ++i) {
      auto v = parse_double(cells[i]);
      if (!v || !std::isfinite(*v))
        throw Error(Errc::SchemaViolation, where + ": non-finite value '" + cells[i] + "'");
      row.values.push_back(*v);
    }
    s.rows.push_back(std::move(row));
  }
  if (!header) throw Error(Errc::SchemaViolation, file + ": missing header");
  std::stable_sort(s.rows.begin(), s.rows.end(),
                   [](const SeriesRow& a, const SeriesRow& b) { return a.timestamp < b.timestamp; });
  for (std::size_t r = 1; r < s.rows.size(); ++r) {
    if (s.rows[r].timestamp == s.rows[r - 1].timestamp)
      throw Error(Errc::NonMonotonicTimestamps,
                  "device " + id + " row " + std::to_string(r) + ": duplicate timestamp " +
                      std::to_string(s.rows[r].timestamp));
  }
  return s;
}

json profile_json(const DeviceProfile& p) {
  json j;
  j["device_class"] = std::string(to_string(p.device_class));
  j["transmit_power_dbm"] = p.transmit_power_dbm;
  j["bandwidth_mhz"] = p.bandwidth_mhz;
  j["protocol"] = p.protocol;
  j["range_m"] = p.range_m;
  if (p.speed_mps) j["speed_mps"] = *p.speed_mps;
  if (!p.kpi_units.empty()) j["kpi_units"] = p.kpi_units;
  return j;
}

std::string series_csv(const DeviceSeries& s) {
  std::string out = "timestamp";
  for (const auto& k : s.kpi_names) out += "," + k;
  out += "\n";
  for (const auto& row : s.rows) {
    out += std::to_string(row.timestamp);
    for (double v : row.values) out += "," + format_shortest(v);
    out += "\n";
  }
  return out;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::MissingFile, "dataset directory " + dir.string() + " not found");
  Dataset d;
  auto profiles = parse_json_file(dir / "profiles.json", "profiles.json");
  if (!profiles.is_object()) throw Error(Errc::SchemaViolation, "profiles.json: expected object");
  for (auto it = profiles.begin(); it != profiles.end(); ++it)
    d.profiles.emplace(it.key(), parse_profile(it.key(), it.value()));

  d.topology = parse_topology(parse_json_file(dir / "topology.json", "topology.json"));
  for (const auto& n : d.topology.nodes)
    if (!d.profiles.count(n)) throw Error(Errc::SchemaViolation, "topology.json: node " + n + " has no profile");

  if (fs::exists(dir / "labels.json")) d.labels = parse_labels(parse_json_file(dir / "labels.json", "labels.json"));

  const auto series_dir = dir / "series";
  if (fs::is_directory(series_dir)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(series_dir))
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto id = f.stem().string();
      auto prof = d.profiles.find(id);
      if (prof == d.profiles.end())
        throw Error(Errc::SchemaViolation, "series/" + id + ".csv: device has no profile");
      d.series.emplace(id, parse_series(id, read_file(f), prof->second));
    }
  }
  if (d.labels) {
    for (const auto& l : *d.labels)
      if (!d.profiles.count(l.target))
        throw Error(Errc::SchemaViolation, "labels.json: unknown target " + l.target);
  }
  return d;
}

void write_dataset(const Dataset& d, const fs::path& dir) {
  auto staged = staging_dir_for(dir);
  json profiles = json::object();
  for (const auto& [id, p] : d.profiles) {
    DeviceProfile copy = p;
    if (auto s = d.series.find(id); s != d.series.end()) {
      for (std::size_t i = 0; i < s->second.kpi_names.size() && i < s->second.units.size(); ++i) {
        const auto& k = s->second.kpi_names[i];
        if (s->second.units[i] != default_unit(k)) copy.kpi_units[k] = s->second.units[i];
      }
    }
    profiles[id] = profile_json(copy);
  }
  write_file_atomic(staged / "profiles.json", profiles.dump(2) + "\n");

  json topo;
  topo["kind"] = std::string(to_string(d.topology.kind));
  topo["nodes"] = std::vector<std::string>(d.topology.nodes.begin(), d.topology.nodes.end());
  json edges = json::array();
  for (const auto& [a, b] : d.topology.edges) edges.push_back({a, b});
  topo["edges"] = edges;
  write_file_atomic(staged / "topology.json", topo.dump(2) + "\n");

  if (d.labels) {
    json labels = json::array();
    for (const auto& l : *d.labels) {
      json j;
      j["target"] = l.target;
      if (l.peer) j["peer"] = *l.peer;
      j["category"] = std::string(display_name(l.category));
      j["start_ms"] = l.start_ms;
      j["end_ms"] = l.end_ms;
      labels.push_back(j);
    }
    write_file_atomic(staged / "labels.json", labels.dump(2) + "\n");
  }

  fs::create_directories(staged / "series");
  for (const auto& [id, s] : d.series) write_file_atomic(staged / "series" / (id + ".csv"), series_csv(s));
  commit_dir(staged, dir);
}

}  // namespace netsem
