#include <algorithm>
#include <cmath>
#include <deque>

#include "netsem/datamodel.hpp"
#include "netsem/format.hpp"

namespace netsem {

bool KpiSample::valid() const {
  return std::isfinite(value) && !unit.empty() && timestamp >= 0;
}

std::optional<std::size_t> DeviceSeries::kpi_index(std::string_view kpi) const {
  for (std::size_t i = 0; i < kpi_names.size(); ++i)
    if (kpi_names[i] == kpi) return i;
  return std::nullopt;
}

std::string_view to_string(DeviceClass c) {
  switch (c) {
    case DeviceClass::mobile_phone: return "mobile_phone";
    case DeviceClass::vehicle: return "vehicle";
    case DeviceClass::uav: return "uav";
    case DeviceClass::base_station: return "base_station";
    case DeviceClass::generic: return "generic";
  }
  return "generic";
}

std::optional<DeviceClass> parse_device_class(std::string_view text) {
  for (auto c : {DeviceClass::mobile_phone, DeviceClass::vehicle, DeviceClass::uav,
                 DeviceClass::base_station, DeviceClass::generic})
    if (to_string(c) == text) return c;
  return std::nullopt;
}

bool is_fixed(DeviceClass c) {
  return c == DeviceClass::base_station || c == DeviceClass::generic;
}

NominalKpis nominal_kpis(DeviceClass c) {
  switch (c) {
    case DeviceClass::mobile_phone: return {30, 0.5, 15, 0.2, -70, 400};
    case DeviceClass::vehicle: return {25, 0.8, 8, 0.3, -65, 300};
    case DeviceClass::uav: return {40, 1.0, 4, 0.4, -60, 250};
    case DeviceClass::base_station: return {20, 0.2, 80, 0.1, -55, 1200};
    case DeviceClass::generic: return {30, 0.5, 10, 0.2, -65, 500};
  }
  return {30, 0.5, 10, 0.2, -65, 500};
}

std::string_view to_string(TopologyKind k) {
  switch (k) {
    case TopologyKind::star: return "star";
    case TopologyKind::ring: return "ring";
    case TopologyKind::mesh: return "mesh";
    case TopologyKind::unknown: return "unknown";
  }
  return "unknown";
}

std::optional<TopologyKind> parse_topology_kind(std::string_view text) {
  for (auto k : {TopologyKind::star, TopologyKind::ring, TopologyKind::mesh,
                 TopologyKind::unknown})
    if (to_string(k) == text) return k;
  return std::nullopt;
}

Edge make_edge(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

std::map<std::string, std::size_t> Topology::degrees() const {
  std::map<std::string, std::size_t> deg;
  for (const auto& n : nodes) deg[n] = 0;
  for (const auto& [a, b] : edges) {
    if (!nodes.count(a) || !nodes.count(b) || a == b) continue;
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

std::set<std::string> Topology::neighbors(const std::string& node) const {
  std::set<std::string> out;
  for (const auto& [a, b] : edges) {
    if (a == node) out.insert(b);
    if (b == node) out.insert(a);
  }
  return out;
}

bool is_connected(const Topology& t) {
  if (t.nodes.empty()) return false;
  // union-find over node indices
  std::vector<std::string> ids(t.nodes.begin(), t.nodes.end());
  std::vector<std::size_t> parent(ids.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = i;
  auto index = [&](const std::string& id) {
    return static_cast<std::size_t>(std::lower_bound(ids.begin(), ids.end(), id) - ids.begin());
  };
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = ids.size();
  for (const auto& [a, b] : t.edges) {
    if (!t.nodes.count(a) || !t.nodes.count(b)) continue;
    auto ra = find(index(a)), rb = find(index(b));
    if (ra != rb) {
      parent[ra] = rb;
      --components;
    }
  }
  return components == 1;
}

bool is_star(const Topology& t) {
  const auto n = t.nodes.size();
  if (n < 3) return false;
  std::size_t hubs = 0;
  for (const auto& [node, d] : t.degrees()) {
    if (d == n - 1) ++hubs;
    else if (d != 1) return false;
  }
  return hubs == 1;
}

bool is_ring(const Topology& t) {
  if (t.nodes.size() < 3) return false;
  for (const auto& [node, d] : t.degrees())
    if (d != 2) return false;
  return is_connected(t);
}

TopologyKind classify(const Topology& t) {
  if (is_star(t)) return TopologyKind::star;
  if (is_ring(t)) return TopologyKind::ring;
  if (t.nodes.size() >= 3 && is_connected(t)) return TopologyKind::mesh;
  return TopologyKind::unknown;
}

std::string_view display_name(FaultCategory c) {
  switch (c) {
    case FaultCategory::application_crash: return "Application Crash";
    case FaultCategory::malicious_traffic: return "Malicious Traffic";
    case FaultCategory::network_congestion: return "Network Congestion";
    case FaultCategory::network_node_crash: return "Network Node Crash";
    case FaultCategory::out_of_range: return "Out of Communication Range";
    case FaultCategory::communication_obstacles: return "Communication Obstacles";
  }
  return "";
}

std::string_view token(FaultCategory c) {
  switch (c) {
    case FaultCategory::application_crash: return "app_crash";
    case FaultCategory::malicious_traffic: return "malicious";
    case FaultCategory::network_congestion: return "congestion";
    case FaultCategory::network_node_crash: return "node_crash";
    case FaultCategory::out_of_range: return "out_of_range";
    case FaultCategory::communication_obstacles: return "obstacles";
  }
  return "";
}

std::string_view fault_entity(FaultCategory c) {
  switch (c) {
    case FaultCategory::application_crash: return "application_crash";
    case FaultCategory::malicious_traffic: return "malicious_traffic";
    case FaultCategory::network_congestion: return "network_congestion";
    case FaultCategory::network_node_crash: return "network_node_crash";
    case FaultCategory::out_of_range: return "out_of_communication_range";
    case FaultCategory::communication_obstacles: return "communication_obstacles";
  }
  return "";
}

std::optional<FaultCategory> parse_category(std::string_view text) {
  const auto wanted = to_lower(trim(text));
  for (auto c : kAllCategories) {
    if (wanted == to_lower(display_name(c)) || wanted == token(c) || wanted == fault_entity(c))
      return c;
  }
  return std::nullopt;
}

std::vector<std::string> Dataset::device_ids() const {
  std::vector<std::string> ids;
  for (const auto& [id, p] : profiles) ids.push_back(id);
  return ids;
}

std::optional<TimeWindow> Dataset::span() const {
  std::optional<TimeWindow> out;
  for (const auto& [id, s] : series) {
    if (s.rows.empty()) continue;
    TimeWindow w{s.rows.front().timestamp, s.rows.back().timestamp + 1};
    if (!out) out = w;
    else out = TimeWindow{std::min(out->start, w.start), std::max(out->end, w.end)};
  }
  return out;
}

std::string default_unit(std::string_view kpi) {
  static const std::pair<std::string_view, std::string_view> suffixes[] = {
      {"_ms", "ms"},   {"_pct", "%"},    {"_mbps", "Mbps"}, {"_dbm", "dBm"},
      {"_pps", "pps"}, {"_mhz", "MHz"}, {"_m", "m"},
  };
  for (const auto& [suffix, unit] : suffixes) {
    if (kpi.size() > suffix.size() && kpi.substr(kpi.size() - suffix.size()) == suffix)
      return std::string(unit);
  }
  return "1";
}

ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport out;
  auto add = [&](std::string entity, std::string invariant) {
    out.push_back({std::move(entity), std::move(invariant)});
  };

  for (const auto& [id, p] : d.profiles) {
    if (p.device_id != id) add(id, "profile id mismatch");
    if (!(p.range_m > 0)) add(id, "range_m > 0");
    if (!(p.bandwidth_mhz > 0)) add(id, "bandwidth_mhz > 0");
    if (!p.speed_mps && !is_fixed(p.device_class)) add(id, "speed required for mobile device");
  }

  const auto& topo = d.topology;
  for (const auto& [a, b] : topo.edges) {
    if (a == b) add(a, "no self-loops");
    for (const auto* end : {&a, &b})
      if (!topo.nodes.count(*end)) add(*end, "edge endpoint in nodes");
  }
  if ((topo.kind == TopologyKind::star && !is_star(topo)) ||
      (topo.kind == TopologyKind::ring && !is_ring(topo)))
    add("topology", "kind mismatch");
  for (const auto& n : topo.nodes)
    if (!d.profiles.count(n)) add(n, "topology node has profile");

  for (const auto& [id, s] : d.series) {
    if (!d.profiles.count(id)) add(id, "series device has profile");
    if (s.device_id != id) add(id, "series id mismatch");
    std::set<std::string> names(s.kpi_names.begin(), s.kpi_names.end());
    if (names.size() != s.kpi_names.size()) add(id, "kpi names unique");
    if (s.units.size() != s.kpi_names.size()) add(id, "unit per kpi");
    for (const auto& u : s.units)
      if (u.empty()) add(id, "unit non-empty");
    for (std::size_t r = 0; r < s.rows.size(); ++r) {
      const auto& row = s.rows[r];
      if (row.timestamp < 0) add(id, "timestamp >= 0");
      if (r > 0 && row.timestamp <= s.rows[r - 1].timestamp)
        add(id, "timestamps strictly increasing");
      if (row.values.size() != s.kpi_names.size()) add(id, "row width");
      for (double v : row.values)
        if (!std::isfinite(v)) add(id, "value finite");
    }
  }

  if (d.labels) {
    for (const auto& l : *d.labels) {
      if (!(l.start_ms < l.end_ms)) add(l.target, "label start < end");
      if (!d.profiles.count(l.target)) add(l.target, "label target exists");
      if (l.peer && !d.profiles.count(*l.peer)) add(*l.peer, "label target exists");
    }
  }
  return out;
}

}  // namespace netsem
