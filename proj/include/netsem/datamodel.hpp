#pragma once

// Multimodal network data: device profiles, topology, per-device KPI
// series and fault labels, plus the on-disk dataset directory format.

#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace netsem {

using Timestamp = std::int64_t;  // milliseconds since epoch

/// Half-open time interval [start, end).
struct TimeWindow {
  Timestamp start = 0;
  Timestamp end = 0;

  bool contains(Timestamp t) const { return t >= start && t < end; }
  bool empty() const { return end <= start; }
  friend auto operator<=>(const TimeWindow&, const TimeWindow&) = default;
};

struct KpiSample {
  Timestamp timestamp = 0;
  std::string device_id;
  std::string kpi_name;
  double value = 0;
  std::string unit;

  bool valid() const;
};

struct SeriesRow {
  Timestamp timestamp = 0;
  std::vector<double> values;
  friend bool operator==(const SeriesRow&, const SeriesRow&) = default;
};

struct DeviceSeries {
  std::string device_id;
  std::vector<std::string> kpi_names;
  std::vector<std::string> units;  // parallel to kpi_names
  std::vector<SeriesRow> rows;     // strictly increasing timestamps

  std::optional<std::size_t> kpi_index(std::string_view kpi) const;
  friend bool operator==(const DeviceSeries&, const DeviceSeries&) = default;
};

enum class DeviceClass { mobile_phone, vehicle, uav, base_station, generic };

std::string_view to_string(DeviceClass c);
std::optional<DeviceClass> parse_device_class(std::string_view text);
/// Fixed infrastructure that may legitimately omit a speed.
bool is_fixed(DeviceClass c);

struct DeviceProfile {
  std::string device_id;
  DeviceClass device_class = DeviceClass::generic;
  double transmit_power_dbm = 0;
  double bandwidth_mhz = 0;
  std::string protocol;
  double range_m = 0;
  std::optional<double> speed_mps;
  std::map<std::string, std::string> kpi_units;
  friend bool operator==(const DeviceProfile&, const DeviceProfile&) = default;
};

enum class TopologyKind { star, ring, mesh, unknown };

std::string_view to_string(TopologyKind k);
std::optional<TopologyKind> parse_topology_kind(std::string_view text);

using Edge = std::pair<std::string, std::string>;

/// Orders the endpoints so that first < second.
Edge make_edge(std::string a, std::string b);

/// Engineering nominal KPI levels per device class. These seed the
/// synthetic baselines and the generated class thresholds.
struct NominalKpis {
  double delay_ms;
  double packet_loss_pct;
  double throughput_mbps;
  double error_rate_pct;
  double rssi_dbm;
  double packet_rate_pps;
};

NominalKpis nominal_kpis(DeviceClass c);

struct Topology {
  std::set<std::string> nodes;
  std::set<Edge> edges;  // normalized, first < second
  TopologyKind kind = TopologyKind::unknown;

  std::map<std::string, std::size_t> degrees() const;
  std::set<std::string> neighbors(const std::string& node) const;
  friend bool operator==(const Topology&, const Topology&) = default;
};

bool is_star(const Topology& t);
bool is_ring(const Topology& t);
bool is_connected(const Topology& t);
/// Shape implied by the edge structure alone: star, ring, mesh for other
/// connected graphs, unknown for disconnected or trivial ones.
TopologyKind classify(const Topology& t);

enum class FaultCategory {
  application_crash,
  malicious_traffic,
  network_congestion,
  network_node_crash,
  out_of_range,
  communication_obstacles,
};

inline constexpr FaultCategory kAllCategories[] = {
    FaultCategory::application_crash,  FaultCategory::malicious_traffic,
    FaultCategory::network_congestion, FaultCategory::network_node_crash,
    FaultCategory::out_of_range,       FaultCategory::communication_obstacles,
};

/// Display name, e.g. "Network Congestion".
std::string_view display_name(FaultCategory c);
/// Short CLI token, e.g. "congestion".
std::string_view token(FaultCategory c);
/// KG fault_type entity id, e.g. "network_congestion".
std::string_view fault_entity(FaultCategory c);
/// Accepts display names, tokens and entity ids, case-insensitively.
std::optional<FaultCategory> parse_category(std::string_view text);

struct FaultLabel {
  std::string target;               // device id, or first endpoint of an edge
  std::optional<std::string> peer;  // second endpoint when the target is an edge
  FaultCategory category = FaultCategory::application_crash;
  Timestamp start_ms = 0;
  Timestamp end_ms = 0;

  TimeWindow window() const { return {start_ms, end_ms}; }
  friend bool operator==(const FaultLabel&, const FaultLabel&) = default;
};

struct Dataset {
  std::map<std::string, DeviceProfile> profiles;
  Topology topology;
  std::map<std::string, DeviceSeries> series;
  std::optional<std::vector<FaultLabel>> labels;

  /// Devices in dataset order (sorted ids).
  std::vector<std::string> device_ids() const;
  /// Smallest window covering every row of every series.
  std::optional<TimeWindow> span() const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

struct Violation {
  std::string entity;
  std::string invariant;
  friend bool operator==(const Violation&, const Violation&) = default;
};

using ValidationReport = std::vector<Violation>;

ValidationReport validate_dataset(const Dataset& d);

/// Unit implied by a KPI name suffix ("delay_ms" -> "ms"), "1" otherwise.
std::string default_unit(std::string_view kpi_name);

/// Reads the directory layout: profiles.json, topology.json, optional
/// labels.json and series/<device_id>.csv. Rows are sorted by timestamp.
Dataset load_dataset(const std::filesystem::path& dir);

/// Writes the same layout. The target directory is replaced atomically.
void write_dataset(const Dataset& d, const std::filesystem::path& dir);

}  // namespace netsem
