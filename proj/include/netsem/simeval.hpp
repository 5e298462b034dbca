#pragma once

// Synthetic labeled scenarios (topology x network type x injected faults)
// and the detection/diagnosis metrics.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netsem/datamodel.hpp"

namespace netsem {

enum class NetworkType { mobile, vanet, uav, cellular };
std::string_view to_string(NetworkType t);
std::optional<NetworkType> parse_network_type(std::string_view text);

/// Device parameters of a network type (class, power, bandwidth, protocol,
/// range, speed).
DeviceProfile network_type_profile(NetworkType t, const std::string& device_id);

struct FaultInjection {
  FaultCategory category = FaultCategory::network_congestion;
  std::string target;
  TimeWindow interval;
};

/// "congestion:d1:1000-5000"
std::optional<FaultInjection> parse_fault_injection(std::string_view text);

struct ScenarioSpec {
  TopologyKind topology_kind = TopologyKind::star;
  int node_count = 9;
  NetworkType network_type = NetworkType::uav;
  Timestamp duration_ms = 10000;
  Timestamp sample_period_ms = 250;
  std::vector<FaultInjection> fault_injections;
  std::uint64_t seed = 0;
  double mesh_edge_probability = 0.4;
};

/// Throws InvalidSpec describing the first violated precondition.
void validate_spec(const ScenarioSpec& spec);

inline const std::vector<std::string>& scenario_kpis() {
  static const std::vector<std::string> k = {"delay_ms",         "packet_loss_pct",     "throughput_mbps",
                                             "error_rate_pct",   "rssi_dbm",            "packet_rate_pps",
                                             "app_throughput_mbps", "distance_m"};
  return k;
}

/// Deterministic in spec (including seed); injections are applied in order.
Dataset generate_scenario(const ScenarioSpec& spec);

/// Applies the category's KPI signature to the target's rows inside the
/// interval and appends the label. Rows outside are untouched.
Dataset inject_fault(const Dataset& d, FaultCategory category, const std::string& target, TimeWindow interval,
                     std::uint64_t seed = 0);

inline constexpr std::string_view kNormalClass = "normal";

/// Ground truth or prediction for one (device, timestamp) sample.
struct SampleLabel {
  std::string device;
  Timestamp timestamp = 0;
  bool anomalous = false;
  std::string category = std::string(kNormalClass);  // display name or "normal"/"unknown"
  friend bool operator==(const SampleLabel&, const SampleLabel&) = default;
};

/// One label per series row, ordered by (device, timestamp).
std::vector<SampleLabel> sample_truth(const Dataset& d);

struct ConfusionMatrix {
  std::size_t tp = 0, fn = 0, fp = 0, tn = 0;
  std::map<std::string, std::map<std::string, std::size_t>> per_class;  // truth -> predicted -> count

  std::size_t total() const { return tp + fn + fp + tn; }
  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;
};

/// Throws LengthMismatch when lengths or (device, timestamp) keys differ.
ConfusionMatrix compute_confusion(const std::vector<SampleLabel>& predictions,
                                  const std::vector<SampleLabel>& truth);

struct Metrics {
  std::optional<double> accuracy, recall, fnr, fpr;
  /// Share of truly anomalous samples whose predicted class matches.
  std::optional<double> diagnosis_accuracy;
};

/// Throws EmptyMatrix for a matrix with no samples.
Metrics compute_metrics(const ConfusionMatrix& cm);
Metrics compute_metrics(std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn);

struct MetricsRow {
  std::string variant;
  Metrics metrics;
};

/// "variant,accuracy,recall,fnr,fpr" header plus one line per row.
std::string format_metrics_csv(const std::vector<MetricsRow>& rows);
/// Aligned plain-text table of the same columns.
std::string format_metrics_table(const std::vector<MetricsRow>& rows);

/// Label files: "device,timestamp,anomalous,category" with a header line.
std::string write_labels_csv(const std::vector<SampleLabel>& labels);
std::vector<SampleLabel> read_labels_csv(std::string_view text);

}  // namespace netsem
