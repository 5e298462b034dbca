#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "netsem/error.hpp"
#include "netsem/format.hpp"
#include "netsem/simeval.hpp"

namespace netsem {

namespace {

// Portable draws: std distributions are implementation-defined, and the
// scenarios have to be reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double normal() {
    const double u1 = (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::mt19937_64 gen_;
};

double round3(double v) {
  double r = std::round(v * 1000.0) / 1000.0;
  return r == 0.0 ? 0.0 : r;  // no negative zero
}

std::string device_id(int i) { return "d" + std::to_string(i); }

}  // namespace

std::string_view to_string(NetworkType t) {
  switch (t) {
    case NetworkType::mobile: return "mobile";
    case NetworkType::vanet: return "vanet";
    case NetworkType::uav: return "uav";
    case NetworkType::cellular: return "cellular";
  }
  return "mobile";
}

std::optional<NetworkType> parse_network_type(std::string_view text) {
  for (auto t : {NetworkType::mobile, NetworkType::vanet, NetworkType::uav, NetworkType::cellular})
    if (to_string(t) == text) return t;
  return std::nullopt;
}

DeviceProfile network_type_profile(NetworkType t, const std::string& id) {
  DeviceProfile p;
  p.device_id = id;
  switch (t) {
    case NetworkType::mobile:
      p.device_class = DeviceClass::mobile_phone;
      p.transmit_power_dbm = 23, p.bandwidth_mhz = 20, p.protocol = "LTE", p.range_m = 200, p.speed_mps = 10;
      break;
    case NetworkType::vanet:
      p.device_class = DeviceClass::vehicle;
      p.transmit_power_dbm = 30, p.bandwidth_mhz = 10, p.protocol = "802.11p", p.range_m = 200, p.speed_mps = 20;
      break;
    case NetworkType::uav:
      p.device_class = DeviceClass::uav;
      p.transmit_power_dbm = 20, p.bandwidth_mhz = 5, p.protocol = "802.11AC", p.range_m = 400, p.speed_mps = 15;
      break;
    case NetworkType::cellular:
      p.device_class = DeviceClass::base_station;
      p.transmit_power_dbm = 43, p.bandwidth_mhz = 100, p.protocol = "LTE", p.range_m = 500;
      break;
  }
  return p;
}

std::optional<FaultInjection> parse_fault_injection(std::string_view text) {
  auto parts = split(text, ':');
  if (parts.size() != 3) return std::nullopt;
  auto category = parse_category(parts[0]);
  auto range = split(parts[2], '-');
  if (!category || parts[1].empty() || range.size() != 2) return std::nullopt;
  auto start = parse_int(range[0]);
  auto end = parse_int(range[1]);
  if (!start || !end) return std::nullopt;
  return FaultInjection{*category, parts[1], {*start, *end}};
}

void validate_spec(const ScenarioSpec& spec) {
  auto fail = [](const std::string& m) { throw Error(Errc::InvalidSpec, m); };
  if (spec.topology_kind == TopologyKind::unknown) fail("topology must be star, ring or mesh");
  if (spec.node_count < 3) fail("node_count must be >= 3");
  if (spec.sample_period_ms <= 0) fail("sample_period_ms must be > 0");
  if (spec.duration_ms < spec.sample_period_ms) fail("duration_ms must cover at least one sample");
  if (!(spec.mesh_edge_probability > 0 && spec.mesh_edge_probability <= 1))
    fail("mesh edge probability must be in (0, 1]");
  for (const auto& f : spec.fault_injections) {
    if (!(f.interval.start < f.interval.end)) fail("fault interval for " + f.target + " must have start < end");
    if (f.interval.start < 0 || f.interval.end > spec.duration_ms)
      fail("fault interval for " + f.target + " must lie within the duration");
  }
}

Dataset generate_scenario(const ScenarioSpec& spec) {
  validate_spec(spec);
  Rng rng(spec.seed);
  const int n = spec.node_count;
  Dataset d;

  auto& topo = d.topology;
  topo.kind = spec.topology_kind;
  for (int i = 0; i < n; ++i) topo.nodes.insert(device_id(i));
  switch (spec.topology_kind) {
    case TopologyKind::star:
      for (int i = 1; i < n; ++i) topo.edges.insert(make_edge(device_id(0), device_id(i)));
      break;
    case TopologyKind::ring:
      for (int i = 0; i < n; ++i) topo.edges.insert(make_edge(device_id(i), device_id((i + 1) % n)));
      break;
    case TopologyKind::mesh:
      do {
        topo.edges.clear();
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < spec.mesh_edge_probability) topo.edges.insert(make_edge(device_id(i), device_id(j)));
      } while (!is_connected(topo));
      break;
    case TopologyKind::unknown: break;
  }

  const auto& kpis = scenario_kpis();
  for (int i = 0; i < n; ++i) {
    const auto id = device_id(i);
    auto profile = network_type_profile(spec.network_type, id);
    const auto nominal = nominal_kpis(profile.device_class);
    const double distance = profile.range_m * (0.3 + 0.4 * rng.uniform());
    const double base[] = {nominal.delay_ms,        nominal.packet_loss_pct, nominal.throughput_mbps,
                           nominal.error_rate_pct,  nominal.rssi_dbm,        nominal.packet_rate_pps,
                           0.8 * nominal.throughput_mbps, distance};

    DeviceSeries s;
    s.device_id = id;
    s.kpi_names = kpis;
    for (const auto& k : kpis) s.units.push_back(default_unit(k));
    for (Timestamp t = 0; t < spec.duration_ms; t += spec.sample_period_ms) {
      SeriesRow row{t, {}};
      for (std::size_t k = 0; k < kpis.size(); ++k) {
        const double z = std::clamp(rng.normal(), -3.0, 3.0);
        row.values.push_back(round3(base[k] * (1.0 + 0.05 * z)));
      }
      s.rows.push_back(std::move(row));
    }
    d.profiles.emplace(id, std::move(profile));
    d.series.emplace(id, std::move(s));
  }
  d.labels = std::vector<FaultLabel>{};

  for (std::size_t i = 0; i < spec.fault_injections.size(); ++i) {
    const auto& f = spec.fault_injections[i];
    d = inject_fault(d, f.category, f.target, f.interval, spec.seed + i);
  }
  return d;
}

Dataset inject_fault(const Dataset& d, FaultCategory category, const std::string& target, TimeWindow interval,
                     std::uint64_t) {
  if (!d.profiles.count(target) || !d.series.count(target))
    throw Error(Errc::UnknownTarget, "no device '" + target + "' in the dataset");
  if (!(interval.start < interval.end))
    throw Error(Errc::InvalidSpec, "fault interval must have start < end");
  const auto span = d.span();
  if (!span || interval.start < span->start || interval.start >= span->end)
    throw Error(Errc::InvalidSpec, "fault interval starts outside the dataset");

  Dataset out = d;
  auto& s = out.series.at(target);
  const auto& profile = out.profiles.at(target);
  auto at = [&](SeriesRow& row, std::string_view kpi) -> double* {
    auto k = s.kpi_index(kpi);
    return k ? &row.values[*k] : nullptr;
  };

  std::size_t i = 0;
  for (auto& row : s.rows) {
    if (!interval.contains(row.timestamp)) continue;
    switch (category) {
      case FaultCategory::network_congestion:
        if (auto* v = at(row, "delay_ms")) *v = std::max(5.0 * *v, 150.0);
        if (auto* v = at(row, "packet_loss_pct")) *v = std::max(3.0 * *v, 7.5);
        break;
      case FaultCategory::network_node_crash:
        for (auto& v : row.values) v = 0.0;
        break;
      case FaultCategory::malicious_traffic:
        if (auto* v = at(row, "packet_rate_pps")) *v *= 10.0;
        if (auto* v = at(row, "error_rate_pct")) *v = 5.0;
        break;
      case FaultCategory::out_of_range:
        if (auto* v = at(row, "rssi_dbm")) *v = -95.0;
        if (auto* v = at(row, "distance_m")) *v = 1.5 * profile.range_m;
        break;
      case FaultCategory::communication_obstacles:
        if (i % 2 == 0) {
          if (auto* v = at(row, "rssi_dbm")) *v = std::min(*v, -88.0);
          if (auto* v = at(row, "packet_loss_pct")) *v = std::max(*v, 4.0);
        }
        break;
      case FaultCategory::application_crash:
        if (auto* v = at(row, "app_throughput_mbps")) *v = 0.0;
        break;
    }
    for (auto& v : row.values) v = round3(v);
    ++i;
  }
  if (!out.labels) out.labels = std::vector<FaultLabel>{};
  out.labels->push_back({target, std::nullopt, category, interval.start, interval.end});
  return out;
}

std::vector<SampleLabel> sample_truth(const Dataset& d) {
  std::vector<SampleLabel> out;
  for (const auto& [id, s] : d.series) {
    for (const auto& row : s.rows) {
      SampleLabel l{id, row.timestamp, false, std::string(kNormalClass)};
      if (d.labels)
        for (const auto& lab : *d.labels)
          if (lab.target == id && lab.window().contains(row.timestamp)) {
            l.anomalous = true;
            l.category = std::string(display_name(lab.category));
            break;
          }
      out.push_back(std::move(l));
    }
  }
  return out;
}

ConfusionMatrix compute_confusion(const std::vector<SampleLabel>& predictions, const std::vector<SampleLabel>& truth) {
  if (predictions.size() != truth.size())
    throw Error(Errc::LengthMismatch, "predictions have " + std::to_string(predictions.size()) +
                                          " samples, truth has " + std::to_string(truth.size()));
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& p = predictions[i];
    const auto& t = truth[i];
    if (p.device != t.device || p.timestamp != t.timestamp)
      throw Error(Errc::LengthMismatch, "sample " + std::to_string(i) + " is not aligned");
    if (t.anomalous && p.anomalous) ++cm.tp;
    else if (t.anomalous) ++cm.fn;
    else if (p.anomalous) ++cm.fp;
    else ++cm.tn;
    const auto truth_class = t.anomalous ? t.category : std::string(kNormalClass);
    const auto pred_class = p.anomalous ? p.category : std::string(kNormalClass);
    ++cm.per_class[truth_class][pred_class];
  }
  return cm;
}

Metrics compute_metrics(std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn) {
  const auto total = tp + fn + fp + tn;
  if (total == 0) throw Error(Errc::EmptyMatrix, "confusion matrix has no samples");
  auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  Metrics m;
  m.accuracy = ratio(tp + tn, total);
  m.recall = ratio(tp, tp + fn);
  m.fnr = ratio(fn, tp + fn);
  m.fpr = ratio(fp, fp + tn);
  return m;
}

Metrics compute_metrics(const ConfusionMatrix& cm) {
  auto m = compute_metrics(cm.tp, cm.fn, cm.fp, cm.tn);
  std::size_t anomalous = 0, correct = 0;
  for (const auto& [truth_class, row] : cm.per_class) {
    if (truth_class == kNormalClass) continue;
    for (const auto& [pred_class, count] : row) {
      anomalous += count;
      if (pred_class == truth_class) correct += count;
    }
  }
  if (anomalous) m.diagnosis_accuracy = static_cast<double>(correct) / static_cast<double>(anomalous);
  return m;
}

std::string format_metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "variant,accuracy,recall,fnr,fpr\n";
  for (const auto& r : rows)
    out += r.variant + "," + format_fixed4(r.metrics.accuracy) + "," + format_fixed4(r.metrics.recall) + "," +
           format_fixed4(r.metrics.fnr) + "," + format_fixed4(r.metrics.fpr) + "\n";
  return out;
}

std::string format_metrics_table(const std::vector<MetricsRow>& rows) {
  std::vector<std::vector<std::string>> cells = {{"variant", "accuracy", "recall", "fnr", "fpr"}};
  for (const auto& r : rows)
    cells.push_back({r.variant, format_fixed4(r.metrics.accuracy), format_fixed4(r.metrics.recall),
                     format_fixed4(r.metrics.fnr), format_fixed4(r.metrics.fpr)});
  std::vector<std::size_t> width(5, 0);
  for (const auto& row : cells)
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  for (const auto& row : cells) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) line += "  ";
      if (c == 0) line += row[c] + std::string(width[c] - row[c].size(), ' ');
      else line += std::string(width[c] - row[c].size(), ' ') + row[c];
    }
    out += line + "\n";
  }
  return out;
}

std::string write_labels_csv(const std::vector<SampleLabel>& labels) {
  std::string out = "device,timestamp,anomalous,category\n";
  for (const auto& l : labels)
    out += l.device + "," + std::to_string(l.timestamp) + "," + (l.anomalous ? "1" : "0") + "," + l.category + "\n";
  return out;
}

std::vector<SampleLabel> read_labels_csv(std::string_view text) {
  std::vector<SampleLabel> out;
  std::size_t line_no = 0;
  for (const auto& raw : split(text, '\n')) {
    ++line_no;
    auto line = trim(raw);
    if (line.empty()) continue;
    if (line_no == 1 && starts_with(line, "device,")) continue;
    auto f = split(line, ',');
    auto ts = f.size() == 4 ? parse_int(f[1]) : std::nullopt;
    if (!ts || (f[2] != "0" && f[2] != "1"))
      throw Error(Errc::ParseError, "labels line " + std::to_string(line_no) + ": expected device,timestamp,0|1,category");
    SampleLabel l{f[0], *ts, f[2] == "1", f[3].empty() ? std::string(kNormalClass) : f[3]};
    out.push_back(std::move(l));
  }
  return out;
}

}  // namespace netsem
