#include "netsem/semgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "netsem/format.hpp"

namespace netsem {
namespace {

std::string short_num(double v) { return format_shortest(std::round(v * 1000.0) / 1000.0); }

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

void render_slot(std::string& out, std::string_view tag, const std::string& text) {
  if (text.empty()) return;
  out += "<";
  out += tag;
  out += ">\n";
  out += text;
  if (text.back() != '\n') out += "\n";
}

std::string join_lines(const std::vector<std::string>& lines) { return join(lines, "\n"); }

}  // namespace

std::size_t StructuredTable::line_count() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.rows.size();
  return n;
}

std::string StructuredTable::to_text() const {
  std::string out;
  for (const auto& block : blocks) {
    for (const auto& row : block.rows) {
      out += block.device_id + " @ " + std::to_string(row.timestamp) + ":";
      for (std::size_t i = 0; i < row.cells.size(); ++i) {
        const auto& c = row.cells[i];
        out += (i ? ", " : " ") + c.kpi + "=" + format_shortest(c.value) + " " + c.unit;
      }
      out += "\n";
    }
  }
  return out;
}

StructuredTable render_table(const Dataset& d, std::optional<TimeWindow> window) {
  StructuredTable table;
  for (const auto& id : d.device_ids()) {
    auto it = d.series.find(id);
    if (it == d.series.end()) continue;
    const auto& s = it->second;
    DeviceBlock block{id, {}};
    for (const auto& row : s.rows) {
      if (window && !window->contains(row.timestamp)) continue;
      TableRow tr{row.timestamp, {}};
      for (std::size_t k = 0; k < s.kpi_names.size(); ++k)
        tr.cells.push_back({s.kpi_names[k], row.values[k], s.units[k]});
      block.rows.push_back(std::move(tr));
    }
    if (!block.rows.empty()) table.blocks.push_back(std::move(block));
  }
  if (table.blocks.empty()) throw Error(Errc::EmptySelection, "no rows inside the requested window");
  return table;
}

StructuredTable parse_table_text(std::string_view text) {
  StructuredTable table;
  for (const auto& raw : split(text, '\n')) {
    std::string_view line = trim(raw);
    auto at = line.find(" @ ");
    auto colon = line.find(": ", at == std::string_view::npos ? 0 : at);
    if (at == std::string_view::npos || colon == std::string_view::npos) continue;
    auto ts = parse_int(line.substr(at + 3, colon - at - 3));
    if (!ts) continue;
    TableRow row{*ts, {}};
    bool ok = true;
    for (const auto& cell : split(line.substr(colon + 2), ',')) {
      auto c = trim(cell);
      auto eq = c.find('=');
      auto sp = c.find(' ', eq == std::string_view::npos ? 0 : eq);
      if (eq == std::string_view::npos || sp == std::string_view::npos) { ok = false; break; }
      auto v = parse_double(c.substr(eq + 1, sp - eq - 1));
      if (!v) { ok = false; break; }
      row.cells.push_back({std::string(c.substr(0, eq)), *v, std::string(trim(c.substr(sp + 1)))});
    }
    if (!ok) continue;
    std::string device(line.substr(0, at));
    if (table.blocks.empty() || table.blocks.back().device_id != device)
      table.blocks.push_back({device, {}});
    table.blocks.back().rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::string> describe_table(const StructuredTable& table) {
  std::vector<std::string> sentences;
  for (const auto& block : table.blocks) {
    if (block.rows.empty()) continue;
    std::ostringstream s;
    s << "Device " << block.device_id << " reports " << block.rows.size() << " samples from "
      << block.rows.front().timestamp << " to " << block.rows.back().timestamp << " ms:";
    std::vector<std::string> levels, deviations;
    const auto& kpis = block.rows.front().cells;
    for (std::size_t k = 0; k < kpis.size(); ++k) {
      std::vector<double> values;
      for (const auto& r : block.rows)
        if (k < r.cells.size()) values.push_back(r.cells[k].value);
      if (values.empty()) continue;
      const auto& unit = kpis[k].unit;
      double sum = 0;
      for (double v : values) sum += v;
      auto [mn, mx] = std::minmax_element(values.begin(), values.end());
      levels.push_back(kpis[k].kpi + " mean " + short_num(sum / values.size()) + " " + unit + " (min " +
                       short_num(*mn) + ", max " + short_num(*mx) + ", last " + short_num(values.back()) + ")");

      const double med = median(values);
      const double tol = 0.25 * std::abs(med) + 1e-9;
      std::size_t i = 0;
      while (i < values.size()) {
        if (std::abs(values[i] - med) <= tol) { ++i; continue; }
        std::size_t j = i, peak = i;
        while (j < values.size() && std::abs(values[j] - med) > tol) {
          if (std::abs(values[j] - med) > std::abs(values[peak] - med)) peak = j;
          ++j;
        }
        deviations.push_back(kpis[k].kpi + " deviated to " + short_num(values[peak]) + " " + unit + " during " +
                             std::to_string(block.rows[i].timestamp) + "-" +
                             std::to_string(block.rows[j - 1].timestamp) + " ms");
        i = j;
      }
    }
    s << " " << join(levels, "; ") << ".";
    if (deviations.empty()) s << " No deviations from typical levels.";
    else s << " Deviations: " << join(deviations, "; ") << ".";
    sentences.push_back(s.str());
  }
  return sentences;
}

std::string_view to_string(PromptVariant v) {
  switch (v) {
    case PromptVariant::zero_shot: return "zero_shot";
    case PromptVariant::general_info: return "general_info";
    case PromptVariant::expertise: return "expertise";
    case PromptVariant::self_heuristic: return "self_heuristic";
  }
  return "zero_shot";
}

std::optional<PromptVariant> parse_prompt_variant(std::string_view text) {
  for (auto v : {PromptVariant::zero_shot, PromptVariant::general_info, PromptVariant::expertise,
                 PromptVariant::self_heuristic})
    if (to_string(v) == text) return v;
  return std::nullopt;
}

std::size_t PromptTemplate::populated_slots() const {
  std::size_t n = 0;
  for (const auto* s : {&instructions.role, &instructions.task_description, &instructions.reinforce,
                        &content.input, &content.task_confirmation, &constraint.knowledge,
                        &constraint.steps, &constraint.rules})
    n += !s->empty();
  return n + (demonstrations.empty() ? 0 : 1);
}

std::string PromptTemplate::render() const {
  std::string out;
  const bool task_in_content = kind == PromptKind::symbolic || variant == PromptVariant::zero_shot;

  std::string instr;
  render_slot(instr, "role", instructions.role);
  if (!task_in_content) render_slot(instr, "task description", instructions.task_description);
  render_slot(instr, "reinforce", instructions.reinforce);

  std::string content_block;
  if (task_in_content) render_slot(content_block, "task description", instructions.task_description);
  for (const auto& demo : demonstrations)
    render_slot(content_block, "demonstration example", "Input:\n" + demo.input + "\nOutput:\n" + demo.output);
  render_slot(content_block, "input", content.input);
  render_slot(content_block, "task confirmation", content.task_confirmation);

  std::string constraint_block;
  render_slot(constraint_block, variant == PromptVariant::expertise ? "expertise" : "knowledge",
              constraint.knowledge);
  render_slot(constraint_block, "steps", constraint.steps);
  render_slot(constraint_block, "rules", constraint.rules);

  auto section = [&](std::string_view header, const std::string& body) {
    if (body.empty()) return;
    if (!out.empty()) out += "\n";
    out += header;
    out += "\n";
    out += body;
  };
  section("INSTRUCTIONS", instr);
  section("CONTENT", content_block);
  section("CONSTRAINT", constraint_block);
  return out;
}

std::string PromptTemplate::id() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "p%016llx",
                static_cast<unsigned long long>(HashingEmbedder::hash_token(render())));
  return buf;
}

std::vector<std::string> expert_notes() {
  return {
      "Delay above 100 ms on a wireless link usually indicates queue build-up from congestion.",
      "Packet loss above 5 % together with rising delay points to congestion; loss alone with weak RSSI points to obstacles.",
      "RSSI below -90 dBm means the receiver is at the edge of its communication range.",
      "A device whose throughput drops to zero while neighbors stay healthy has likely crashed.",
      "Error rates above 2 % with a packet-rate surge are typical of malicious traffic.",
  };
}

PromptTemplate build_semantic_prompt(PromptVariant variant, const std::string& table_text,
                                     const std::vector<std::string>& kg_snippets,
                                     const std::string& device_context) {
  PromptTemplate p;
  p.kind = PromptKind::semantic;
  p.variant = variant;
  const std::string task =
      "Describe the state of every device in the network data below in natural language, "
      "covering KPI levels, trends and notable events.";
  p.instructions.task_description = task;
  p.content.input = table_text;
  if (variant == PromptVariant::zero_shot) return p;

  if (variant == PromptVariant::self_heuristic) {
    if (kg_snippets.empty()) throw Error(Errc::MissingContext, "self_heuristic prompt requires knowledge snippets");
    if (device_context.empty()) throw Error(Errc::MissingContext, "self_heuristic prompt requires device context");
    p.instructions.role = "You are a network operations engineer responsible for " + device_context + ".";
    p.instructions.task_description = task + " Network context: " + device_context + ".";
    p.constraint.knowledge = join_lines(kg_snippets);
  } else {
    p.instructions.role = "You are a network operations assistant.";
  }
  if (variant == PromptVariant::expertise)
    p.constraint.knowledge = join_lines(kg_snippets.empty() ? expert_notes() : kg_snippets);

  p.instructions.reinforce =
      "Cover every device and every KPI in the input. Never invent values that are not in the input.";
  p.content.task_confirmation = "Confirm that the description mentions every device listed in the input.";
  p.constraint.steps =
      "Think step by step: 1) read each device block; 2) summarize each KPI level; "
      "3) report runs of samples that deviate from typical levels.";
  p.constraint.rules = "Use KPI names and units exactly as given. Write one paragraph per device.";
  return p;
}

Demonstration builtin_symbolic_demonstration() {
  return {
      "device h1 class base_station\ndevice a1 class uav\ndevice a2 class uav\n"
      "edge a1 h1\nedge a2 h1\nport a1 h1 down",
      "class(a1, uav)\nclass(a2, uav)\nclass(h1, base_station)\nconnected(a1, h1)\n"
      "connected(a2, h1)\nport_down(a1, h1)",
  };
}

PromptTemplate build_symbolic_prompt(const std::vector<Demonstration>& demonstrations,
                                     const std::string& input) {
  if (demonstrations.empty()) throw Error(Errc::NoDemonstrations, "symbolic prompt needs at least one demonstration");
  PromptTemplate p;
  p.kind = PromptKind::symbolic;
  p.variant = PromptVariant::zero_shot;
  p.instructions.task_description =
      "Convert the network information into first-order facts, one atom per line, following the "
      "format of the demonstration examples.";
  p.demonstrations = demonstrations;
  p.content.input = input;
  return p;
}

std::vector<SemanticText> sample_semantics(const PromptTemplate& prompt, LlmProvider& provider, int n,
                                           std::uint64_t seed, double temperature) {
  if (n < 1) throw Error(Errc::EmptyList, "sample count must be >= 1");
  const auto rendered = prompt.render();
  const auto id = prompt.id();
  std::vector<SemanticText> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::string text;
    try {
      text = provider.complete(rendered, temperature, seed + static_cast<std::uint64_t>(i));
    } catch (const ProviderError& e) {
      throw e.with_sample_index(i);
    }
    if (trim(text).empty())
      throw ProviderError("provider returned empty text").with_sample_index(i);
    out.push_back({std::move(text), id, i});
  }
  return out;
}

UnitVector embed(std::string_view text, const Embedder& embedder) {
  if (text.empty()) throw Error(Errc::EmptyText, "cannot embed empty text");
  return embedder.embed(text);
}

std::pair<std::size_t, SemanticText> select_best(const std::vector<SemanticText>& texts,
                                                 const Embedder& embedder) {
  if (texts.empty()) throw Error(Errc::EmptyList, "no texts to select from");
  if (texts.size() == 1) return {0, texts.front()};
  std::vector<UnitVector> vectors;
  vectors.reserve(texts.size());
  for (const auto& t : texts) vectors.push_back(embed(t.text, embedder));
  const auto best = select_most_central(std::span<const UnitVector>(vectors));
  return {best, texts[best]};
}

}  // namespace netsem
