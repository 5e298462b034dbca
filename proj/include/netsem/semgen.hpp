#pragma once

// Semanticization: network data -> structured text -> prompt -> n sampled
// descriptions -> most central description.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netsem/datamodel.hpp"
#include "netsem/embedding.hpp"
#include "netsem/provider.hpp"

namespace netsem {

struct TableCell {
  std::string kpi;
  double value = 0;
  std::string unit;
  friend bool operator==(const TableCell&, const TableCell&) = default;
};

struct TableRow {
  Timestamp timestamp = 0;
  std::vector<TableCell> cells;
  friend bool operator==(const TableRow&, const TableRow&) = default;
};

struct DeviceBlock {
  std::string device_id;
  std::vector<TableRow> rows;
  friend bool operator==(const DeviceBlock&, const DeviceBlock&) = default;
};

/// Per-device blocks of "<device> @ <t>: <kpi>=<v> <unit>, ..." lines.
struct StructuredTable {
  std::vector<DeviceBlock> blocks;

  std::size_t line_count() const;
  std::string to_text() const;
  friend bool operator==(const StructuredTable&, const StructuredTable&) = default;
};

/// Throws EmptySelection when the window excludes every row.
StructuredTable render_table(const Dataset& d, std::optional<TimeWindow> window = std::nullopt);

/// Inverse of StructuredTable::to_text. Lines that do not follow the
/// grammar are skipped.
StructuredTable parse_table_text(std::string_view text);

/// Template-based semanticization: one sentence per device describing KPI
/// levels and the runs of samples that deviate from the device's median.
std::vector<std::string> describe_table(const StructuredTable& table);

enum class PromptVariant { zero_shot, general_info, expertise, self_heuristic };
enum class PromptKind { semantic, symbolic };

std::string_view to_string(PromptVariant v);
std::optional<PromptVariant> parse_prompt_variant(std::string_view text);

struct Demonstration {
  std::string input;
  std::string output;
};

/// Slot layout:
///   INSTRUCTIONS <role> <task description> <reinforce>
///   CONTENT      <input> <task confirmation>
///   CONSTRAINT   <knowledge> <steps> <rules>
/// zero_shot and symbolic prompts carry the task description inside CONTENT.
/// Unpopulated slots are empty strings and are not rendered.
struct PromptTemplate {
  PromptKind kind = PromptKind::semantic;
  PromptVariant variant = PromptVariant::zero_shot;
  struct {
    std::string role, task_description, reinforce;
  } instructions;
  struct {
    std::string input, task_confirmation;
  } content;
  struct {
    std::string knowledge, steps, rules;
  } constraint;
  std::vector<Demonstration> demonstrations;

  std::size_t populated_slots() const;
  std::string render() const;
  /// Stable identifier derived from the rendered text.
  std::string id() const;
};

/// Static expert notes used by the expertise variant.
std::vector<std::string> expert_notes();

PromptTemplate build_semantic_prompt(PromptVariant variant, const std::string& table_text,
                                     const std::vector<std::string>& kg_snippets,
                                     const std::string& device_context);

PromptTemplate build_symbolic_prompt(const std::vector<Demonstration>& demonstrations,
                                     const std::string& input);

/// One-shot demonstration for first-order topology symbolization.
Demonstration builtin_symbolic_demonstration();

struct SemanticText {
  std::string text;
  std::string prompt_id;
  int sample_index = 0;
  friend bool operator==(const SemanticText&, const SemanticText&) = default;
};

/// Sample i is requested with seed + i. Provider failures are rethrown as
/// ProviderError carrying the sample index.
std::vector<SemanticText> sample_semantics(const PromptTemplate& prompt, LlmProvider& provider,
                                           int n, std::uint64_t seed, double temperature = 0.0);

UnitVector embed(std::string_view text, const Embedder& embedder = default_embedder());

/// argmax of mean centrality, lowest index on ties; n = 1 returns 0
/// without embedding.
std::pair<std::size_t, SemanticText> select_best(const std::vector<SemanticText>& texts,
                                                 const Embedder& embedder = default_embedder());

}  // namespace netsem
