#pragma once

// LLM provider abstraction. The mock answers every prompt kind the
// pipeline issues with a deterministic, rule-based response so the whole
// workflow runs offline.

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netsem {

struct ProviderCapabilities {
  bool deterministic = false;
  bool remote = false;
};

class LlmProvider {
 public:
  virtual ~LlmProvider() = default;
  virtual std::string complete(const std::string& prompt, double temperature, std::uint64_t seed) = 0;
  virtual std::string name() const = 0;
  virtual ProviderCapabilities capabilities() const = 0;
};

/// First-line markers the pipeline puts on non-template prompts.
namespace prompt_marker {
inline constexpr std::string_view kVerdict = "DIAGNOSE BLUEPRINT";
inline constexpr std::string_view kSynthesis = "SYNTHESIZE REPORT";
inline constexpr std::string_view kReformat = "REFORMAT REPORT";
inline constexpr std::string_view kTriples = "EXTRACT TRIPLES";
inline constexpr std::string_view kDetect = "DETECT ANOMALIES";
}  // namespace prompt_marker

/// Pure function of (prompt, seed); temperature is ignored.
class MockProvider : public LlmProvider {
 public:
  std::string complete(const std::string& prompt, double temperature, std::uint64_t seed) override;
  std::string name() const override { return "mock"; }
  ProviderCapabilities capabilities() const override { return {true, false}; }
};

struct ProviderCall {
  std::string prompt;
  double temperature = 0;
  std::uint64_t seed = 0;
};

/// Wraps another provider and records every call. Thread-safe.
class InstrumentedProvider : public LlmProvider {
 public:
  explicit InstrumentedProvider(LlmProvider& inner) : inner_(inner) {}

  std::string complete(const std::string& prompt, double temperature, std::uint64_t seed) override;
  std::string name() const override { return "instrumented:" + inner_.name(); }
  ProviderCapabilities capabilities() const override { return inner_.capabilities(); }

  std::size_t call_count() const;
  std::vector<ProviderCall> calls() const;
  void reset();

 private:
  LlmProvider& inner_;
  mutable std::mutex mu_;
  std::vector<ProviderCall> calls_;
};

/// Replays a scripted list of responses in order; useful for degradation
/// tests. Throws ProviderError once the script is exhausted.
class ScriptedProvider : public LlmProvider {
 public:
  explicit ScriptedProvider(std::vector<std::string> responses) : responses_(std::move(responses)) {}
  std::string complete(const std::string& prompt, double temperature, std::uint64_t seed) override;
  std::string name() const override { return "scripted"; }
  ProviderCapabilities capabilities() const override { return {true, false}; }

 private:
  std::vector<std::string> responses_;
  std::size_t next_ = 0;
};

struct RemoteConfig {
  std::string endpoint;  // e.g. https://api.example.com/v1/chat/completions
  std::string api_key;
  std::string model;
  int timeout_ms = 30000;
  int network_retries = 2;
  int backoff_ms = 500;  // doubled after each failed attempt

  /// Reads NETSEM_LLM_ENDPOINT, NETSEM_LLM_API_KEY, NETSEM_LLM_MODEL.
  static RemoteConfig from_env();
};

/// Minimal chat-completion client: one user message in, text out.
class RemoteProvider : public LlmProvider {
 public:
  explicit RemoteProvider(RemoteConfig config);
  std::string complete(const std::string& prompt, double temperature, std::uint64_t seed) override;
  std::string name() const override { return "remote:" + config_.model; }
  ProviderCapabilities capabilities() const override { return {false, true}; }

  static std::string request_body(const RemoteConfig& config, const std::string& prompt,
                                  double temperature, std::uint64_t seed);
  static std::string parse_response(const std::string& body);

 private:
  RemoteConfig config_;
};

std::unique_ptr<LlmProvider> make_provider(std::string_view name);

}  // namespace netsem
