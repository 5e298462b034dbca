#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <map>
#include <set>
#include <thread>

#include "netsem/error.hpp"
#include "netsem/format.hpp"
#include "netsem/nkg.hpp"
#include "netsem/provider.hpp"
#include "netsem/semgen.hpp"

// httplib pulls in OpenSSL headers whose macros break Eigen; keep it last.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"

namespace netsem {

namespace {

constexpr std::string_view kNoViolationSentence = "No rule violations were detected; verify network health.";

std::vector<std::string> lines_of(std::string_view text) {
  auto out = split(text, '\n');
  for (auto& l : out)
    if (!l.empty() && l.back() == '\r') l.pop_back();
  return out;
}

// Lines of the section starting after a line equal to `header`, up to the
// next line in `stops` (or the end). Uses the last occurrence of `header`.
std::vector<std::string> section(const std::vector<std::string>& lines, std::string_view header,
                                 std::initializer_list<std::string_view> stops) {
  std::size_t start = lines.size();
  for (std::size_t i = lines.size(); i-- > 0;)
    if (lines[i] == header) {
      start = i + 1;
      break;
    }
  std::vector<std::string> out;
  for (std::size_t i = start; i < lines.size(); ++i) {
    if (std::find(stops.begin(), stops.end(), lines[i]) != stops.end()) break;
    out.push_back(lines[i]);
  }
  return out;
}

std::set<std::string> identifier_tokens(const std::vector<std::string>& lines) {
  std::set<std::string> out;
  for (const auto& l : lines) {
    std::string cur;
    for (char c : l) {
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
        cur += c;
      } else if (!cur.empty()) {
        out.insert(cur);
        cur.clear();
      }
    }
    if (!cur.empty()) out.insert(cur);
  }
  return out;
}

std::vector<Triple> knowledge_triples(const std::vector<std::string>& lines) {
  std::vector<Triple> out;
  for (const auto& l : lines)
    if (auto t = parse_triple_line(l)) out.push_back(*t);
  return out;
}

std::string mock_verdict(const std::vector<std::string>& lines) {
  std::string cause;
  for (const auto& l : lines) {
    auto pos = l.find(": cause=");
    if (starts_with(l, "BLUEPRINT ") && pos != std::string::npos) {
      cause = std::string(trim(std::string_view(l).substr(pos + 8)));
      break;
    }
  }
  const auto knowledge = knowledge_triples(section(lines, "KNOWLEDGE", {"PROBLEM"}));
  const auto problem = identifier_tokens(section(lines, "PROBLEM", {}));
  std::set<std::string> matched;
  for (const auto& t : knowledge) {
    if (t.literal) continue;
    if (t.subject == cause && problem.count(t.object)) matched.insert(t.object);
    if (t.object == cause && problem.count(t.subject)) matched.insert(t.subject);
  }
  if (matched.empty()) return "verdict: ruled_out\nevidence: none\n";
  return "verdict: confirmed\nevidence: " + join({matched.begin(), matched.end()}, ", ") + "\n";
}

std::string mock_synthesis(const std::vector<std::string>& lines) {
  struct Row {
    std::string id, cause;
    std::vector<std::string> evidence;
  };
  std::vector<Row> confirmed;
  for (const auto& l : section(lines, "VERDICTS", {""})) {
    auto parts = split(l, ' ');
    if (parts.size() < 3 || parts[2] != "confirmed") continue;
    Row r{parts[0], parts[1], {}};
    for (std::size_t i = 3; i < parts.size(); ++i)
      if (starts_with(parts[i], "evidence=")) {
        for (auto& e : split(std::string_view(parts[i]).substr(9), ','))
          if (!e.empty() && e != "none") r.evidence.push_back(e);
      }
    confirmed.push_back(std::move(r));
  }

  const auto problem_lines = section(lines, "PROBLEM", {"VERDICTS"});
  std::string report;
  if (confirmed.empty()) {
    bool healthy = false;
    for (const auto& l : problem_lines)
      if (l.find(kNoViolationSentence) != std::string::npos) healthy = true;
    if (healthy) {
      return "fault_type: normal\n"
             "phenomenon: all KPIs are within their thresholds\n"
             "explanation: no rule violations were found and no candidate cause was confirmed\n"
             "summary: the network is operating normally\n"
             "solutions:\n- continue routine monitoring\n";
    }
    return "fault_type: unknown\n"
           "phenomenon: anomalies were observed but no candidate cause was confirmed\n"
           "explanation: every blueprint was ruled out or inconclusive\n"
           "summary: the root cause could not be determined from the available evidence\n"
           "solutions:\n- collect additional diagnostics from the affected devices\n";
  }

  const Row* best = &confirmed.front();
  for (const auto& r : confirmed)
    if (r.evidence.size() > best->evidence.size()) best = &r;

  std::map<std::string, std::string> facts;
  for (const auto& t : knowledge_triples(section(lines, "KNOWLEDGE", {"PROBLEM"})))
    if (t.literal && t.subject == best->cause) facts[t.predicate] = t.object;

  std::string category = facts.count("category") ? facts["category"] : "";
  if (category.empty()) {
    if (auto c = parse_category(best->cause)) category = std::string(display_name(*c));
    else category = "unknown";
  }
  const auto evidence = best->evidence.empty() ? std::string("the reported anomalies") : join(best->evidence, ", ");
  const auto phenomenon =
      facts.count("phenomenon") ? facts["phenomenon"] : "abnormal values of " + evidence;
  std::vector<std::string> solutions;
  if (facts.count("solution"))
    for (const auto& s : split(facts["solution"], ';'))
      if (!trim(s).empty()) solutions.emplace_back(trim(s));
  if (solutions.empty()) solutions.push_back("inspect the devices named in the findings");

  std::vector<std::string> other;
  for (const auto& r : confirmed)
    if (&r != best) other.push_back(r.cause);

  report = "fault_type: " + category + "\n";
  report += "phenomenon: " + phenomenon + "\n";
  report += "explanation: blueprint " + best->id + " (" + best->cause + ") is supported by " + evidence;
  if (!other.empty()) report += "; also consistent: " + join(other, ", ");
  report += "\n";
  report += "summary: " + category + " is the most likely cause of the observed anomalies\n";
  report += "solutions:\n";
  for (const auto& s : solutions) report += "- " + s + "\n";
  return report;
}

std::string mock_reformat() {
  return "fault_type: unknown\n"
         "phenomenon: the diagnosis output could not be read\n"
         "explanation: the provider response did not follow the report format\n"
         "summary: no reliable conclusion is available\n"
         "solutions:\n- rerun the diagnosis\n";
}

std::string mock_triples(const std::string& prompt) {
  auto pos = prompt.find("\nTEXT\n");
  if (pos == std::string::npos) return "";
  std::string text = prompt.substr(pos + 6);
  std::replace(text.begin(), text.end(), '\n', '.');
  std::string out;
  for (const auto& sentence : split(text, '.')) {
    std::vector<std::string> words;
    std::string cur;
    for (char c : sentence) {
      if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';' || c == ':' || c == '(' ||
          c == ')') {
        if (!cur.empty()) words.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    if (!cur.empty()) words.push_back(cur);
    if (words.size() < 3) continue;
    std::vector<std::string> middle(words.begin() + 1, words.end() - 1);
    out += "(" + words.front() + ", " + join(middle, "_") + ", " + words.back() + ")\n";
  }
  return out;
}

std::string mock_detect(const std::string& prompt) {
  std::vector<std::string> flagged;
  const auto table = parse_table_text(prompt);
  const auto sentences = describe_table(table);
  for (std::size_t i = 0; i < sentences.size() && i < table.blocks.size(); ++i)
    if (sentences[i].find("deviated") != std::string::npos) flagged.push_back(table.blocks[i].device_id);
  return "anomalous: " + (flagged.empty() ? std::string("none") : join(flagged, ", ")) + "\n";
}

std::string mock_symbolic(const std::vector<std::string>& lines) {
  std::size_t start = lines.size();
  for (std::size_t i = lines.size(); i-- > 0;)
    if (lines[i] == "<input>") {
      start = i + 1;
      break;
    }
  std::set<std::string> atoms;
  for (std::size_t i = start; i < lines.size(); ++i) {
    const auto& l = lines[i];
    if (l.empty() || (l.front() == '<' && l.back() == '>')) break;
    std::vector<std::string> w;
    for (auto& p : split(l, ' '))
      if (!p.empty()) w.push_back(p);
    if (w.size() == 4 && w[0] == "device" && w[2] == "class") {
      atoms.insert("class(" + w[1] + ", " + w[3] + ")");
    } else if (w.size() == 3 && w[0] == "edge") {
      auto [a, b] = make_edge(w[1], w[2]);
      atoms.insert("connected(" + a + ", " + b + ")");
    } else if (w.size() == 4 && w[0] == "port" && (w[3] == "up" || w[3] == "down")) {
      atoms.insert("port_" + w[3] + "(" + w[1] + ", " + w[2] + ")");
    }
  }
  std::string out;
  for (const auto& a : atoms) out += a + "\n";
  return out;
}

std::string mock_semantic(const std::string& prompt, std::uint64_t seed) {
  auto sentences = describe_table(parse_table_text(prompt));
  if (sentences.empty()) return "No network data was provided.";
  const auto k = sentences.size();
  if (k > 1) {
    const auto drop = seed % (k + 1);
    if (drop < k) sentences.erase(sentences.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return join(sentences, " ");
}

}  // namespace

std::string MockProvider::complete(const std::string& prompt, double, std::uint64_t seed) {
  const auto lines = lines_of(prompt);
  const std::string_view first = lines.empty() ? std::string_view{} : std::string_view(lines.front());
  if (first == prompt_marker::kVerdict) return mock_verdict(lines);
  if (first == prompt_marker::kSynthesis) return mock_synthesis(lines);
  if (first == prompt_marker::kReformat) return mock_reformat();
  if (first == prompt_marker::kTriples) return mock_triples(prompt);
  if (first == prompt_marker::kDetect) return mock_detect(prompt);
  if (prompt.find("<demonstration example>") != std::string::npos) return mock_symbolic(lines);
  return mock_semantic(prompt, seed);
}

std::string InstrumentedProvider::complete(const std::string& prompt, double temperature, std::uint64_t seed) {
  {
    std::lock_guard lock(mu_);
    calls_.push_back({prompt, temperature, seed});
  }
  return inner_.complete(prompt, temperature, seed);
}

std::size_t InstrumentedProvider::call_count() const {
  std::lock_guard lock(mu_);
  return calls_.size();
}

std::vector<ProviderCall> InstrumentedProvider::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

void InstrumentedProvider::reset() {
  std::lock_guard lock(mu_);
  calls_.clear();
}

std::string ScriptedProvider::complete(const std::string&, double, std::uint64_t) {
  if (next_ >= responses_.size()) throw ProviderError("scripted provider exhausted");
  return responses_[next_++];
}

RemoteConfig RemoteConfig::from_env() {
  RemoteConfig c;
  auto get = [](const char* name) {
    const char* v = std::getenv(name);
    return v ? std::string(v) : std::string();
  };
  c.endpoint = get("NETSEM_LLM_ENDPOINT");
  c.api_key = get("NETSEM_LLM_API_KEY");
  c.model = get("NETSEM_LLM_MODEL");
  return c;
}

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config)) {
  if (config_.endpoint.empty()) throw Error(Errc::Usage, "NETSEM_LLM_ENDPOINT is not set");
  if (config_.model.empty()) throw Error(Errc::Usage, "NETSEM_LLM_MODEL is not set");
}

std::string RemoteProvider::request_body(const RemoteConfig& config, const std::string& prompt,
                                         double temperature, std::uint64_t seed) {
  nlohmann::json body = {
      {"model", config.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", temperature},
      {"seed", seed},
  };
  return body.dump();
}

std::string RemoteProvider::parse_response(const std::string& body) {
  auto j = nlohmann::json::parse(body, nullptr, false);
  if (j.is_discarded()) throw ProviderError("response is not JSON");
  try {
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw ProviderError("response has no choices[0].message.content");
  }
}

std::string RemoteProvider::complete(const std::string& prompt, double temperature, std::uint64_t seed) {
  // Split "scheme://host[:port]/path" for httplib.
  const auto& url = config_.endpoint;
  auto scheme_end = url.find("://");
  auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
  const std::string base = path_start == std::string::npos ? url : url.substr(0, path_start);
  const std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

  httplib::Client client(base);
  const auto secs = config_.timeout_ms / 1000;
  const auto usecs = (config_.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);
  httplib::Headers headers;
  if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

  const auto body = request_body(config_, prompt, temperature, seed);
  const int attempts = 1 + std::max(0, config_.network_retries);
  int backoff = config_.backoff_ms;
  std::string last_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    if (res && res->status == 200) return parse_response(res->body);
    if (res) {
      last_error = "HTTP " + std::to_string(res->status);
      // Client errors other than rate limiting will not improve on retry.
      if (res->status >= 400 && res->status < 500 && res->status != 429)
        throw ProviderError(last_error, attempt, config_.timeout_ms);
    } else {
      last_error = httplib::to_string(res.error());
    }
    if (attempt < attempts) {
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
  }
  throw ProviderError(last_error, attempts, config_.timeout_ms);
}

std::unique_ptr<LlmProvider> make_provider(std::string_view name) {
  if (name == "mock") return std::make_unique<MockProvider>();
  if (name == "remote") return std::make_unique<RemoteProvider>(RemoteConfig::from_env());
  throw Error(Errc::Usage, "unknown provider '" + std::string(name) + "'");
}

}  // namespace netsem
