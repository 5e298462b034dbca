#include "netsem/format.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "netsem/error.hpp"

namespace netsem {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::MissingFile: return "MissingFile";
    case Errc::SchemaViolation: return "SchemaViolation";
    case Errc::NonMonotonicTimestamps: return "NonMonotonicTimestamps";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::MissingContext: return "MissingContext";
    case Errc::NoDemonstrations: return "NoDemonstrations";
    case Errc::ProviderError: return "ProviderError";
    case Errc::EmptyText: return "EmptyText";
    case Errc::DimMismatch: return "DimMismatch";
    case Errc::TooFewTexts: return "TooFewTexts";
    case Errc::EmptyList: return "EmptyList";
    case Errc::UnknownDevice: return "UnknownDevice";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::UnitMismatch: return "UnitMismatch";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::ParseError: return "ParseError";
    case Errc::InvalidSpec: return "InvalidSpec";
    case Errc::UnknownTarget: return "UnknownTarget";
    case Errc::UnknownCategory: return "UnknownCategory";
    case Errc::LengthMismatch: return "LengthMismatch";
    case Errc::EmptyMatrix: return "EmptyMatrix";
    case Errc::Usage: return "Usage";
  }
  return "Unknown";
}

std::string format_shortest(double value) {
  if (value == 0.0) return "0";  // folds -0 into 0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::string format_fixed4(std::optional<double> value) {
  if (!value) return "n/a";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", *value);
  return buf;
}

std::optional<double> parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text.front() == '+') text.remove_prefix(1);
  double out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return out;
}

std::optional<long long> parse_int(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  long long out = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  if (ec != std::errc() || ptr != text.data() + text.size()) return std::nullopt;
  return out;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front())))
    text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
    text.remove_suffix(1);
  return text;
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool starts_with(std::string_view text, std::string_view prefix) {
  return text.substr(0, prefix.size()) == prefix;
}

}  // namespace netsem
