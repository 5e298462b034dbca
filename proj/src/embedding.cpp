#include "netsem/embedding.hpp"

#include <cctype>

namespace netsem {

HashingEmbedder::HashingEmbedder(int dims) : dims_(dims) {
  if (dims <= 0) throw Error(Errc::DimMismatch, "embedder dims must be positive");
}

std::vector<std::string> HashingEmbedder::tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      current.push_back(static_cast<char>(std::tolower(c)));
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::uint64_t HashingEmbedder::hash_token(std::string_view token) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ kSeed;
  for (char c : token) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

UnitVector HashingEmbedder::embed(std::string_view text) const {
  if (text.empty()) throw Error(Errc::EmptyText, "cannot embed empty text");
  auto tokens = tokenize(text);
  if (tokens.empty()) tokens.emplace_back(text);
  UnitVector::Vector counts = UnitVector::Vector::Zero(dims_);
  for (const auto& t : tokens) counts[static_cast<Eigen::Index>(hash_token(t) % dims_)] += 1.0;
  return UnitVector::normalized(std::move(counts));
}

const Embedder& default_embedder() {
  static const HashingEmbedder instance;
  return instance;
}

}  // namespace netsem
