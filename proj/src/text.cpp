#include "m2oie/text.hpp"

#include "m2oie/error.hpp"
#include "m2oie/tags.hpp"

namespace m2oie {

std::string_view tag_name(PredTag t) {
  switch (t) {
    case PredTag::kO: return "O";
    case PredTag::kB: return "P-B";
    case PredTag::kI: return "P-I";
  }
  return "?";
}

std::string_view tag_name(ArgTag t) {
  static constexpr std::string_view kNames[] = {"O",    "A0-B", "A0-I", "A1-B", "A1-I",
                                                "A2-B", "A2-I", "A3-B", "A3-I"};
  const auto i = static_cast<std::size_t>(t);
  return i < kNumArgTags ? kNames[i] : "?";
}

Vocabulary::Vocabulary() { add(std::string(kUnkToken)); }

Vocabulary::Vocabulary(std::vector<std::string> tokens) {
  if (tokens.empty() || tokens.front() != kUnkToken) {
    throw ValidationError("vocabulary must start with the unknown token " + std::string(kUnkToken));
  }
  for (const auto& t : tokens) {
    if (index_.count(t)) throw ValidationError("duplicate vocabulary entry '" + t + "'");
    add(t);
  }
}

std::int32_t Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  const auto id = static_cast<std::int32_t>(tokens_.size());
  tokens_.push_back(token);
  index_.emplace(token, id);
  return id;
}

std::int32_t Vocabulary::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? kUnkId : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

const std::string& Vocabulary::token(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= tokens_.size()) {
    throw ValidationError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return tokens_[static_cast<std::size_t>(id)];
}

Sentence Sentence::padded_to(std::size_t len) const {
  if (len < padded_length()) {
    throw ValidationError("cannot pad a sentence of length " + std::to_string(padded_length()) +
                          " down to " + std::to_string(len));
  }
  Sentence s = *this;
  s.token_ids.resize(len, Vocabulary::kUnkId);
  s.pad_mask.resize(len, 1);
  return s;
}

std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  auto is_space = [](char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
  };
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

Sentence make_sentence(std::vector<std::string> tokens, const Vocabulary& vocab) {
  if (tokens.empty()) throw ValidationError("sentence has no tokens");
  Sentence s;
  s.token_ids.reserve(tokens.size());
  for (const auto& t : tokens) s.token_ids.push_back(vocab.id(t));
  s.pad_mask.assign(tokens.size(), 0);
  s.tokens = std::move(tokens);
  return s;
}

Sentence tokenize(std::string_view text, const Vocabulary& vocab) {
  auto tokens = split_whitespace(text);
  if (tokens.empty()) throw ValidationError("cannot tokenize empty text");
  return make_sentence(std::move(tokens), vocab);
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace m2oie
