#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace m2oie {

// Word-level vocabulary. Id 0 is always the shared unknown token.
class Vocabulary {
 public:
  static constexpr std::int32_t kUnkId = 0;
  static constexpr std::string_view kUnkToken = "[UNK]";

  Vocabulary();
  // Rebuilds from an ordered token list whose first entry is the unknown token.
  explicit Vocabulary(std::vector<std::string> tokens);

  // Adds a token if absent; returns its id.
  std::int32_t add(const std::string& token);
  std::int32_t id(std::string_view token) const;
  bool contains(std::string_view token) const;
  const std::string& token(std::int32_t id) const;
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// Token ids plus a padding mask. Real tokens occupy the leading positions;
// pad_mask[i] == 1 marks a padding slot.
struct Sentence {
  std::vector<std::string> tokens;
  std::vector<std::int32_t> token_ids;
  std::vector<std::uint8_t> pad_mask;

  // Number of real (unpadded) tokens.
  std::size_t length() const { return tokens.size(); }
  // Padded length.
  std::size_t padded_length() const { return token_ids.size(); }
  // Returns a copy padded with unknown ids up to `len` positions.
  Sentence padded_to(std::size_t len) const;
};

std::vector<std::string> split_whitespace(std::string_view text);

// Whitespace tokenization; unknown words map to Vocabulary::kUnkId.
// Throws ValidationError on empty (or all-whitespace) text.
Sentence tokenize(std::string_view text, const Vocabulary& vocab);
Sentence make_sentence(std::vector<std::string> tokens, const Vocabulary& vocab);

std::string detokenize(const std::vector<std::string>& tokens);

}  // namespace m2oie
