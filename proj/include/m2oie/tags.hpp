#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace m2oie {

// Ascending token indices of one predicate or argument.
using Span = std::vector<std::size_t>;

inline constexpr std::size_t kNumPredTags = 3;
inline constexpr std::size_t kNumArgSlots = 4;
inline constexpr std::size_t kNumArgTags = 1 + 2 * kNumArgSlots;

enum class PredTag : int { kO = 0, kB = 1, kI = 2 };

// O, then (B, I) for ARG0..ARG3.
enum class ArgTag : int {
  kO = 0,
  kA0B = 1, kA0I = 2,
  kA1B = 3, kA1I = 4,
  kA2B = 5, kA2I = 6,
  kA3B = 7, kA3I = 8,
};

constexpr ArgTag arg_begin_tag(std::size_t slot) { return static_cast<ArgTag>(1 + 2 * slot); }
constexpr ArgTag arg_inside_tag(std::size_t slot) { return static_cast<ArgTag>(2 + 2 * slot); }
// Slot of a non-O tag.
constexpr std::size_t arg_slot(ArgTag t) { return (static_cast<std::size_t>(t) - 1) / 2; }
constexpr bool is_begin(ArgTag t) { return t != ArgTag::kO && static_cast<int>(t) % 2 == 1; }

std::string_view tag_name(PredTag t);
std::string_view tag_name(ArgTag t);

// One optional span per argument slot.
using ArgSpans = std::array<std::optional<Span>, kNumArgSlots>;

struct PredTagSequence {
  std::vector<PredTag> tags;
  std::vector<std::array<double, kNumPredTags>> probs;
  std::size_t size() const { return tags.size(); }
};

struct ArgTagSequence {
  std::vector<ArgTag> tags;
  std::vector<std::array<double, kNumArgTags>> probs;
  std::size_t size() const { return tags.size(); }
};

}  // namespace m2oie
