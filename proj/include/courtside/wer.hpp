#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace courtside {

enum class EditOp : char { match = 'M', substitution = 'S', deletion = 'D', insertion = 'I' };

struct AlignmentStep {
  EditOp op;
  std::string ref_word;  // empty for insertions
  std::string hyp_word;  // empty for deletions
};

/// Counts for one (reference, hypothesis) pair. wer() = (S + D + I) / N.
struct WerRecord {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_length = 0;

  std::size_t errors() const noexcept { return substitutions + deletions + insertions; }
  double wer() const noexcept;

  bool operator==(const WerRecord&) const = default;
};

struct Alignment {
  std::vector<AlignmentStep> steps;
  WerRecord record;
};

/// Minimum-edit word alignment with unit costs. Among equally cheap
/// alignments the walk prefers, left to right, match > substitution >
/// deletion > insertion. Throws Error(undefined_wer) on an empty reference.
Alignment align(std::span<const std::string> ref, std::span<const std::string> hyp);

/// Rebuilds the hypothesis by applying the alignment's edit ops to the
/// reference.
std::vector<std::string> replay(const Alignment& alignment, std::span<const std::string> ref);

/// Normalizes both strings and aligns them.
WerRecord wer(std::string_view ref, std::string_view hyp);

}  // namespace courtside
