#include "courtside/wer.hpp"

#include <algorithm>

#include "courtside/error.hpp"
#include "courtside/textnorm.hpp"

namespace courtside {

double WerRecord::wer() const noexcept {
  if (reference_length == 0) return 0.0;
  return static_cast<double>(errors()) / static_cast<double>(reference_length);
}

Alignment align(std::span<const std::string> ref, std::span<const std::string> hyp) {
  if (ref.empty()) throw Error(ErrorCode::undefined_wer, "undefined WER: empty reference");

  const std::size_t n = ref.size(), m = hyp.size();
  // cost[i][j]: cheapest edit of ref[i..] into hyp[j..]. Filled from the end
  // so the forward walk below can apply the left-to-right preference order.
  std::vector<std::size_t> cost((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return cost[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, m) = n - i;
  for (std::size_t j = 0; j <= m; ++j) at(n, j) = m - j;
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      std::size_t diag = at(i + 1, j + 1) + (ref[i] == hyp[j] ? 0 : 1);
      at(i, j) = std::min({diag, at(i + 1, j) + 1, at(i, j + 1) + 1});
    }
  }

  Alignment out;
  out.record.reference_length = n;
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const std::size_t here = at(i, j);
    if (i < n && j < m && ref[i] == hyp[j] && at(i + 1, j + 1) == here) {
      out.steps.push_back({EditOp::match, ref[i], hyp[j]});
      ++i, ++j;
    } else if (i < n && j < m && ref[i] != hyp[j] && at(i + 1, j + 1) + 1 == here) {
      out.steps.push_back({EditOp::substitution, ref[i], hyp[j]});
      ++out.record.substitutions;
      ++i, ++j;
    } else if (i < n && at(i + 1, j) + 1 == here) {
      out.steps.push_back({EditOp::deletion, ref[i], {}});
      ++out.record.deletions;
      ++i;
    } else {
      out.steps.push_back({EditOp::insertion, {}, hyp[j]});
      ++out.record.insertions;
      ++j;
    }
  }
  return out;
}

std::vector<std::string> replay(const Alignment& alignment, std::span<const std::string> ref) {
  std::vector<std::string> out;
  std::size_t i = 0;
  for (const auto& step : alignment.steps) {
    switch (step.op) {
      case EditOp::match:
        out.push_back(ref[i++]);
        break;
      case EditOp::substitution:
        ++i;
        out.push_back(step.hyp_word);
        break;
      case EditOp::deletion:
        ++i;
        break;
      case EditOp::insertion:
        out.push_back(step.hyp_word);
        break;
    }
  }
  return out;
}

WerRecord wer(std::string_view ref, std::string_view hyp) {
  NormalizedText r = normalize(ref);
  NormalizedText h = normalize(hyp);
  return align(r.words, h.words).record;
}

}  // namespace courtside
