#include <array>
#include <cmath>
#include <random>

#include "appendix_b.hpp"
#include "courtside/error.hpp"
#include "courtside/textnorm.hpp"
#include "courtside/wer.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace courtside;
using Words = std::vector<std::string>;

TEST_CASE("identity alignment") {
  Words x{"a", "b", "c"};
  auto al = align(x, x);
  CHECK(al.record.errors() == 0);
  CHECK(al.record.wer() == 0.0);
}

TEST_CASE("small alignment matches exhaustive search") {
  Words ref{"a", "b", "c"}, hyp{"a", "x", "c", "d"};
  auto al = align(ref, hyp);
  CHECK(oracle::brute_edit_distance(ref, hyp) == 2);
  CHECK(al.record.substitutions == 1);
  CHECK(al.record.insertions == 1);
  CHECK(al.record.deletions == 0);
  CHECK(al.record.reference_length == 3);
  CHECK(al.record.wer() == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("empty reference is undefined") {
  CHECK_THROWS_AS(align(Words{}, Words{"a"}), Error);
  CHECK_THROWS_AS(wer("...", "a"), Error);
  try {
    wer("", "x");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::undefined_wer);
  }
}

TEST_CASE("tie-break prefers substitution over delete+insert and scans left to right") {
  auto al = align(Words{"a", "b"}, Words{"b", "a"});
  // Two equally cheap scripts: S,S or D,M,I / I,M,D. Substitutions come first.
  REQUIRE(al.steps.size() == 2);
  CHECK(al.steps[0].op == EditOp::substitution);
  CHECK(al.steps[1].op == EditOp::substitution);

  auto del = align(Words{"a", "a"}, Words{"a"});
  REQUIRE(del.steps.size() == 2);
  CHECK(del.steps[0].op == EditOp::match);
  CHECK(del.steps[1].op == EditOp::deletion);
}

TEST_CASE("worked example baselines reproduce the published WERs") {
  const std::array<std::pair<std::size_t, std::size_t>, 4> counts{{{4, 20}, {8, 13}, {9, 20}, {15, 28}}};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& ex = fixtures::kWorkedExamples[i];
    CAPTURE(ex.id);
    auto rec = wer(ex.ground_truth, ex.baseline);
    CHECK(rec.errors() == counts[i].first);
    CHECK(rec.reference_length == counts[i].second);
    CHECK(std::fabs(rec.wer() - ex.baseline_wer) <= 0.02 + 0.01);
  }
}

TEST_CASE("worked example enhanced transcripts") {
  // Example 2's enhanced transcript differs from its reference in one word
  // only, so it scores 1/13 rather than the published 0.15.
  const std::array<std::size_t, 4> errors{2, 1, 3, 3};
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& ex = fixtures::kWorkedExamples[i];
    CAPTURE(ex.id);
    CHECK(wer(ex.ground_truth, ex.enhanced).errors() == errors[i]);
  }
  CHECK(std::fabs(wer(fixtures::kWorkedExamples[3].ground_truth, fixtures::kWorkedExamples[3].enhanced).wer() -
                  0.11) <= 0.03);
}

TEST_CASE("punctuation and case do not count") {
  CHECK(wer("Devin Booker, from downtown!", "devin booker from downtown").wer() == 0.0);
}

TEST_CASE("alignment properties against the brute-force oracle") {
  std::mt19937 rng(99);
  const Words vocab{"w", "x", "y", "z"};
  std::uniform_int_distribution<std::size_t> len(0, 8), pick(0, 3);
  for (int t = 0; t < 500; ++t) {
    Words ref, hyp;
    for (std::size_t i = 0, n = len(rng); i < n; ++i) ref.push_back(vocab[pick(rng)]);
    for (std::size_t i = 0, n = len(rng); i < n; ++i) hyp.push_back(vocab[pick(rng)]);
    if (ref.empty()) ref.push_back("w");
    auto al = align(ref, hyp);
    CHECK(al.record.errors() == oracle::brute_edit_distance(ref, hyp));
    CHECK(replay(al, ref) == hyp);
    std::size_t gap = ref.size() > hyp.size() ? ref.size() - hyp.size() : hyp.size() - ref.size();
    CHECK(al.record.errors() >= gap);
    CHECK(al.record.substitutions + al.record.deletions <= ref.size());
    CHECK(align(ref, ref).record.errors() == 0);
  }
}
