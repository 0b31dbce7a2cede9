#include <random>

#include "appendix_b.hpp"
#include "courtside/textnorm.hpp"
#include "doctest.h"

using courtside::normalize;
using Words = std::vector<std::string>;

TEST_CASE("normalize strips case, apostrophes and punctuation") {
  CHECK(normalize("It’s good! Devin Booker").words == Words{"its", "good", "devin", "booker"});
  CHECK(normalize("It's good").words == Words{"its", "good"});
  CHECK(normalize("").words.empty());
  CHECK(normalize("  \t\n ").words.empty());
}

TEST_CASE("hyphens join the halves") {
  CHECK(normalize("a one-point game").words == Words{"a", "onepoint", "game"});
  CHECK(normalize("Shai Gilgeous-Alexander").words == Words{"shai", "gilgeousalexander"});
}

TEST_CASE("digit runs stay as tokens") {
  CHECK(normalize("Game 7, 2024-25 season: 112-108").words ==
        Words{"game", "7", "202425", "season", "112108"});
  CHECK(normalize("3pt").words == Words{"3pt"});
}

TEST_CASE("diacritics and compatibility forms fold to ASCII") {
  CHECK(normalize("Nikola Jokić").words == Words{"nikola", "jokic"});
  CHECK(normalize("Kristaps Porziņģis").words == Words{"kristaps", "porzingis"});
  CHECK(normalize("Alperen Şengün").words == Words{"alperen", "sengun"});
  CHECK(normalize("ﬁnal ＡＢＣ").words == Words{"final", "abc"});
  CHECK(normalize("Łukasz Øre").words == Words{"lukasz", "ore"});
}

TEST_CASE("invalid UTF-8 acts as a boundary") {
  CHECK(normalize(std::string("ab\xff" "cd")).words == Words{"ab", "cd"});
}

TEST_CASE("worked example ground truth has 20 words") {
  const auto& ex = fixtures::kWorkedExamples[0];
  auto n = normalize(ex.ground_truth);
  CHECK(courtside::tokenize_words(n).size() == 20);
  CHECK(n.joined() ==
        "jackson not a smart pass that time booker for three its good devin booker from downtown its a "
        "onepoint game");
  CHECK(courtside::tokenize_words(normalize("its a onepoint game")).size() == 4);
}

namespace {

std::string random_text(std::mt19937& rng) {
  static const std::vector<std::string> pieces = {
      "a", "B", "z", "Q", "0", "9", " ", "  ", "\t", "-", "'", "’", ",", ".", "!", "?", "é", "Ć",
      "ß", "—", "ﬁ", "(", ")", "\"", "ü", "Ω", "中", "_", "/", "Đ"};
  std::uniform_int_distribution<std::size_t> len(0, 24), pick(0, pieces.size() - 1);
  std::string s;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) s += pieces[pick(rng)];
  return s;
}

std::string ascii_upper(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

TEST_CASE("normalization properties over random strings") {
  std::mt19937 rng(20240521);
  for (int i = 0; i < 3000; ++i) {
    const std::string x = random_text(rng);
    const auto n = normalize(x);
    CAPTURE(x);
    CHECK(normalize(n.joined()).words == n.words);
    CHECK(normalize(ascii_upper(x)).words == n.words);
    for (const auto& w : n.words) {
      CHECK_FALSE(w.empty());
      CHECK(w.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789") == std::string::npos);
    }
  }
  CHECK(normalize("a,b").words == normalize("a b").words);
  CHECK(normalize("a;b:c").words == normalize("a b c").words);
}
