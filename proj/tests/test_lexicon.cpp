#include <algorithm>
#include <random>

#include "courtside/error.hpp"
#include "courtside/lexicon.hpp"
#include "courtside/textnorm.hpp"
#include "doctest.h"
#include "temp_files.hpp"

using namespace courtside;

TEST_CASE("load_roster folds diacritics but keeps display spelling") {
  testutil::TempDir dir;
  auto roster = load_roster(dir.write("roster.txt", "Devin Booker\nNikola Jokić\n"));
  REQUIRE(roster.size() == 2);
  CHECK(roster.find("devin booker")->display == "Devin Booker");
  CHECK(roster.find("nikola jokic")->display == "Nikola Jokić");
}

TEST_CASE("roster errors") {
  testutil::TempDir dir;
  CHECK_THROWS_AS(load_roster(dir.write("dup.txt", "Devin Booker\n# comment\nDevin Booker\n")), Error);
  try {
    load_roster(dir.path() / "missing.txt");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::io);
  }
  auto empty = load_roster(dir.write("empty.txt", "# nothing here\n\n"));
  CHECK(empty.empty());
}

TEST_CASE("glossary loading and normalized uniqueness") {
  testutil::TempDir dir;
  auto glossary = load_glossary(dir.write("g.txt", "pick and roll\nalley-oop\nfast break\n"));
  CHECK(glossary.size() == 3);
  try {
    load_glossary(dir.write("dup.txt", "Pick And Roll\npick and roll\n"));
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::duplicate_entry);
  }
}

TEST_CASE("names and jargon must be disjoint") {
  std::vector<std::string> names{"Devin Booker", "Fast Break"}, terms{"pick and roll", "fast break"};
  try {
    Lexicon::make(EntrySet::from_displays(names, EntryKind::name),
                  EntrySet::from_displays(terms, EntryKind::jargon), "NBA basketball commentary");
    FAIL("expected an exception");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::disjointness);
  }
}

TEST_CASE("canonical_display") {
  std::vector<std::string> names{"Devin Booker", "Nikola Jokić"}, terms{"alley-oop", "pick and roll"};
  auto lex = Lexicon::make(EntrySet::from_displays(names, EntryKind::name),
                           EntrySet::from_displays(terms, EntryKind::jargon), "NBA");
  CHECK(canonical_display("devin booker", lex) == "Devin Booker");
  CHECK(canonical_display("alleyoop", lex) == "alley-oop");
  CHECK_THROWS_AS(canonical_display("zzz", lex), Error);

  for (const auto* set : {&lex.names, &lex.jargon}) {
    for (const auto& e : set->entries()) CHECK(canonical_display(normalize_joined(e.display), lex) == e.display);
  }
}

TEST_CASE("loading is order independent") {
  testutil::TempDir dir;
  auto lines = read_entry_lines("data/nba_roster.txt");
  REQUIRE(lines.size() > 100);
  auto reference = EntrySet::from_displays(lines, EntryKind::name);
  std::mt19937 rng(3);
  for (int i = 0; i < 5; ++i) {
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string body;
    for (const auto& l : lines) body += l + "\n";
    CHECK(load_roster(dir.write("r" + std::to_string(i) + ".txt", body)) == reference);
  }
}

TEST_CASE("shipped lexicon is consistent") {
  auto lex = Lexicon::make(load_roster("data/nba_roster.txt"), load_glossary("data/basketball_glossary.txt"),
                           "NBA basketball commentary");
  CHECK(lex.names.contains_display("Kristaps Porziņģis"));
  CHECK(lex.jargon.contains_display("pick and roll"));
}
