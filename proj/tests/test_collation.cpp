#include <doctest.h>

#include <random>

#include "stemmaplace/collation.hpp"
#include "stemmaplace/error.hpp"
#include "test_util.hpp"

using namespace stemmaplace;
using testutil::error_kind_of;

namespace {

Collation make(std::vector<std::string> wits, std::vector<std::vector<std::string>> rows) {
  Collation c;
  c.witnesses = std::move(wits);
  c.rows = std::move(rows);
  return c;
}

}  // namespace

TEST_CASE("load a minimal collation") {
  auto c = load_collation("p\tq\nthe\tthe\n");
  CHECK(c.witnesses == std::vector<std::string>{"p", "q"});
  CHECK(c.rows.size() == 1);
  CHECK(c.column_of("q") == 1);
  CHECK(error_kind_of([&] { c.column_of("z"); }) == ErrorKind::UnknownWitness);
}

TEST_CASE("load errors") {
  CHECK(error_kind_of([] { load_collation("p\tq\nthe\tthe\tthe\n"); }) == ErrorKind::RaggedRow);
  CHECK(error_kind_of([] { load_collation("p\tp\nthe\tthe\n"); }) == ErrorKind::DuplicateWitness);
  CHECK(error_kind_of([] { load_collation("p\tq\n"); }) == ErrorKind::EmptyCollation);
  CHECK(error_kind_of([] { load_collation("p\nthe\n"); }) == ErrorKind::EmptyCollation);
  CHECK(error_kind_of([] { load_collation(""); }) == ErrorKind::EmptyCollation);
}

TEST_CASE("ragged row error reports the line") {
  try {
    load_collation("p\tq\na\tb\nc\n");
    FAIL("expected RaggedRow");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
}

TEST_CASE("tsv round trip") {
  std::string text = "p\tq\tr\nthe\tthe\t-\nmagpie\tmagpy\tmagpie\n";
  CHECK(to_tsv(load_collation(text)) == text);
}

TEST_CASE("places of variation") {
  auto c = make({"a", "b", "c"}, {{"the", "the", "the"}, {"the", "thee", "the"}, {"-", "-", "-"}, {"-", "x", "x"}});
  CHECK(places_of_variation(c) == std::vector<std::size_t>{1, 3});
  auto constant = make({"a", "b"}, {{"x", "x"}, {"y", "y"}});
  CHECK(places_of_variation(constant).empty());
}

TEST_CASE("letter recoding rules") {
  auto c = make({"w0", "w1", "w2"}, {{"the", "the", "thee"}});
  CHECK(recode_letters(c, std::string("w0")).rows()[0] == std::vector<std::string>{"A", "A", "B"});

  auto freq = make({"w0", "w1", "w2"}, {{"x", "y", "y"}});
  CHECK(recode_letters(freq).rows()[0] == std::vector<std::string>{"B", "A", "A"});

  auto gap = make({"w0", "w1", "w2"}, {{"-", "a", "a"}});
  CHECK(recode_letters(gap).rows()[0] == std::vector<std::string>{"-", "A", "A"});

  // Ties in frequency go to first occurrence.
  auto tie = make({"w0", "w1", "w2", "w3"}, {{"p", "q", "q", "p"}});
  CHECK(recode_letters(tie).rows()[0] == std::vector<std::string>{"A", "B", "B", "A"});

  // Archetype reading becomes A even when it is rare.
  auto arch = make({"w0", "w1", "w2"}, {{"y", "y", "x"}});
  CHECK(recode_letters(arch, std::string("w2")).rows()[0] == std::vector<std::string>{"B", "B", "A"});

  // An archetype gap stays a gap and the others letter by frequency.
  auto archgap = make({"w0", "w1", "w2"}, {{"-", "y", "x"}});
  CHECK(recode_letters(archgap, std::string("w0")).rows()[0] == std::vector<std::string>{"-", "A", "B"});

  CHECK(error_kind_of([&] { recode_letters(c, std::string("nope")); }) == ErrorKind::UnknownArchetype);
}

TEST_CASE("more than 26 readings in a row is rejected") {
  Collation c;
  std::vector<std::string> row;
  for (int i = 0; i < 27; ++i) {
    c.witnesses.push_back("w" + std::to_string(i));
    row.push_back("r" + std::to_string(i));
  }
  c.rows.push_back(row);
  CHECK(error_kind_of([&] { recode_letters(c); }) == ErrorKind::TooManyVariants);
}

TEST_CASE("pre-lettered input") {
  auto ok = make({"a", "b"}, {{"A", "B"}, {"-", "A"}});
  CHECK(is_lettered(ok));
  CHECK(LetterCollation::from_lettered(ok).rows().size() == 2);
  auto bad = make({"a", "b"}, {{"A", "the"}});
  CHECK_FALSE(is_lettered(bad));
  CHECK(error_kind_of([&] { LetterCollation::from_lettered(bad); }) == ErrorKind::NotLettered);
}

TEST_CASE("recoding is a row-wise bijection and keeps places of variation") {
  std::mt19937_64 gen(42);
  const std::vector<std::string> readings{"the", "thee", "te", "-", "he", "tha"};
  for (int trial = 0; trial < 200; ++trial) {
    std::size_t w = 2 + gen() % 8, r = 1 + gen() % 20;
    Collation c;
    for (std::size_t i = 0; i < w; ++i) c.witnesses.push_back("w" + std::to_string(i));
    for (std::size_t i = 0; i < r; ++i) {
      std::vector<std::string> row;
      std::size_t k = 1 + gen() % readings.size();
      for (std::size_t j = 0; j < w; ++j) row.push_back(readings[gen() % k]);
      c.rows.push_back(row);
    }
    std::optional<std::string> arch;
    if (gen() % 2) arch = c.witnesses[gen() % w];
    auto l = recode_letters(c, arch);
    REQUIRE(is_lettered(l.table()));
    for (std::size_t i = 0; i < r; ++i) {
      for (std::size_t a = 0; a < w; ++a) {
        REQUIRE((c.rows[i][a] == "-") == (l.rows()[i][a] == "-"));
        for (std::size_t b = 0; b < w; ++b)
          REQUIRE((c.rows[i][a] == c.rows[i][b]) == (l.rows()[i][a] == l.rows()[i][b]));
      }
      if (arch && c.rows[i][c.column_of(*arch)] != "-") REQUIRE(l.rows()[i][c.column_of(*arch)] == "A");
    }
    REQUIRE(places_of_variation(l.table()) == places_of_variation(c));
  }
}
