#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>
#include <set>

#include "stemmaplace/error.hpp"
#include "stemmaplace/pairgen.hpp"
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

// 21-witness tradition over a random tree with a few random readings.
struct Tradition {
  Stemma stemma;
  Collation words;
  LetterCollation letters;
};

Tradition random_tradition(int n, std::size_t rows, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto stemma = Stemma::from_edges(testutil::random_tree_edges(n, gen));
  Collation c;
  c.witnesses = stemma.nodes();
  const std::vector<std::string> readings{"the", "thee", "te", "-"};
  for (std::size_t r = 0; r < rows; ++r) {
    std::vector<std::string> row;
    for (int j = 0; j < n; ++j) row.push_back(gen() % 4 == 0 ? readings[gen() % 4] : "the");
    c.rows.push_back(row);
  }
  auto letters = recode_letters(c);
  return {stemma, c, letters};
}

}  // namespace

TEST_CASE("enum parsing") {
  CHECK(parse_diff_type("variants_sorted") == DiffType::VariantsSorted);
  CHECK(parse_diff_type("binary") == DiffType::Binary);
  CHECK(parse_input_type("variation_places") == InputType::VariationPlaces);
  CHECK(to_string(DiffType::Words) == "words");
  CHECK(error_kind_of([] { parse_diff_type("letters"); }) == ErrorKind::ConfigError);
  CHECK(error_kind_of([] { parse_input_type("some"); }) == ErrorKind::ConfigError);
}

TEST_CASE("token surface forms") {
  auto words = make({"a", "b"}, {{"the", "the"}, {"magpie", "magpy"}});
  auto letters = LetterCollation::from_lettered(make({"a", "b"}, {{"A", "A"}, {"C", "A"}}));
  EncodingInput in{&words, &letters};
  CHECK(encode_pair(in, "a", "b", {DiffType::VariantsSorted, InputType::AllPlaces}) ==
        std::vector<std::string>{"A:A", "A:C"});
  CHECK(encode_pair(in, "a", "b", {DiffType::VariantsUnsorted, InputType::AllPlaces}) ==
        std::vector<std::string>{"A:A", "C:A"});
  CHECK(encode_pair(in, "a", "b", {DiffType::Words, InputType::AllPlaces}) ==
        std::vector<std::string>{"the:the", "magpie:magpy"});
  CHECK(encode_pair(in, "a", "b", {DiffType::Binary, InputType::AllPlaces}) ==
        std::vector<std::string>{"SAME", "DIFF"});
}

TEST_CASE("encodings need the matching input table") {
  auto words = make({"a", "b"}, {{"the", "the"}});
  EncodingInput only_words{&words, nullptr};
  CHECK_THROWS_AS(encode_pair(only_words, "a", "b", {DiffType::VariantsSorted, InputType::AllPlaces}), Error);
  CHECK(encode_pair(only_words, "a", "b", {DiffType::Binary, InputType::AllPlaces}) ==
        std::vector<std::string>{"SAME"});
  CHECK(error_kind_of([&] { encode_pair(only_words, "a", "zz", {DiffType::Binary, InputType::AllPlaces}); }) ==
        ErrorKind::UnknownWitness);
}

TEST_CASE("star tree instances") {
  auto s = load_stemma("r\ta\nr\tb\n");
  auto words = make({"a", "b", "r"}, {{"x", "y", "x"}});
  EncodingInput in{&words, nullptr};
  auto inst = generate_instances(in, s, {DiffType::Binary, InputType::AllPlaces});
  REQUIRE(inst.size() == 3);
  CHECK(inst[0].a == "a");
  CHECK(inst[0].b == "b");
  CHECK(inst[0].target == "2");
  CHECK(inst[1].target == "1");
  CHECK(inst[2].target == "1");
}

TEST_CASE("targets come from the tree, not from the text") {
  auto s = load_stemma("r\ta\na\tb\n");
  auto words = make({"a", "b", "r"}, {{"x", "x", "x"}});
  EncodingInput in{&words, nullptr};
  auto inst = generate_instances(in, s, {DiffType::Binary, InputType::AllPlaces});
  auto rb = std::find_if(inst.begin(), inst.end(), [](const PairInstance& p) { return p.a == "b" && p.b == "r"; });
  REQUIRE(rb != inst.end());
  CHECK(rb->target == "2");
  CHECK(rb->source == std::vector<std::string>{"SAME"});
}

TEST_CASE("generation errors") {
  auto s = load_stemma("r\ta\nr\tb\n");
  auto missing = make({"a", "b"}, {{"x", "y"}});
  EncodingInput in{&missing, nullptr};
  CHECK(error_kind_of([&] { generate_instances(in, s, {DiffType::Binary, InputType::AllPlaces}); }) ==
        ErrorKind::MissingWitnessColumn);
  auto constant = make({"a", "b", "r"}, {{"x", "x", "x"}});
  EncodingInput cin{&constant, nullptr};
  CHECK(error_kind_of([&] { generate_instances(cin, s, {DiffType::Binary, InputType::VariationPlaces}); }) ==
        ErrorKind::EmptyInput);
}

TEST_CASE("21 witnesses give 210 instances and 190/20 splits") {
  auto t = random_tradition(21, 40, 9);
  EncodingInput in{&t.words, &t.letters};
  auto inst = generate_instances(in, t.stemma, {});
  CHECK(inst.size() == 210);
  auto leaf = t.stemma.leaves().front();
  auto split = holdout_split(inst, t.stemma, leaf, 5, 1);
  CHECK(split.test.size() == 20);
  CHECK(split.train.size() == 185);
  CHECK(split.valid.size() == 5);
  auto split10 = holdout_split(inst, t.stemma, leaf, 10, 1);
  CHECK(split10.train.size() == 180);
  CHECK(split10.valid.size() == 10);
}

TEST_CASE("split invariants and determinism") {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 40; ++trial) {
    int n = 8 + static_cast<int>(gen() % 15);
    auto t = random_tradition(n, 10, gen());
    EncodingInput in{&t.words, &t.letters};
    auto inst = generate_instances(in, t.stemma, {DiffType::VariantsSorted, InputType::AllPlaces});
    std::size_t total_test = 0;
    for (const auto& leaf : t.stemma.leaves()) {
      std::uint64_t seed = gen();
      auto sp = holdout_split(inst, t.stemma, leaf, 5, seed);
      total_test += sp.test.size();
      REQUIRE(sp.test.size() == static_cast<std::size_t>(n - 1));
      for (const auto& p : sp.test) REQUIRE(p.involves(leaf));
      std::set<std::pair<std::string, std::string>> tr;
      for (const auto& p : sp.train) {
        REQUIRE_FALSE(p.involves(leaf));
        tr.insert({p.a, p.b});
      }
      for (const auto& p : sp.valid) {
        REQUIRE_FALSE(p.involves(leaf));
        REQUIRE(tr.count({p.a, p.b}) == 0);
      }
      REQUIRE(sp.train.size() + sp.valid.size() + sp.test.size() == inst.size());
      auto again = holdout_split(inst, t.stemma, leaf, 5, seed);
      REQUIRE(again.valid.size() == sp.valid.size());
      for (std::size_t i = 0; i < sp.valid.size(); ++i) REQUIRE(again.valid[i].a == sp.valid[i].a);
      for (std::size_t i = 0; i < sp.valid.size(); ++i) REQUIRE(again.valid[i].b == sp.valid[i].b);
    }
    CHECK(total_test == t.stemma.leaves().size() * static_cast<std::size_t>(n - 1));
  }
}

TEST_CASE("split errors") {
  auto t = random_tradition(6, 5, 2);
  EncodingInput in{&t.words, &t.letters};
  auto inst = generate_instances(in, t.stemma, {});
  CHECK(error_kind_of([&] { holdout_split(inst, t.stemma, t.stemma.root(), 5, 1); }) == ErrorKind::NotALeaf);
  CHECK(error_kind_of([&] { holdout_split(inst, t.stemma, t.stemma.leaves()[0], 10, 1); }) ==
        ErrorKind::ValidTooLarge);
}

TEST_CASE("encoding symmetry and lengths") {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 30; ++trial) {
    auto t = random_tradition(5 + static_cast<int>(gen() % 10), 30, gen());
    EncodingInput in{&t.words, &t.letters};
    auto pv = places_of_variation(t.letters.table());
    const auto& w = t.words.witnesses;
    for (int k = 0; k < 20; ++k) {
      const auto& a = w[gen() % w.size()];
      const auto& b = w[gen() % w.size()];
      for (auto dt : {DiffType::VariantsSorted, DiffType::Binary})
        REQUIRE(encode_pair(in, a, b, {dt, InputType::AllPlaces}) == encode_pair(in, b, a, {dt, InputType::AllPlaces}));
      auto ab = encode_pair(in, a, b, {DiffType::VariantsUnsorted, InputType::AllPlaces});
      auto ba = encode_pair(in, b, a, {DiffType::VariantsUnsorted, InputType::AllPlaces});
      REQUIRE(ab.size() == t.words.rows.size());
      for (std::size_t i = 0; i < ab.size(); ++i) {
        auto colon = ab[i].find(':');
        REQUIRE(ba[i] == ab[i].substr(colon + 1) + ":" + ab[i].substr(0, colon));
      }
      if (!pv.empty())
        REQUIRE(encode_pair(in, a, b, {DiffType::VariantsSorted, InputType::VariationPlaces}).size() == pv.size());
    }
  }
}

TEST_CASE("split files round trip") {
  auto t = random_tradition(7, 6, 4);
  EncodingInput in{&t.words, &t.letters};
  auto inst = generate_instances(in, t.stemma, {});
  auto sp = holdout_split(inst, t.stemma, t.stemma.leaves()[0], 5, 3);
  testutil::TempDir dir("split");
  write_split_files(sp, dir.path);
  for (const auto* name : {"train", "valid", "test"}) {
    auto back = read_instances(dir.path, name);
    const auto& orig = std::string(name) == "train" ? sp.train : std::string(name) == "valid" ? sp.valid : sp.test;
    REQUIRE(back.size() == orig.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      CHECK(back[i].a == orig[i].a);
      CHECK(back[i].b == orig[i].b);
      CHECK(back[i].source == orig[i].source);
      CHECK(back[i].target == orig[i].target);
      CHECK(back[i].distance() >= 1);
    }
  }
}
