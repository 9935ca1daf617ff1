#include <doctest.h>

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "stemmaplace/error.hpp"
#include "stemmaplace/stemma.hpp"
#include "test_util.hpp"

using namespace stemmaplace;
using testutil::error_kind_of;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("smallest branching tree") {
  auto s = load_stemma("r\ta\nr\tb\n");
  CHECK(s.root() == "r");
  CHECK(s.size() == 3);
  CHECK(s.leaves() == std::vector<std::string>{"a", "b"});
  CHECK(s.parent("a") == std::optional<std::string>("r"));
  CHECK_FALSE(s.parent("r").has_value());
  CHECK(s.is_leaf("a"));
  CHECK_FALSE(s.is_leaf("r"));
}

TEST_CASE("comments, blank lines and CRLF are tolerated") {
  auto s = load_stemma("# header\n\nr\ta\r\n  \nr\tb\n");
  CHECK(s.size() == 3);
}

TEST_CASE("structural errors") {
  CHECK(error_kind_of([] { load_stemma("a\tb\nb\ta\n"); }) == ErrorKind::CycleDetected);
  CHECK(error_kind_of([] { load_stemma("a\ta\n"); }) == ErrorKind::CycleDetected);
  CHECK(error_kind_of([] { load_stemma("r\ta\nr\ta\n"); }) == ErrorKind::DuplicateEdge);
  CHECK(error_kind_of([] { load_stemma("r\ta\ns\tb\n"); }) == ErrorKind::MultipleRoots);
  CHECK(error_kind_of([] { load_stemma("r\ta\nr\tb\na\tc\nb\tc\n"); }) == ErrorKind::MultipleParents);
  // r->a plus a separate 2-cycle b<->c.
  CHECK(error_kind_of([] { load_stemma("r\ta\nb\tc\nc\tb\n"); }) == ErrorKind::CycleDetected);
  CHECK(error_kind_of([] { load_stemma("r\ta\nz\n"); }) == ErrorKind::Disconnected);
  CHECK(error_kind_of([] { load_stemma("r\n"); }) == ErrorKind::DegenerateTree);
  CHECK(error_kind_of([] { load_stemma(""); }) == ErrorKind::DegenerateTree);
  CHECK(error_kind_of([] { load_stemma("r\ta\tb\n"); }) == ErrorKind::ParseError);
}

TEST_CASE("error messages name the offending nodes") {
  try {
    load_stemma("x\ty\ny\tx\n");
    FAIL("expected an error");
  } catch (const Error& e) {
    std::string msg = e.what();
    CHECK(msg.find('x') != std::string::npos);
    CHECK(msg.find('y') != std::string::npos);
  }
}

TEST_CASE("path distances") {
  auto s = load_stemma("r\ta\na\tb\n");
  DistanceMatrix d(s);
  CHECK(d.at("r", "b") == 2);
  CHECK(d.at("a", "b") == 1);
  CHECK(d.at("b", "b") == 0);
  CHECK(error_kind_of([&] { d.at("r", "nope"); }) == ErrorKind::UnknownNode);
}

TEST_CASE("remove_leaf keeps the attachment point") {
  auto s = load_stemma("r\ta\nr\tb\n");
  auto t = s.remove_leaf("b");
  CHECK(t.size() == 2);
  CHECK(t.edges() == std::vector<Edge>{{"r", "a"}});

  auto p = load_stemma("r\ta\na\tb\nr\tc\n");
  auto q = p.remove_leaf("b");
  CHECK(q.contains("a"));
  CHECK(q.is_leaf("a"));

  CHECK(error_kind_of([&] { s.remove_leaf("r"); }) == ErrorKind::NotALeaf);
  CHECK(error_kind_of([&] { s.remove_leaf("zz"); }) == ErrorKind::UnknownNode);
  // A two-node tree loses its only edge; the root alone is degenerate.
  CHECK(error_kind_of([] { load_stemma("r\ta\n").remove_leaf("a"); }) == ErrorKind::DegenerateTree);
}

TEST_CASE("newick and edge-list export") {
  auto s = load_stemma("r\tb\nr\ta\na\tc\n");
  CHECK(s.to_newick() == "((c)a,b)r;\n");
  auto back = load_stemma(s.to_edge_list());
  CHECK(back.edges() == s.edges());
}

TEST_CASE("parzival-shaped demo stemma") {
  auto s = load_stemma(read_file(STEMMAPLACE_DATA_DIR "/parzival_shaped_stemma.tsv"));
  CHECK(s.size() == 21);
  CHECK(s.leaves().size() == 12);
  DistanceMatrix d(s);
  int max_leaf = 0;
  for (const auto& a : s.leaves())
    for (const auto& b : s.leaves()) max_leaf = std::max(max_leaf, d.at(a, b));
  CHECK(max_leaf == 6);
  CHECK(s.remove_leaf("L01").size() == 20);
}

TEST_CASE("distance matrix matches an all-pairs shortest-path oracle") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(gen() % 24);
    auto edges = testutil::random_tree_edges(n, gen);
    auto s = Stemma::from_edges(edges);
    DistanceMatrix d(s);
    auto oracle = testutil::floyd_warshall(d.order(), edges);
    for (std::size_t i = 0; i < d.size(); ++i)
      for (std::size_t j = 0; j < d.size(); ++j) REQUIRE(d.at(i, j) == oracle[i][j]);
  }
}

TEST_CASE("distance matrix is a tree metric") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = Stemma::from_edges(testutil::random_tree_edges(4 + static_cast<int>(gen() % 12), gen));
    DistanceMatrix d(s);
    const std::size_t n = d.size();
    for (int q = 0; q < 200; ++q) {
      std::size_t i = gen() % n, j = gen() % n, k = gen() % n, l = gen() % n;
      REQUIRE(d.at(i, j) == d.at(j, i));
      // Four-point condition: the two largest of the three pair sums agree.
      std::array<int, 3> sums{d.at(i, j) + d.at(k, l), d.at(i, k) + d.at(j, l), d.at(i, l) + d.at(j, k)};
      std::sort(sums.begin(), sums.end());
      REQUIRE(sums[1] == sums[2]);
    }
  }
}

TEST_CASE("removing a leaf leaves the other distances untouched") {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = Stemma::from_edges(testutil::random_tree_edges(3 + static_cast<int>(gen() % 20), gen));
    DistanceMatrix full(s);
    auto leaves = s.leaves();
    const auto& q = leaves[gen() % leaves.size()];
    auto b = s.remove_leaf(q);
    DistanceMatrix sub(b);
    CHECK(b.size() == s.size() - 1);
    for (const auto& x : b.nodes())
      for (const auto& y : b.nodes()) REQUIRE(sub.at(x, y) == full.at(x, y));
  }
}

TEST_CASE("leaves and internal nodes partition the node set") {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    auto s = Stemma::from_edges(testutil::random_tree_edges(2 + static_cast<int>(gen() % 30), gen));
    const auto leaf_list = s.leaves();
    std::set<std::string> leaves(leaf_list.begin(), leaf_list.end());
    std::set<std::string> internal;
    for (const auto& e : s.edges()) internal.insert(e.first);
    std::size_t overlap = 0;
    for (const auto& l : leaves) overlap += internal.count(l);
    CHECK(overlap == 0);
    CHECK(leaves.size() + internal.size() == s.size());
  }
}

TEST_CASE("deep path trees do not overflow the stack") {
  std::vector<Edge> edges;
  for (int i = 0; i < 20000; ++i) edges.emplace_back("n" + std::to_string(i), "n" + std::to_string(i + 1));
  auto s = Stemma::from_edges(edges);
  CHECK(s.preorder().size() == 20001);
  CHECK(!s.to_newick().empty());
}
