#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "stemmaplace/error.hpp"
#include "stemmaplace/stemma.hpp"

namespace testutil {

// Random rooted tree on n nodes: node k (k >= 1) hangs under a uniformly
// chosen earlier node. Ids are shuffled so that sorted order and insertion
// order differ.
inline std::vector<stemmaplace::Edge> random_tree_edges(int n, std::mt19937_64& gen) {
  std::vector<std::string> ids;
  for (int i = 0; i < n; ++i) ids.push_back("w" + std::to_string(i));
  std::shuffle(ids.begin(), ids.end(), gen);
  std::vector<stemmaplace::Edge> edges;
  for (int k = 1; k < n; ++k) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    edges.emplace_back(ids[static_cast<std::size_t>(pick(gen))], ids[static_cast<std::size_t>(k)]);
  }
  return edges;
}

// Floyd-Warshall over the undirected edge set; indices follow `order`.
inline std::vector<std::vector<int>> floyd_warshall(const std::vector<std::string>& order,
                                                    const std::vector<stemmaplace::Edge>& edges) {
  const int inf = 1 << 20;
  const std::size_t n = order.size();
  auto idx = [&](const std::string& id) {
    return static_cast<std::size_t>(std::find(order.begin(), order.end(), id) - order.begin());
  };
  std::vector<std::vector<int>> d(n, std::vector<int>(n, inf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (const auto& [p, c] : edges) {
    d[idx(p)][idx(c)] = 1;
    d[idx(c)][idx(p)] = 1;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
  return d;
}

template <typename F>
stemmaplace::ErrorKind error_kind_of(F&& f) {
  try {
    f();
  } catch (const stemmaplace::Error& e) {
    return e.kind();
  }
  throw std::runtime_error("expected a stemmaplace::Error");
}

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("stemmaplace_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

}  // namespace testutil
