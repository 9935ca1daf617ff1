#include "stemmaplace/stemma.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <set>
#include <sstream>

#include "stemmaplace/error.hpp"

namespace stemmaplace {

namespace {

std::string join(const std::vector<std::string>& items, std::size_t limit = 10) {
  std::string out;
  for (std::size_t i = 0; i < items.size() && i < limit; ++i) {
    if (i) out += ", ";
    out += items[i];
  }
  if (items.size() > limit) out += ", ...";
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string newick_label(const std::string& id) {
  if (id.find_first_of(" ()[]':;,") == std::string::npos) return id;
  std::string out = "'";
  for (char c : id) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

}  // namespace

Stemma Stemma::from_edges(std::vector<Edge> edges, const std::vector<std::string>& extra_nodes) {
  std::set<std::string> names(extra_nodes.begin(), extra_nodes.end());
  std::set<Edge> seen;
  for (const auto& [p, c] : edges) {
    if (p.empty() || c.empty()) throw Error(ErrorKind::ParseError, "empty node identifier");
    if (p == c) throw Error(ErrorKind::CycleDetected, "self loop at " + p);
    if (!seen.insert({p, c}).second) throw Error(ErrorKind::DuplicateEdge, p + " -> " + c);
    names.insert(p);
    names.insert(c);
  }
  for (const auto& n : extra_nodes)
    if (n.empty()) throw Error(ErrorKind::ParseError, "empty node identifier");
  if (names.size() < 2) throw Error(ErrorKind::DegenerateTree, "a stemma needs at least two nodes");

  Stemma s;
  s.ids_.assign(names.begin(), names.end());
  for (std::size_t i = 0; i < s.ids_.size(); ++i) s.index_.emplace(s.ids_[i], i);
  s.parent_.assign(s.ids_.size(), std::nullopt);
  s.children_.assign(s.ids_.size(), {});

  for (const auto& [p, c] : seen) {
    const auto pi = s.index_.at(p), ci = s.index_.at(c);
    if (pi == ci) throw Error(ErrorKind::CycleDetected, "self loop at " + p);
    if (s.parent_[ci])
      throw Error(ErrorKind::MultipleParents,
                  c + " has parents " + s.ids_[*s.parent_[ci]] + " and " + p);
    s.parent_[ci] = pi;
    s.children_[pi].push_back(ci);
  }
  for (auto& ch : s.children_) std::sort(ch.begin(), ch.end());

  std::vector<std::string> roots;
  for (std::size_t i = 0; i < s.ids_.size(); ++i)
    if (!s.parent_[i]) roots.push_back(s.ids_[i]);
  if (roots.empty()) throw Error(ErrorKind::CycleDetected, "no root; cycle among " + join(s.ids_));
  if (roots.size() > 1) {
    std::vector<std::string> isolated, rooted;
    for (const auto& r : roots) (s.children_[s.index_.at(r)].empty() ? isolated : rooted).push_back(r);
    if (rooted.size() <= 1 && !isolated.empty())
      throw Error(ErrorKind::Disconnected, "isolated nodes: " + join(isolated));
    throw Error(ErrorKind::MultipleRoots, join(roots));
  }
  s.root_ = s.index_.at(roots.front());

  std::vector<bool> reached(s.ids_.size(), false);
  for (auto i : s.preorder()) reached[i] = true;
  std::vector<std::string> unreached;
  for (std::size_t i = 0; i < s.ids_.size(); ++i)
    if (!reached[i]) unreached.push_back(s.ids_[i]);
  if (!unreached.empty())
    throw Error(ErrorKind::CycleDetected, "nodes on a cycle unreachable from root " +
                                              s.ids_[s.root_] + ": " + join(unreached));
  return s;
}

bool Stemma::contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }

std::size_t Stemma::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorKind::UnknownNode, std::string(id));
  return it->second;
}

std::optional<std::string> Stemma::parent(std::string_view id) const {
  const auto p = parent_[index_of(id)];
  if (!p) return std::nullopt;
  return ids_[*p];
}

std::optional<std::size_t> Stemma::parent_index(std::size_t index) const { return parent_[index]; }

std::vector<std::string> Stemma::children(std::string_view id) const {
  std::vector<std::string> out;
  for (auto c : children_[index_of(id)]) out.push_back(ids_[c]);
  return out;
}

bool Stemma::is_leaf(std::string_view id) const { return children_[index_of(id)].empty(); }

std::vector<Edge> Stemma::edges() const {
  std::vector<Edge> out;
  for (std::size_t p = 0; p < ids_.size(); ++p)
    for (auto c : children_[p]) out.emplace_back(ids_[p], ids_[c]);
  return out;
}

std::vector<std::string> Stemma::leaves() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (children_[i].empty()) out.push_back(ids_[i]);
  return out;
}

Stemma Stemma::remove_leaf(std::string_view q) const {
  const auto qi = index_of(q);
  if (!children_[qi].empty()) throw Error(ErrorKind::NotALeaf, std::string(q));
  std::vector<Edge> kept;
  std::vector<std::string> extra;
  for (auto& e : edges())
    if (e.second != q) kept.push_back(std::move(e));
  // Keeps the former parent addressable when q was its only neighbour set.
  if (parent_[qi]) extra.push_back(ids_[*parent_[qi]]);
  return from_edges(std::move(kept), extra);
}

std::vector<std::size_t> Stemma::preorder() const {
  std::vector<std::size_t> order;
  std::vector<std::size_t> stack{root_};
  while (!stack.empty()) {
    const auto n = stack.back();
    stack.pop_back();
    order.push_back(n);
    if (order.size() > ids_.size()) break;
    const auto& ch = children_[n];
    for (auto it = ch.rbegin(); it != ch.rend(); ++it) stack.push_back(*it);
  }
  return order;
}

std::string Stemma::to_edge_list() const {
  std::string out;
  for (const auto& [p, c] : edges()) out += p + "\t" + c + "\n";
  return out;
}

std::string Stemma::to_newick() const {
  // Iterative post-order so deep path-shaped trees do not exhaust the stack.
  std::vector<std::string> text(ids_.size());
  std::vector<std::pair<std::size_t, bool>> stack{{root_, false}};
  while (!stack.empty()) {
    auto [n, expanded] = stack.back();
    stack.pop_back();
    if (!expanded) {
      stack.push_back({n, true});
      for (auto c : children_[n]) stack.push_back({c, false});
      continue;
    }
    std::string s;
    if (!children_[n].empty()) {
      s = "(";
      for (std::size_t k = 0; k < children_[n].size(); ++k) {
        if (k) s += ",";
        s += std::move(text[children_[n][k]]);
      }
      s += ")";
    }
    text[n] = s + newick_label(ids_[n]);
  }
  return text[root_] + ";\n";
}

Stemma load_stemma(std::string_view edge_list_text) {
  std::vector<Edge> edges;
  std::vector<std::string> extra;
  std::istringstream in{std::string(edge_list_text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto tab = t.find('\t');
    if (tab == std::string_view::npos) {
      extra.emplace_back(t);
      continue;
    }
    const auto parent = trim(t.substr(0, tab));
    const auto child = trim(t.substr(tab + 1));
    if (parent.empty() || child.empty() || child.find('\t') != std::string_view::npos)
      throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected parent<TAB>child");
    edges.emplace_back(std::string(parent), std::string(child));
  }
  return Stemma::from_edges(std::move(edges), extra);
}

DistanceMatrix::DistanceMatrix(const Stemma& stemma) : order_(stemma.nodes()) {
  const auto n = order_.size();
  if (n > std::numeric_limits<value_type>::max())
    throw Error(ErrorKind::BadParams, "distance matrix limited to 65535 nodes");
  for (std::size_t i = 0; i < n; ++i) index_.emplace(order_[i], i);

  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t i = 0; i < n; ++i)
    for (auto c : stemma.child_indices(i)) {
      adj[i].push_back(c);
      adj[c].push_back(i);
    }

  d_.assign(n * n, 0);
  std::vector<std::size_t> queue(n);
  std::vector<bool> seen(n);
  for (std::size_t src = 0; src < n; ++src) {
    std::fill(seen.begin(), seen.end(), false);
    value_type* row = &d_[src * n];
    std::size_t head = 0, tail = 0;
    queue[tail++] = src;
    seen[src] = true;
    while (head < tail) {
      const auto u = queue[head++];
      for (auto v : adj[u]) {
        if (seen[v]) continue;
        seen[v] = true;
        row[v] = static_cast<value_type>(row[u] + 1);
        queue[tail++] = v;
      }
    }
  }
}

std::size_t DistanceMatrix::index_of(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) throw Error(ErrorKind::UnknownNode, std::string(id));
  return it->second;
}

int DistanceMatrix::at(std::string_view a, std::string_view b) const {
  return at(index_of(a), index_of(b));
}

}  // namespace stemmaplace
