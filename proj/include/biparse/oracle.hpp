#pragma once

// Exhaustive reference implementations. They share nothing with the fast
// decoders beyond the data types and exist to check them.

#include <algorithm>
#include <deque>
#include <functional>
#include <stdexcept>
#include <vector>

#include "biparse/agreement.hpp"
#include "biparse/corpus.hpp"
#include "biparse/parser.hpp"

namespace biparse {

inline constexpr int kBruteForceMaxLength = 7;

/// Calls `visit(heads)` for every spanning arborescence over n tokens
/// (multiple root children allowed), in lexicographic order of the head array.
inline void for_each_arborescence(int n, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> heads(static_cast<std::size_t>(n), -1);
  // A partial assignment is extended only when it keeps every assigned chain
  // acyclic; chains through unassigned nodes are checked once they close.
  std::function<void(int)> rec = [&](int d) {
    if (d > n) {
      if (!arborescence_violation(heads)) visit(heads);
      return;
    }
    for (int h = 0; h <= n; ++h) {
      if (h == d) continue;
      bool cycle = false;
      for (int v = h, steps = 0; v != 0 && steps <= n; ++steps) {
        if (v == d) {
          cycle = true;
          break;
        }
        const int next = heads[static_cast<std::size_t>(v - 1)];
        if (next < 0) break;
        v = next;
      }
      if (cycle) continue;
      heads[static_cast<std::size_t>(d - 1)] = h;
      rec(d + 1);
      heads[static_cast<std::size_t>(d - 1)] = -1;
    }
  };
  rec(1);
}

/// Exhaustive decoder; same objective and tie-break as decode_mst.
inline DependencyTree brute_force_decode(const ScoreMatrix& scores) {
  const int n = scores.size();
  if (n > kBruteForceMaxLength)
    throw std::invalid_argument("brute_force_decode supports n <= " + std::to_string(kBruteForceMaxLength));
  std::vector<int> best;
  double best_score = 0.0;
  for_each_arborescence(n, [&](const std::vector<int>& heads) {
    double s = 0.0;
    for (int d = 1; d <= n; ++d) s += scores(heads[static_cast<std::size_t>(d - 1)], d);
    if (best.empty() || better_tree(s, heads, best_score, best)) {
      best = heads;
      best_score = s;
    }
  });
  return DependencyTree(best);
}

/// Exhaustive best simple path: every tuple of k-1 interior nodes in
/// lexicographic order, so the first maximum found wins ties.
inline ProjectedPath brute_force_path(const Edge& endpoints, int k, const std::function<double(int, int)>& scorer,
                                      int n) {
  const auto [from, to] = endpoints;
  if (k == 1) return {{from, to}, 0.0};
  std::vector<int> mid(static_cast<std::size_t>(k - 1), 1);
  ProjectedPath best;
  bool found = false;
  for (;;) {
    bool ok = true;
    for (std::size_t i = 0; i < mid.size() && ok; ++i) {
      if (mid[i] == from || mid[i] == to) ok = false;
      for (std::size_t j = 0; j < i && ok; ++j)
        if (mid[i] == mid[j]) ok = false;
    }
    if (ok) {
      std::vector<int> nodes{from};
      nodes.insert(nodes.end(), mid.begin(), mid.end());
      nodes.push_back(to);
      double s = 0.0;
      for (std::size_t i = 0; i + 1 < nodes.size(); ++i) s += scorer(nodes[i], nodes[i + 1]);
      if (!found || s > best.score) {
        found = true;
        best = {nodes, s};
      }
    }
    std::size_t pos = mid.size();
    while (pos > 0 && mid[pos - 1] == n) mid[--pos] = 1;
    if (pos == 0) break;
    ++mid[pos - 1];
  }
  if (!found) throw std::invalid_argument("no simple path of the requested length");
  return best;
}

/// Breadth-first search over the undirected tree edges, root included.
inline std::vector<int> bfs_tree_path(const DependencyTree& tree, int a, int b) {
  if (a == b) return {};
  const int n = tree.size();
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n + 1));
  for (const auto& [h, d] : tree.edges()) {
    adj[static_cast<std::size_t>(h)].push_back(d);
    adj[static_cast<std::size_t>(d)].push_back(h);
  }
  std::vector<int> prev(static_cast<std::size_t>(n + 1), -1);
  std::deque<int> queue{a};
  prev[static_cast<std::size_t>(a)] = a;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int w : adj[static_cast<std::size_t>(v)])
      if (prev[static_cast<std::size_t>(w)] < 0) {
        prev[static_cast<std::size_t>(w)] = v;
        queue.push_back(w);
      }
  }
  std::vector<int> path{b};
  while (path.back() != a) path.push_back(prev[static_cast<std::size_t>(path.back())]);
  std::reverse(path.begin(), path.end());
  return path;
}

struct JointOptimum {
  double value = 0.0;
  DependencyTree src_tree;
  DependencyTree tgt_tree;
  long pairs_scored = 0;
};

/// Exhaustive maximum of joint_objective over all tree pairs. Ties go to the
/// first pair in lexicographic (source, target) order.
inline JointOptimum brute_force_joint_max(const BitextPair& pair, const LanguageModels& src_models,
                                          const LanguageModels& tgt_models) {
  const int ns = pair.src.size(), nt = pair.tgt.size();
  if (ns > kBruteForceMaxLength || nt > kBruteForceMaxLength)
    throw std::invalid_argument("brute_force_joint_max supports sentences of at most " +
                                std::to_string(kBruteForceMaxLength) + " tokens");
  std::vector<DependencyTree> src_trees, tgt_trees;
  for_each_arborescence(ns, [&](const std::vector<int>& h) { src_trees.emplace_back(h); });
  for_each_arborescence(nt, [&](const std::vector<int>& h) { tgt_trees.emplace_back(h); });

  const ScoreMatrix ss = score_edges(src_models.parser, pair.src);
  const ScoreMatrix ts = score_edges(tgt_models.parser, pair.tgt);
  const ProjectionView s2t = ProjectionView::of(pair, Direction::SrcToTgt);
  const ProjectionView t2s = ProjectionView::of(pair, Direction::TgtToSrc);

  // cross_s[e][j]: projected score of source edge e (h * (ns+1) + d) in target tree j.
  auto cross = [](int n_from, const std::vector<DependencyTree>& onto, const ProjectionView& view,
                  const PathPredictorModel& model) {
    const auto stride = static_cast<std::size_t>(n_from + 1);
    std::vector<std::vector<double>> out(stride * stride);
    for (int h = 0; h <= n_from; ++h)
      for (int d = 1; d <= n_from; ++d) {
        if (h == d) continue;
        auto& row = out[static_cast<std::size_t>(h) * stride + static_cast<std::size_t>(d)];
        row.reserve(onto.size());
        for (const auto& t : onto) row.push_back(projected_path_score({h, d}, t, view, model));
      }
    return out;
  };
  const auto cross_s = cross(ns, tgt_trees, s2t, src_models.outgoing.path);
  const auto cross_t = cross(nt, src_trees, t2s, tgt_models.outgoing.path);

  JointOptimum best;
  bool have = false;
  for (std::size_t i = 0; i < src_trees.size(); ++i) {
    const auto& a = src_trees[i];
    const double sa = tree_score(ss, a);
    for (std::size_t j = 0; j < tgt_trees.size(); ++j) {
      const auto& b = tgt_trees[j];
      double v = sa + tree_score(ts, b);
      for (int d = 1; d <= ns; ++d)
        v += cross_s[static_cast<std::size_t>(a.head(d) * (ns + 1) + d)][j];
      for (int d = 1; d <= nt; ++d)
        v += cross_t[static_cast<std::size_t>(b.head(d) * (nt + 1) + d)][i];
      ++best.pairs_scored;
      if (!have || v > best.value) {
        have = true;
        best.value = v;
        best.src_tree = a;
        best.tgt_tree = b;
      }
    }
  }
  return best;
}

}  // namespace biparse
