#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace biparse {

/// Maximum spanning arborescence rooted at node 0 (Chu-Liu/Edmonds).
///
/// `W` must form an ordered abelian group under `+`, `-` and `<`; the
/// reweighting and contraction steps use nothing else. `weights[h][d]` is
/// the weight of edge h->d, nullopt when the edge does not exist. Returns the
/// parent of every node (parent[0] == -1). When several incoming edges tie,
/// the lowest head index wins.
template <class W>
std::vector<int> max_arborescence(const std::vector<std::vector<std::optional<W>>>& weights) {
  const int n = static_cast<int>(weights.size());
  std::vector<int> parent(static_cast<std::size_t>(n), -1);
  if (n <= 1) return parent;
  auto at = [&](int h, int d) -> const std::optional<W>& {
    return weights[static_cast<std::size_t>(h)][static_cast<std::size_t>(d)];
  };

  for (int d = 1; d < n; ++d) {
    for (int h = 0; h < n; ++h) {
      if (h == d || !at(h, d)) continue;
      const int cur = parent[static_cast<std::size_t>(d)];
      if (cur < 0 || *at(cur, d) < *at(h, d)) parent[static_cast<std::size_t>(d)] = h;
    }
  }

  // Find one cycle among the greedy choices.
  std::vector<int> color(static_cast<std::size_t>(n), 0);
  std::vector<int> cycle;
  for (int s = 1; s < n && cycle.empty(); ++s) {
    int v = s;
    while (v > 0 && color[static_cast<std::size_t>(v)] == 0) {
      color[static_cast<std::size_t>(v)] = s;
      v = parent[static_cast<std::size_t>(v)];
    }
    if (v > 0 && color[static_cast<std::size_t>(v)] == s) {
      int u = v;
      do {
        cycle.push_back(u);
        u = parent[static_cast<std::size_t>(u)];
      } while (u != v);
    }
    if (v < 0) return parent;  // unreachable node; no arborescence exists
  }
  if (cycle.empty()) return parent;

  std::vector<bool> in_cycle(static_cast<std::size_t>(n), false);
  for (int v : cycle) in_cycle[static_cast<std::size_t>(v)] = true;

  // Contracted graph: surviving nodes keep their relative order, the cycle
  // becomes the last node.
  std::vector<int> new_id(static_cast<std::size_t>(n), -1);
  std::vector<int> old_id;
  for (int v = 0; v < n; ++v)
    if (!in_cycle[static_cast<std::size_t>(v)]) {
      new_id[static_cast<std::size_t>(v)] = static_cast<int>(old_id.size());
      old_id.push_back(v);
    }
  const int c = static_cast<int>(old_id.size());
  const int m = c + 1;

  std::vector<std::vector<std::optional<W>>> sub(static_cast<std::size_t>(m),
                                                std::vector<std::optional<W>>(static_cast<std::size_t>(m)));
  std::vector<int> enter_at(static_cast<std::size_t>(m), -1);  // cycle node entered from new id u
  std::vector<int> leave_from(static_cast<std::size_t>(m), -1);  // cycle node leaving to new id v

  for (int u = 0; u < n; ++u) {
    for (int v = 0; v < n; ++v) {
      if (u == v || !at(u, v)) continue;
      const bool cu = in_cycle[static_cast<std::size_t>(u)];
      const bool cv = in_cycle[static_cast<std::size_t>(v)];
      if (cu && cv) continue;
      if (!cu && !cv) {
        sub[static_cast<std::size_t>(new_id[static_cast<std::size_t>(u)])]
           [static_cast<std::size_t>(new_id[static_cast<std::size_t>(v)])] = at(u, v);
      } else if (!cu && cv) {
        const int nu = new_id[static_cast<std::size_t>(u)];
        W w = *at(u, v) - *at(parent[static_cast<std::size_t>(v)], v);
        auto& slot = sub[static_cast<std::size_t>(nu)][static_cast<std::size_t>(c)];
        if (!slot || *slot < w) {
          slot = std::move(w);
          enter_at[static_cast<std::size_t>(nu)] = v;
        }
      } else {
        const int nv = new_id[static_cast<std::size_t>(v)];
        auto& slot = sub[static_cast<std::size_t>(c)][static_cast<std::size_t>(nv)];
        if (!slot || *slot < *at(u, v)) {
          slot = at(u, v);
          leave_from[static_cast<std::size_t>(nv)] = u;
        }
      }
    }
  }

  const std::vector<int> sub_parent = max_arborescence(sub);

  for (int nv = 1; nv < c; ++nv) {
    const int v = old_id[static_cast<std::size_t>(nv)];
    const int np = sub_parent[static_cast<std::size_t>(nv)];
    parent[static_cast<std::size_t>(v)] =
        np == c ? leave_from[static_cast<std::size_t>(nv)] : old_id[static_cast<std::size_t>(np)];
  }
  const int enter_from = sub_parent[static_cast<std::size_t>(c)];
  if (enter_from >= 0) {
    const int v = enter_at[static_cast<std::size_t>(enter_from)];
    parent[static_cast<std::size_t>(v)] = old_id[static_cast<std::size_t>(enter_from)];
  }
  return parent;
}

}  // namespace biparse
