#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biparse/corpus.hpp"
#include "biparse/features.hpp"

namespace biparse {

inline constexpr int kMaxPathLength = 5;

using Edge = std::pair<int, int>;  // (head, dependent) or an ordered node pair

/// Unique undirected simple path a..b in the tree, endpoints included.
/// The root 0 shows up only as an interior node. Empty when a == b.
inline std::vector<int> tree_path(const DependencyTree& tree, int a, int b) {
  const int n = tree.size();
  if (a < 0 || a > n || b < 0 || b > n) throw std::out_of_range("tree_path endpoint out of range");
  if (a == b) return {};
  auto chain = [&](int v) {
    std::vector<int> up{v};
    while (v != 0) {
      v = tree.head(v);
      up.push_back(v);
    }
    return up;  // v, head(v), ..., 0
  };
  const auto ua = chain(a), ub = chain(b);
  // Strip the shared suffix; the last shared node is the meeting point.
  std::size_t ia = ua.size(), ib = ub.size();
  while (ia > 0 && ib > 0 && ua[ia - 1] == ub[ib - 1]) {
    --ia;
    --ib;
  }
  std::vector<int> path(ua.begin(), ua.begin() + static_cast<std::ptrdiff_t>(ia + 1));
  for (std::size_t k = ib; k-- > 0;) path.push_back(ub[k]);
  return path;
}

/// The two sentences of a bitext pair oriented for one projection direction.
/// Holds pointers into the pair; the pair must outlive the view.
struct ProjectionView {
  const ParsedSentence* source = nullptr;
  const ParsedSentence* target = nullptr;
  Alignment alignment;  // (source index, target index)

  static ProjectionView of(const BitextPair& p, Direction dir) {
    if (dir == Direction::SrcToTgt) return {&p.src, &p.tgt, p.alignment};
    return {&p.tgt, &p.src, p.alignment.reversed()};
  }
};

/// Maps both endpoints through the alignment (smallest aligned index wins).
/// nullopt when an endpoint is unaligned or both land on the same node.
inline std::optional<Edge> project_endpoints(const Edge& edge, const Alignment& oriented) {
  const auto j = oriented.first_target(edge.first);
  const auto jp = oriented.first_target(edge.second);
  if (!j || !jp || *j == *jp) return std::nullopt;
  return Edge{*j, *jp};
}

inline std::optional<Edge> project_endpoints(const Edge& edge, const Alignment& alignment, Direction dir) {
  return dir == Direction::SrcToTgt ? project_endpoints(edge, alignment)
                                    : project_endpoints(edge, alignment.reversed());
}

/// Features of a source-side edge (i, i') together with a target-side pair
/// (j, j'): form and POS of each of the four nodes tagged by role, the two
/// POS-pair conjunctions and the target distance. Index 0 reads as the root.
inline FeatureVector four_node_features(const ProjectionView& view, const Edge& src_edge, const Edge& tgt_pair) {
  const ParsedSentence& s = *view.source;
  const ParsedSentence& t = *view.target;
  auto in = [](int i, int n) { return i >= 0 && i <= n; };
  if (!in(src_edge.first, s.size()) || !in(src_edge.second, s.size()) || !in(tgt_pair.first, t.size()) ||
      !in(tgt_pair.second, t.size()))
    throw std::out_of_range("four_node_features index out of range");
  const std::string sp0(s.pos(src_edge.first)), sp1(s.pos(src_edge.second));
  const std::string tp0(t.pos(tgt_pair.first)), tp1(t.pos(tgt_pair.second));
  FeatureVector f;
  f.add("s0w=" + std::string(s.form(src_edge.first)));
  f.add("s1w=" + std::string(s.form(src_edge.second)));
  f.add("t0w=" + std::string(t.form(tgt_pair.first)));
  f.add("t1w=" + std::string(t.form(tgt_pair.second)));
  f.add("s0p=" + sp0);
  f.add("s1p=" + sp1);
  f.add("t0p=" + tp0);
  f.add("t1p=" + tp1);
  f.add("sp=" + sp0 + "|" + sp1);
  f.add("tp=" + tp0 + "|" + tp1);
  f.add("tdist=" + abs_distance_bucket(tgt_pair.second - tgt_pair.first));
  return f;
}

inline FeatureVector four_node_features(const Edge& src_edge, const Edge& tgt_pair, const BitextPair& pair,
                                        Direction dir = Direction::SrcToTgt) {
  return four_node_features(ProjectionView::of(pair, dir), src_edge, tgt_pair);
}

// ---------------------------------------------------------------------------
// Models

/// One-vs-rest linear classifiers for path lengths 1..5.
struct PathLengthModel {
  std::array<WeightVector, kMaxPathLength> w;  // w[k-1]

  friend bool operator==(const PathLengthModel&, const PathLengthModel&) = default;
};

inline int predict_path_length(const PathLengthModel& m, const FeatureVector& f) {
  int best = 1;
  double best_score = m.w[0].dot(f);
  for (int k = 2; k <= kMaxPathLength; ++k) {
    const double s = m.w[static_cast<std::size_t>(k - 1)].dot(f);
    if (s > best_score) {
      best = k;
      best_score = s;
    }
  }
  return best;
}

/// Per-edge path scorers for path lengths 2..5.
struct PathPredictorModel {
  std::array<WeightVector, kMaxPathLength - 1> v;  // v[k-2]

  /// Scorer used for a path of length k. A direct edge (k = 1) has no
  /// structured model of its own and is scored with the length-2 weights.
  const WeightVector& for_length(int k) const {
    if (k < 1 || k > kMaxPathLength) throw std::out_of_range("path length " + std::to_string(k));
    return v[static_cast<std::size_t>(std::max(k, 2) - 2)];
  }

  friend bool operator==(const PathPredictorModel&, const PathPredictorModel&) = default;
};

/// Both classifiers for one projection direction.
struct ProjectionModels {
  PathLengthModel length;
  PathPredictorModel path;

  /// True when no classifier carries a single weight.
  bool empty() const {
    for (const auto& w : length.w)
      if (w.size() != 0) return false;
    for (const auto& v : path.v)
      if (v.size() != 0) return false;
    return true;
  }
};

/// Score of target-side edge (a, b) as part of the projected path of src_edge.
inline double path_edge_score(const PathPredictorModel& m, int k, const ProjectionView& view, const Edge& src_edge,
                              const Edge& tgt_edge) {
  return m.for_length(k).dot(four_node_features(view, src_edge, tgt_edge));
}

/// Sum of path_edge_score over consecutive node pairs of `path`.
inline double path_score(const PathPredictorModel& m, const ProjectionView& view, const Edge& src_edge,
                         std::span<const int> path) {
  if (path.size() < 2) return 0.0;
  const int k = static_cast<int>(path.size()) - 1;
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i) s += path_edge_score(m, k, view, src_edge, {path[i], path[i + 1]});
  return s;
}

// ---------------------------------------------------------------------------
// Path search

struct ProjectedPath {
  std::vector<int> nodes;  // a0 .. ak
  double score = 0.0;

  int length() const noexcept { return static_cast<int>(nodes.size()) - 1; }

  bool uses(int a, int b) const {
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
      if ((nodes[i] == a && nodes[i + 1] == b) || (nodes[i] == b && nodes[i + 1] == a)) return true;
    return false;
  }
};

/// Best simple path with exactly k edges from endpoints.first to
/// endpoints.second in the complete undirected graph on 1..n. Ties go to the
/// lexicographically smallest interior sequence. k = 1 returns the direct
/// edge without calling the scorer.
inline ProjectedPath best_path(const Edge& endpoints, int k, const std::function<double(int, int)>& edge_scorer,
                               int n) {
  const auto [from, to] = endpoints;
  if (from < 1 || from > n || to < 1 || to > n) throw std::out_of_range("best_path endpoint out of range");
  if (from == to) throw std::invalid_argument("best_path needs distinct endpoints");
  if (k < 1) throw std::invalid_argument("best_path needs k >= 1");
  if (k > n - 1)
    throw std::invalid_argument("no simple path with " + std::to_string(k) + " edges among " + std::to_string(n) +
                                " nodes");
  if (k == 1) return {{from, to}, 0.0};

  const auto stride = static_cast<std::size_t>(n + 1);
  std::vector<double> s(stride * stride, 0.0);
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= n; ++b)
      if (a != b) s[static_cast<std::size_t>(a) * stride + static_cast<std::size_t>(b)] = edge_scorer(a, b);
  auto sc = [&](int a, int b) { return s[static_cast<std::size_t>(a) * stride + static_cast<std::size_t>(b)]; };

  std::vector<int> cur{from};
  std::vector<bool> used(stride, false);
  used[static_cast<std::size_t>(from)] = used[static_cast<std::size_t>(to)] = true;
  ProjectedPath best;
  bool found = false;
  // Interior nodes are tried in ascending order, so the first path reaching a
  // score is the lexicographically smallest one with that score.
  std::function<void(double)> extend = [&](double acc) {
    if (static_cast<int>(cur.size()) == k) {
      const double total = acc + sc(cur.back(), to);
      if (!found || total > best.score) {
        found = true;
        best.nodes = cur;
        best.nodes.push_back(to);
        best.score = total;
      }
      return;
    }
    for (int v = 1; v <= n; ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      used[static_cast<std::size_t>(v)] = true;
      const double next = acc + sc(cur.back(), v);
      cur.push_back(v);
      extend(next);
      cur.pop_back();
      used[static_cast<std::size_t>(v)] = false;
    }
  };
  extend(0.0);
  return best;
}

// ---------------------------------------------------------------------------
// Training data

struct LengthInstance {
  FeatureVector features;
  int length = 1;
};

/// A gold projected path of length >= 2. `view` points into the corpus the
/// instance was extracted from.
struct PathInstance {
  ProjectionView view;
  Edge src_edge;
  std::vector<int> gold_path;
};

struct ProjectionSkips {
  long root_edges = 0;     // source edge hangs off the root
  long unprojectable = 0;  // unaligned or degenerate endpoints
  long too_long = 0;       // target path longer than kMaxPathLength
  long through_root = 0;   // path instance skipped: gold path crosses the root
};

struct ProjectionTrainingSet {
  std::vector<LengthInstance> lengths;
  std::vector<PathInstance> paths;
  ProjectionSkips skips;
};

/// Walks every source-tree edge of every pair and reads off its projected path
/// in the target tree. Both trees must be present.
inline ProjectionTrainingSet extract_projection_training(std::span<const BitextPair> corpus, Direction dir) {
  ProjectionTrainingSet out;
  for (const BitextPair& p : corpus) {
    const auto& src_tree = dir == Direction::SrcToTgt ? p.src_tree : p.tgt_tree;
    const auto& tgt_tree = dir == Direction::SrcToTgt ? p.tgt_tree : p.src_tree;
    if (!src_tree || !tgt_tree) throw std::invalid_argument("projection training needs both trees");
    const ProjectionView view = ProjectionView::of(p, dir);
    for (const auto& [h, d] : src_tree->edges()) {
      if (h == 0) {
        ++out.skips.root_edges;
        continue;
      }
      const auto ends = project_endpoints({h, d}, view.alignment);
      if (!ends) {
        ++out.skips.unprojectable;
        continue;
      }
      const auto path = tree_path(*tgt_tree, ends->first, ends->second);
      const int len = static_cast<int>(path.size()) - 1;
      if (len > kMaxPathLength) {
        ++out.skips.too_long;
        continue;
      }
      out.lengths.push_back({four_node_features(view, {h, d}, *ends), len});
      if (len < 2) continue;
      if (std::find(path.begin(), path.end(), 0) != path.end()) {
        ++out.skips.through_root;
        continue;
      }
      out.paths.push_back({view, {h, d}, path});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Training

struct ClassifierTrainStats {
  long instances = 0;
  long updates = 0;  // instances on which at least one weight changed, summed over epochs
};

/// One-vs-rest averaged perceptrons, instances visited in input order.
inline PathLengthModel train_path_length(std::span<const LengthInstance> instances, int epochs,
                                         std::uint64_t seed = 0, ClassifierTrainStats* stats = nullptr) {
  (void)seed;  // order is fixed; the seed only documents the run
  if (instances.empty()) throw std::invalid_argument("no path-length instances to train on");
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  for (const auto& in : instances)
    if (in.length < 1 || in.length > kMaxPathLength)
      throw std::invalid_argument("path-length label " + std::to_string(in.length) + " outside 1..5");
  PathLengthModel model;
  if (epochs == 0) {
    if (stats) *stats = ClassifierTrainStats{static_cast<long>(instances.size()), 0};
    return model;
  }

  FeatureInterner names;
  std::vector<FeatureInterner::Sparse> feats;
  feats.reserve(instances.size());
  for (const auto& in : instances) feats.push_back(names.intern(in.features));

  std::array<DenseAveragedWeights, kMaxPathLength> w;
  ClassifierTrainStats st;
  st.instances = static_cast<long>(instances.size());
  for (int e = 0; e < epochs; ++e) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      bool changed = false;
      for (int k = 1; k <= kMaxPathLength; ++k) {
        auto& wk = w[static_cast<std::size_t>(k - 1)];
        const double y = instances[i].length == k ? 1.0 : -1.0;
        if (y * wk.dot(feats[i]) <= 0.0) {
          wk.update(feats[i], y);
          changed = true;
        }
      }
      if (changed) ++st.updates;
      for (auto& wk : w) wk.tick();
    }
  }
  for (int k = 0; k < kMaxPathLength; ++k) model.w[static_cast<std::size_t>(k)] = w[static_cast<std::size_t>(k)].averaged(names);
  if (stats) *stats = st;
  return model;
}

/// Structured averaged perceptrons, one per gold path length 2..5.
inline PathPredictorModel train_path_predictor(std::span<const PathInstance> instances, int epochs,
                                               std::uint64_t seed = 0, ClassifierTrainStats* stats = nullptr) {
  (void)seed;
  if (epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  for (const auto& in : instances) {
    const int len = static_cast<int>(in.gold_path.size()) - 1;
    if (len < 2 || len > kMaxPathLength)
      throw std::invalid_argument("gold path length " + std::to_string(len) + " outside 2..5");
  }
  PathPredictorModel model;
  ClassifierTrainStats st;
  st.instances = static_cast<long>(instances.size());
  if (epochs == 0 || instances.empty()) {
    if (stats) *stats = st;
    return model;
  }

  FeatureInterner names;
  // table[i][a * (n+1) + b]: interned features of target edge (a, b) for instance i
  std::vector<std::vector<FeatureInterner::Sparse>> table;
  table.reserve(instances.size());
  for (const auto& in : instances) {
    const int n = in.view.target->size();
    std::vector<FeatureInterner::Sparse> t(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b)
        if (a != b) t[static_cast<std::size_t>(a * (n + 1) + b)] = names.intern(four_node_features(in.view, in.src_edge, {a, b}));
    table.push_back(std::move(t));
  }

  std::array<DenseAveragedWeights, kMaxPathLength - 1> v;
  for (int e = 0; e < epochs; ++e) {
    for (std::size_t i = 0; i < instances.size(); ++i) {
      const auto& in = instances[i];
      const int n = in.view.target->size();
      const int k = static_cast<int>(in.gold_path.size()) - 1;
      auto& vk = v[static_cast<std::size_t>(k - 2)];
      const auto& t = table[i];
      auto feat = [&](int a, int b) -> const FeatureInterner::Sparse& {
        return t[static_cast<std::size_t>(a * (n + 1) + b)];
      };
      const ProjectedPath pred =
          best_path({in.gold_path.front(), in.gold_path.back()}, k, [&](int a, int b) { return vk.dot(feat(a, b)); }, n);
      if (pred.nodes != in.gold_path) {
        for (std::size_t m = 0; m + 1 < in.gold_path.size(); ++m) vk.update(feat(in.gold_path[m], in.gold_path[m + 1]), 1.0);
        for (std::size_t m = 0; m + 1 < pred.nodes.size(); ++m) vk.update(feat(pred.nodes[m], pred.nodes[m + 1]), -1.0);
        ++st.updates;
      }
      for (auto& vv : v) vv.tick();
    }
  }
  for (int k = 0; k < kMaxPathLength - 1; ++k) model.v[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)].averaged(names);
  if (stats) *stats = st;
  return model;
}

// ---------------------------------------------------------------------------
// Model files

inline std::string write_path_length_model(const PathLengthModel& m) {
  std::ostringstream os;
  os << "biparse-pathlen v1\n";
  for (int k = 1; k <= kMaxPathLength; ++k)
    write_weight_lines(os, m.w[static_cast<std::size_t>(k - 1)], "k" + std::to_string(k) + ":");
  return os.str();
}

inline PathLengthModel read_path_length_model(std::string_view text) {
  const WeightFile wf = read_weight_file(text);
  if (wf.header != "biparse-pathlen v1") throw ParseError(1, "bad path-length model header '" + wf.header + "'");
  PathLengthModel m;
  std::size_t line = 1;
  for (const auto& [name, value] : wf.entries) {
    ++line;
    const auto colon = name.find(':');
    const auto k = colon == std::string::npos || name[0] != 'k' ? std::nullopt
                                                                 : detail::to_int(std::string_view(name).substr(1, colon - 1));
    if (!k || *k < 1 || *k > kMaxPathLength) throw ParseError(line, "expected k<1..5>:feature, got '" + name + "'");
    m.w[static_cast<std::size_t>(*k - 1)].set(name.substr(colon + 1), value);
  }
  return m;
}

inline std::string write_path_predictor_weights(const PathPredictorModel& m, int k) {
  if (k < 2 || k > kMaxPathLength) throw std::out_of_range("path predictor length " + std::to_string(k));
  std::ostringstream os;
  os << "biparse-pathpred v1 k=" << k << '\n';
  write_weight_lines(os, m.v[static_cast<std::size_t>(k - 2)]);
  return os.str();
}

/// Reads one per-length file into `m`; returns the length it held.
inline int read_path_predictor_weights(std::string_view text, PathPredictorModel& m) {
  const WeightFile wf = read_weight_file(text);
  const std::string prefix = "biparse-pathpred v1 k=";
  const auto k = wf.header.rfind(prefix, 0) == 0 ? detail::to_int(std::string_view(wf.header).substr(prefix.size()))
                                                 : std::nullopt;
  if (!k || *k < 2 || *k > kMaxPathLength) throw ParseError(1, "bad path predictor header '" + wf.header + "'");
  WeightVector w;
  for (const auto& [name, value] : wf.entries) w.set(name, value);
  m.v[static_cast<std::size_t>(*k - 2)] = std::move(w);
  return *k;
}

}  // namespace biparse
