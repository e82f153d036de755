#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biparse/corpus.hpp"
#include "biparse/parser.hpp"
#include "biparse/projection.hpp"

namespace biparse {

enum class StepSchedule { Constant, Harmonic };
enum class ConvergenceMode { Either, Both };

struct AgreementConfig {
  int outer_iters = 30;
  int inner_iters = 100;
  double alpha0 = 0.1;
  StepSchedule schedule = StepSchedule::Constant;
  ConvergenceMode convergence = ConvergenceMode::Either;
  std::uint64_t seed = 0;

  void validate() const {
    if (outer_iters < 1) throw std::invalid_argument("outer_iters must be >= 1");
    if (inner_iters < 1) throw std::invalid_argument("inner_iters must be >= 1");
    if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw std::invalid_argument("alpha0 must be a positive number");
  }

  /// Step size for subgradient iteration t (1-based).
  double step(int t) const { return schedule == StepSchedule::Constant ? alpha0 : alpha0 / static_cast<double>(t); }
};

/// Everything trained for one language: its parser and the classifiers that
/// project its edges onto the other language.
struct LanguageModels {
  EdgeFactoredModel parser;
  ProjectionModels outgoing;
};

inline Direction opposite(Direction d) {
  return d == Direction::SrcToTgt ? Direction::TgtToSrc : Direction::SrcToTgt;
}

/// Score of the path that edge `edge` of the "from" sentence projects to in
/// `onto_tree`; 0 when it cannot be projected, starts at the root, or
/// projects to more than kMaxPathLength edges.
inline double projected_path_score(const Edge& edge, const DependencyTree& onto_tree, const ProjectionView& view,
                                   const PathPredictorModel& model) {
  if (edge.first == 0) return 0.0;
  const auto ends = project_endpoints(edge, view.alignment);
  if (!ends) return 0.0;
  const auto path = tree_path(onto_tree, ends->first, ends->second);
  if (static_cast<int>(path.size()) - 1 > kMaxPathLength) return 0.0;
  return path_score(model, view, edge, path);
}

/// r(i, j): score of the path that candidate edge head -> dep of the sentence
/// being decoded projects to in the fixed tree. `view` runs from the decoded
/// sentence to the fixed one; `model` is the decoded language's path scorer.
inline double r_score(const Edge& candidate, const DependencyTree& fixed_tree, const ProjectionView& view,
                      const PathPredictorModel& model) {
  return projected_path_score(candidate, fixed_tree, view, model);
}

inline ScoreMatrix r_matrix(const DependencyTree& fixed_tree, const ProjectionView& view,
                            const PathPredictorModel& model) {
  const int n = view.source->size();
  ScoreMatrix r(n);
  for (int h = 0; h <= n; ++h)
    for (int d = 1; d <= n; ++d)
      if (h != d) r.at(h, d) = r_score({h, d}, fixed_tree, view, model);
  return r;
}

/// Lagrange multipliers u_t(a, b), one dense table per constrained source
/// edge t, read and written on the unordered pair {a, b}. Every entry stays
/// <= 0 (the coupling is "path edge implies tree edge").
class DualState {
 public:
  DualState() = default;
  DualState(std::size_t constraints, int n)
      : n_(n), u_(constraints, std::vector<double>(static_cast<std::size_t>((n + 1) * (n + 1)), 0.0)) {}

  double get(std::size_t t, int a, int b) const { return u_[t][slot(a, b)]; }
  void set(std::size_t t, int a, int b, double v) { u_[t][slot(a, b)] = v; }

  /// Sum over t of u_t(a, b).
  double total(int a, int b) const {
    double s = 0.0;
    for (const auto& ut : u_) s += ut[slot(a, b)];
    return s;
  }

  bool all_zero() const {
    for (const auto& ut : u_)
      for (double v : ut)
        if (v != 0.0) return false;
    return true;
  }

  std::size_t constraints() const noexcept { return u_.size(); }
  double alpha = 0.0;
  int iteration = 0;

 private:
  std::size_t slot(int a, int b) const {
    const int lo = std::min(a, b), hi = std::max(a, b);
    return static_cast<std::size_t>(lo * (n_ + 1) + hi);
  }

  int n_ = 0;
  std::vector<std::vector<double>> u_;
};

/// One source edge whose projected path the decoded tree must contain.
struct PathConstraint {
  Edge src_edge;
  Edge endpoints;  // projected onto the decoded sentence
  int length = 1;  // predicted, clamped to n - 1
  std::vector<double> phi;  // phi[a * (n+1) + b]
};

struct InnerRecord {
  int iteration = 0;
  double dual_value = 0.0;
  int disagreements = 0;
  bool tree_changed = false;
};

struct ProjectResult {
  DependencyTree tree;
  bool converged = false;
  int iterations = 0;
  std::vector<InnerRecord> log;
  DualState duals;
  std::vector<PathConstraint> constraints;
  std::vector<ProjectedPath> paths;  // last pi_t, aligned with constraints
};

/// Number of (constraint, path edge) pairs whose edge is missing from `tree`.
inline int count_disagreements(const DependencyTree& tree, const std::vector<ProjectedPath>& paths) {
  int out = 0;
  for (const auto& p : paths)
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i)
      if (!tree.connects(p.nodes[i], p.nodes[i + 1])) ++out;
  return out;
}

/// Projected paths pi_t under multipliers `u`; path scores include u.
inline std::vector<ProjectedPath> best_paths(const std::vector<PathConstraint>& cons, const DualState& u, int n) {
  std::vector<ProjectedPath> out;
  out.reserve(cons.size());
  const auto stride = static_cast<std::size_t>(n + 1);
  for (std::size_t t = 0; t < cons.size(); ++t) {
    const auto& c = cons[t];
    auto scorer = [&](int a, int b) {
      return c.phi[static_cast<std::size_t>(a) * stride + static_cast<std::size_t>(b)] + u.get(t, a, b);
    };
    ProjectedPath p = best_path(c.endpoints, c.length, scorer, n);
    p.score = 0.0;
    for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) p.score += scorer(p.nodes[i], p.nodes[i + 1]);
    out.push_back(std::move(p));
  }
  return out;
}

/// Decodes the sentence on the `dir` target side so that it agrees with
/// `fixed_tree` on the source side, by subgradient descent on the multipliers
/// coupling tree edges with projected paths.
///
/// `fixed_models` belongs to the language of `fixed_tree`; `free_models` to
/// the language being decoded.
inline ProjectResult project(const DependencyTree& fixed_tree, const BitextPair& pair, Direction dir,
                             const LanguageModels& fixed_models, const LanguageModels& free_models,
                             const AgreementConfig& cfg) {
  cfg.validate();
  const ProjectionView down = ProjectionView::of(pair, dir);           // fixed -> free
  const ProjectionView up = ProjectionView::of(pair, opposite(dir));   // free -> fixed
  const ParsedSentence& free_sent = *down.target;
  const int n = free_sent.size();
  if (fixed_tree.size() != down.source->size()) throw std::invalid_argument("fixed tree does not match its sentence");

  ScoreMatrix base = score_edges(free_models.parser, free_sent);
  base += r_matrix(fixed_tree, up, free_models.outgoing.path);

  ProjectResult res;
  const auto stride = static_cast<std::size_t>(n + 1);
  // An untrained direction has nothing to agree with.
  const bool constrained = !fixed_models.outgoing.empty();
  for (const auto& [h, d] : fixed_tree.edges()) {
    if (h == 0 || !constrained) continue;
    const auto ends = project_endpoints({h, d}, down.alignment);
    if (!ends) continue;
    PathConstraint c;
    c.src_edge = {h, d};
    c.endpoints = *ends;
    c.length = std::min(predict_path_length(fixed_models.outgoing.length, four_node_features(down, {h, d}, *ends)), n - 1);
    c.phi.assign(stride * stride, 0.0);
    const WeightVector& v = fixed_models.outgoing.path.for_length(c.length);
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b)
        if (a != b) c.phi[static_cast<std::size_t>(a) * stride + static_cast<std::size_t>(b)] = v.dot(four_node_features(down, {h, d}, {a, b}));
    res.constraints.push_back(std::move(c));
  }

  DualState u(res.constraints.size(), n);
  std::optional<DependencyTree> prev;
  for (int it = 1; it <= cfg.inner_iters; ++it) {
    ScoreMatrix m = base;
    for (int h = 0; h <= n; ++h)
      for (int d = 1; d <= n; ++d)
        if (h != d) m.at(h, d) -= u.total(h, d);
    DependencyTree y = decode_mst(m);
    auto paths = best_paths(res.constraints, u, n);

    InnerRecord rec;
    rec.iteration = it;
    rec.dual_value = tree_score(m, y);
    for (const auto& p : paths) rec.dual_value += p.score;
    rec.disagreements = count_disagreements(y, paths);
    rec.tree_changed = prev && !(*prev == y);
    res.log.push_back(rec);
    res.iterations = it;
    u.iteration = it;

    if (rec.disagreements == 0) {
      res.tree = std::move(y);
      res.converged = true;
      res.paths = std::move(paths);
      res.duals = std::move(u);
      return res;
    }

    const double alpha = cfg.step(it);
    u.alpha = alpha;
    for (std::size_t t = 0; t < paths.size(); ++t) {
      const auto& p = paths[t];
      auto update = [&](int a, int b) {
        const double pi = p.uses(a, b) ? 1.0 : 0.0;
        const double yy = y.connects(a, b) ? 1.0 : 0.0;
        if (pi == yy) return;
        u.set(t, a, b, std::min(0.0, u.get(t, a, b) - alpha * (pi - yy)));
      };
      for (std::size_t i = 0; i + 1 < p.nodes.size(); ++i) update(p.nodes[i], p.nodes[i + 1]);
      for (const auto& [h, d] : y.edges())
        if (h != 0 && !p.uses(h, d)) update(h, d);
    }
    prev = y;
    res.tree = std::move(y);
    res.paths = std::move(paths);
  }
  res.duals = std::move(u);
  return res;
}

// ---------------------------------------------------------------------------
// Coordinate descent

struct OuterRecord {
  int iteration = 0;
  DependencyTree src_tree;  // T_src+ after this round
  DependencyTree tgt_tree;  // T_tgt+ after this round
  bool src_changed = false;
  bool tgt_changed = false;
  ProjectResult src_projection;  // decoding src given tgt tree
  ProjectResult tgt_projection;
};

struct AgreementResult {
  DependencyTree baseline_src;
  DependencyTree baseline_tgt;
  DependencyTree src_tree;
  DependencyTree tgt_tree;
  bool src_converged = false;  // last inner loop reached agreement
  bool tgt_converged = false;
  bool stopped = false;  // outer stopping test fired before the budget ran out
  int outer_iterations = 0;
  std::vector<OuterRecord> rounds;
};

/// Alternately re-decodes each side against the other's current tree. The
/// final trees are the most recent projections of both sides.
inline AgreementResult coordinate_descent(const BitextPair& pair, const LanguageModels& src_models,
                                          const LanguageModels& tgt_models, const AgreementConfig& cfg) {
  cfg.validate();
  pair.alignment.check_bounds(pair.src.size(), pair.tgt.size());
  AgreementResult res;
  res.baseline_src = parse(src_models.parser, pair.src);
  res.baseline_tgt = parse(tgt_models.parser, pair.tgt);
  DependencyTree src = res.baseline_src, tgt = res.baseline_tgt;

  for (int t = 1; t <= cfg.outer_iters; ++t) {
    OuterRecord rec;
    rec.iteration = t;
    rec.src_projection = project(tgt, pair, Direction::TgtToSrc, tgt_models, src_models, cfg);
    rec.tgt_projection = project(src, pair, Direction::SrcToTgt, src_models, tgt_models, cfg);
    rec.src_tree = rec.src_projection.tree;
    rec.tgt_tree = rec.tgt_projection.tree;
    rec.src_changed = !(rec.src_tree == src);
    rec.tgt_changed = !(rec.tgt_tree == tgt);
    res.outer_iterations = t;
    res.src_tree = rec.src_tree;
    res.tgt_tree = rec.tgt_tree;
    res.src_converged = rec.src_projection.converged;
    res.tgt_converged = rec.tgt_projection.converged;
    const bool stop = cfg.convergence == ConvergenceMode::Either ? (!rec.src_changed || !rec.tgt_changed)
                                                                 : (!rec.src_changed && !rec.tgt_changed);
    src = rec.src_tree;
    tgt = rec.tgt_tree;
    res.rounds.push_back(std::move(rec));
    if (stop) {
      res.stopped = true;
      break;
    }
  }
  return res;
}

/// Joint score of a tree pair: both parser scores plus the scores of every
/// edge's projected path in the other tree, in both directions.
inline double joint_objective(const DependencyTree& src_tree, const DependencyTree& tgt_tree, const BitextPair& pair,
                              const LanguageModels& src_models, const LanguageModels& tgt_models) {
  double total = tree_score(score_edges(src_models.parser, pair.src), src_tree) +
                 tree_score(score_edges(tgt_models.parser, pair.tgt), tgt_tree);
  const ProjectionView s2t = ProjectionView::of(pair, Direction::SrcToTgt);
  const ProjectionView t2s = ProjectionView::of(pair, Direction::TgtToSrc);
  for (const auto& e : src_tree.edges()) total += projected_path_score(e, tgt_tree, s2t, src_models.outgoing.path);
  for (const auto& e : tgt_tree.edges()) total += projected_path_score(e, src_tree, t2s, tgt_models.outgoing.path);
  return total;
}

}  // namespace biparse
