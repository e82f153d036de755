#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "biparse/arborescence.hpp"
#include "biparse/corpus.hpp"
#include "biparse/features.hpp"

namespace biparse {

inline constexpr std::string_view kEdgeTemplates = "edge-v1";

/// Edge scores s(h, d) for h in 0..n, d in 1..n. Self-loops and edges into
/// the root hold -infinity.
class ScoreMatrix {
 public:
  ScoreMatrix() = default;

  explicit ScoreMatrix(int n, double fill = 0.0)
      : n_(n), s_(static_cast<std::size_t>(n + 1) * static_cast<std::size_t>(n + 1), fill) {
    if (n < 1) throw std::invalid_argument("score matrix needs n >= 1");
    for (int i = 0; i <= n; ++i) at(i, i) = -std::numeric_limits<double>::infinity();
    for (int h = 1; h <= n; ++h) at(h, 0) = -std::numeric_limits<double>::infinity();
  }

  int size() const noexcept { return n_; }

  double operator()(int h, int d) const { return s_[index(h, d)]; }
  double& at(int h, int d) { return s_[index(h, d)]; }

  ScoreMatrix& operator+=(const ScoreMatrix& o) {
    if (o.n_ != n_) throw std::invalid_argument("score matrix size mismatch");
    for (int h = 0; h <= n_; ++h)
      for (int d = 1; d <= n_; ++d)
        if (h != d) at(h, d) += o(h, d);
    return *this;
  }

 private:
  std::size_t index(int h, int d) const {
    if (h < 0 || h > n_ || d < 0 || d > n_) throw std::out_of_range("score matrix index");
    return static_cast<std::size_t>(h) * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(d);
  }

  int n_ = 0;
  std::vector<double> s_;
};

/// Sum of s(h, d) over the tree's edges, accumulated in dependent order.
inline double tree_score(const ScoreMatrix& s, const DependencyTree& t) {
  double total = 0.0;
  for (int d = 1; d <= t.size(); ++d) total += s(t.head(d), d);
  return total;
}

/// Strict "better than" used by every decoder: higher score, then the
/// lexicographically smaller head array.
inline bool better_tree(double score_a, std::span<const int> heads_a, double score_b, std::span<const int> heads_b) {
  if (score_a != score_b) return score_a > score_b;
  return std::lexicographical_compare(heads_a.begin(), heads_a.end(), heads_b.begin(), heads_b.end());
}

namespace detail {

/// Score paired with a sparse lexicographic key. Edge h->d carries key
/// component -h at coordinate d; summing along a tree gives minus its head
/// array, so the group order prefers the lexicographically smallest heads
/// among equal scores.
struct TieBrokenScore {
  double score = 0.0;
  std::vector<std::pair<int, std::int64_t>> key;  // sorted by coordinate, no zeros

  static TieBrokenScore edge(double s, int h, int d) {
    TieBrokenScore out{s, {}};
    if (h != 0) out.key.emplace_back(d, -static_cast<std::int64_t>(h));
    return out;
  }

  friend TieBrokenScore combine(const TieBrokenScore& a, const TieBrokenScore& b, double sign) {
    TieBrokenScore out;
    out.score = sign > 0 ? a.score + b.score : a.score - b.score;
    std::size_t i = 0, j = 0;
    while (i < a.key.size() || j < b.key.size()) {
      if (j == b.key.size() || (i < a.key.size() && a.key[i].first < b.key[j].first)) {
        out.key.push_back(a.key[i++]);
      } else if (i == a.key.size() || b.key[j].first < a.key[i].first) {
        out.key.emplace_back(b.key[j].first, sign > 0 ? b.key[j].second : -b.key[j].second);
        ++j;
      } else {
        const std::int64_t v = sign > 0 ? a.key[i].second + b.key[j].second : a.key[i].second - b.key[j].second;
        if (v != 0) out.key.emplace_back(a.key[i].first, v);
        ++i;
        ++j;
      }
    }
    return out;
  }

  friend TieBrokenScore operator+(const TieBrokenScore& a, const TieBrokenScore& b) { return combine(a, b, 1.0); }
  friend TieBrokenScore operator-(const TieBrokenScore& a, const TieBrokenScore& b) { return combine(a, b, -1.0); }

  friend bool operator<(const TieBrokenScore& a, const TieBrokenScore& b) {
    if (a.score != b.score) return a.score < b.score;
    // First coordinate where the dense keys differ decides.
    std::size_t i = 0, j = 0;
    while (i < a.key.size() || j < b.key.size()) {
      if (j == b.key.size() || (i < a.key.size() && a.key[i].first < b.key[j].first)) return a.key[i].second < 0;
      if (i == a.key.size() || b.key[j].first < a.key[i].first) return b.key[j].second > 0;
      if (a.key[i].second != b.key[j].second) return a.key[i].second < b.key[j].second;
      ++i;
      ++j;
    }
    return false;
  }
};

}  // namespace detail

/// Highest-scoring spanning arborescence rooted at 0. Ties go to the
/// lexicographically smallest head array.
inline DependencyTree decode_mst(const ScoreMatrix& scores) {
  const int n = scores.size();
  using W = detail::TieBrokenScore;
  std::vector<std::vector<std::optional<W>>> g(static_cast<std::size_t>(n + 1),
                                               std::vector<std::optional<W>>(static_cast<std::size_t>(n + 1)));
  for (int h = 0; h <= n; ++h)
    for (int d = 1; d <= n; ++d)
      if (h != d) g[static_cast<std::size_t>(h)][static_cast<std::size_t>(d)] = W::edge(scores(h, d), h, d);
  const auto parent = max_arborescence(g);
  return DependencyTree(std::vector<int>(parent.begin() + 1, parent.end()));
}

// ---------------------------------------------------------------------------
// Features and model

/// First-order edge features for head -> dep. Head 0 is the root.
inline FeatureVector extract_edge_features(const ParsedSentence& s, int head, int dep) {
  const int n = s.size();
  if (head < 0 || head > n || dep < 1 || dep > n || head == dep)
    throw std::out_of_range("edge " + std::to_string(head) + "->" + std::to_string(dep) + " invalid for n=" +
                            std::to_string(n));
  const std::string dw(s.form(dep));
  const std::string dp(s.pos(dep));
  FeatureVector f;
  f.add("dw=" + dw);
  f.add("dp=" + dp);
  if (head == 0) {
    f.add("root");
    f.add("root_dp=" + dp);
    return f;
  }
  const std::string hw(s.form(head));
  const std::string hp(s.pos(head));
  f.add("hw=" + hw);
  f.add("hp=" + hp);
  f.add("hp_dp=" + hp + "|" + dp);
  f.add("hw_dw=" + hw + "|" + dw);
  f.add("dist=" + distance_bucket(dep - head));
  f.add(dep > head ? "dir=R" : "dir=L");
  const int lo = std::min(head, dep), hi = std::max(head, dep);
  if (hi - lo > 1) f.add("btw=" + std::string(s.pos(lo + 1)) + "|" + std::string(s.pos(hi - 1)));
  return f;
}

struct EdgeFactoredModel {
  std::string lang;
  WeightVector weights;
  std::string templates{kEdgeTemplates};
};

inline ScoreMatrix score_edges(const EdgeFactoredModel& model, const ParsedSentence& s) {
  if (!model.lang.empty() && !s.lang().empty() && model.lang != s.lang())
    throw std::invalid_argument("model language '" + model.lang + "' does not match sentence language '" + s.lang() +
                                "'");
  const int n = s.size();
  ScoreMatrix m(n);
  for (int h = 0; h <= n; ++h)
    for (int d = 1; d <= n; ++d)
      if (h != d) m.at(h, d) = model.weights.dot(extract_edge_features(s, h, d));
  return m;
}

inline DependencyTree parse(const EdgeFactoredModel& model, const ParsedSentence& s) {
  return decode_mst(score_edges(model, s));
}

/// Sum of edge features over all edges of the tree.
inline FeatureVector tree_features(const ParsedSentence& s, const DependencyTree& t) {
  FeatureVector f;
  for (const auto& [h, d] : t.edges()) f.add(extract_edge_features(s, h, d));
  return f;
}

// ---------------------------------------------------------------------------
// Training

struct ParserEpochStats {
  int epoch = 0;
  long tokens = 0;
  long correct = 0;  // heads right before the update, with the running weights
  long updates = 0;
};

struct ParserTrainOptions {
  int epochs = 10;
  std::uint64_t seed = 0;  // kept for interface stability; sentence order is the input order
  std::string lang;        // empty: taken from the first sentence
  std::function<void(const ParserEpochStats&)> on_epoch;
};

/// Structured averaged perceptron over the first-order features.
inline EdgeFactoredModel train_parser(std::span<const std::pair<ParsedSentence, DependencyTree>> treebank,
                                      const ParserTrainOptions& opts) {
  if (opts.epochs < 0) throw std::invalid_argument("epochs must be >= 0");
  EdgeFactoredModel model;
  model.lang = !opts.lang.empty() ? opts.lang : (treebank.empty() ? std::string{} : treebank.front().first.lang());
  for (const auto& [s, t] : treebank)
    if (t.size() != s.size()) throw std::invalid_argument("tree/sentence length mismatch in treebank");
  if (opts.epochs == 0 || treebank.empty()) return model;

  FeatureInterner names;
  // cache[k][h * (n+1) + d] holds the interned features of edge h->d
  std::vector<std::vector<FeatureInterner::Sparse>> cache;
  cache.reserve(treebank.size());
  for (const auto& [s, t] : treebank) {
    const int n = s.size();
    std::vector<FeatureInterner::Sparse> edges(static_cast<std::size_t>((n + 1) * (n + 1)));
    for (int h = 0; h <= n; ++h)
      for (int d = 1; d <= n; ++d)
        if (h != d) edges[static_cast<std::size_t>(h * (n + 1) + d)] = names.intern(extract_edge_features(s, h, d));
    cache.push_back(std::move(edges));
  }

  DenseAveragedWeights w;
  for (int epoch = 1; epoch <= opts.epochs; ++epoch) {
    ParserEpochStats stats{epoch, 0, 0, 0};
    for (std::size_t k = 0; k < treebank.size(); ++k) {
      const auto& [s, gold] = treebank[k];
      const int n = s.size();
      const auto& edges = cache[k];
      ScoreMatrix m(n);
      for (int h = 0; h <= n; ++h)
        for (int d = 1; d <= n; ++d)
          if (h != d) m.at(h, d) = w.dot(edges[static_cast<std::size_t>(h * (n + 1) + d)]);
      const DependencyTree pred = decode_mst(m);
      stats.tokens += n;
      for (int d = 1; d <= n; ++d) {
        const int gh = gold.head(d), ph = pred.head(d);
        if (gh == ph) {
          ++stats.correct;
          continue;
        }
        w.update(edges[static_cast<std::size_t>(gh * (n + 1) + d)], 1.0);
        w.update(edges[static_cast<std::size_t>(ph * (n + 1) + d)], -1.0);
      }
      if (!(pred == gold)) ++stats.updates;
      w.tick();
    }
    if (opts.on_epoch) opts.on_epoch(stats);
  }
  model.weights = w.averaged(names);
  return model;
}

inline EdgeFactoredModel train_parser(std::span<const std::pair<ParsedSentence, DependencyTree>> treebank,
                                      int epochs, std::uint64_t seed = 0) {
  ParserTrainOptions opts;
  opts.epochs = epochs;
  opts.seed = seed;
  return train_parser(treebank, opts);
}

// ---------------------------------------------------------------------------
// Model files

inline std::string write_model(const EdgeFactoredModel& m) {
  if (m.lang.empty() || m.lang.find_first_of(" \t\n") != std::string::npos)
    throw std::invalid_argument("model language id must be a nonempty word");
  std::ostringstream os;
  os << "biparse-model v1 " << m.lang << ' ' << m.templates << '\n';
  write_weight_lines(os, m.weights);
  return os.str();
}

inline EdgeFactoredModel read_model(std::string_view text) {
  const WeightFile wf = read_weight_file(text);
  std::istringstream hs(wf.header);
  std::string magic, version;
  EdgeFactoredModel m;
  hs >> magic >> version >> m.lang >> m.templates;
  std::string extra;
  if (magic != "biparse-model" || version != "v1" || m.lang.empty() || m.templates.empty() || (hs >> extra))
    throw ParseError(1, "bad parser model header '" + wf.header + "'");
  if (m.templates != kEdgeTemplates) throw ParseError(1, "unsupported feature templates '" + m.templates + "'");
  for (const auto& [k, v] : wf.entries) m.weights.set(k, v);
  return m;
}

}  // namespace biparse
