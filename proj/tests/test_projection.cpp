#include <gtest/gtest.h>

#include <random>
#include <string>
#include <vector>

#include "biparse/fixtures.hpp"
#include "biparse/oracle.hpp"
#include "biparse/projection.hpp"

using namespace biparse;

namespace {

// English "I washed the jeans with pockets" with `with` on the verb, against
// "maine jeb waali jeans dhoyee" with waali on jeans.
BitextPair verb_attached_pair() {
  auto en = ParsedSentence::from_words("en", {"I", "washed", "the", "jeans", "with", "pockets"},
                                       {"PRP", "VBD", "DT", "NNS", "IN", "NNS"});
  auto hi = ParsedSentence::from_words("hi", {"maine", "jeb", "waali", "jeans", "dhoyee"},
                                       {"PRP", "NN", "PSP", "NN", "VM"});
  return BitextPair(en, hi, Alignment({{1, 1}, {2, 5}, {4, 4}, {5, 3}, {6, 2}}), DependencyTree({2, 0, 4, 2, 2, 5}),
                    DependencyTree({5, 3, 4, 5, 0}));
}

DependencyTree random_tree(int n, std::mt19937_64& rng) {
  std::vector<int> heads(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) order[i] = i + 1;
  std::shuffle(order.begin(), order.end(), rng);
  for (int i = 0; i < n; ++i) {
    const int parent = i == 0 ? -1 : std::uniform_int_distribution<int>(-1, i - 1)(rng);
    heads[order[i] - 1] = parent < 0 ? 0 : order[parent];
  }
  return DependencyTree(heads);
}

}  // namespace

TEST(TreePath, FigureOneTree) {
  const DependencyTree t({2, 0, 4, 2, 4, 5});
  EXPECT_EQ(tree_path(t, 2, 5), (std::vector<int>{2, 4, 5}));
  EXPECT_EQ(tree_path(t, 5, 2), (std::vector<int>{5, 4, 2}));
  EXPECT_TRUE(tree_path(t, 3, 3).empty());
  EXPECT_EQ(tree_path(t, 1, 6), (std::vector<int>{1, 2, 4, 5, 6}));
}

TEST(TreePath, CrossesRootBetweenRootChildren) {
  const DependencyTree t({0, 0, 1});
  EXPECT_EQ(tree_path(t, 3, 2), (std::vector<int>{3, 1, 0, 2}));
}

TEST(TreePath, MatchesBfs) {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 300; ++i) {
    const int n = 1 + i % 10;
    const auto t = random_tree(n, rng);
    for (int a = 1; a <= n; ++a)
      for (int b = 1; b <= n; ++b) ASSERT_EQ(tree_path(t, a, b), bfs_tree_path(t, a, b));
  }
}

TEST(ProjectEndpoints, Rules) {
  EXPECT_EQ(project_endpoints({2, 4}, Alignment::identity(5)), (Edge{2, 4}));
  EXPECT_FALSE(project_endpoints({2, 4}, Alignment({{1, 1}, {2, 2}})));
  EXPECT_FALSE(project_endpoints({2, 4}, Alignment({{2, 5}, {4, 4}, {2, 4}})));
  EXPECT_EQ(project_endpoints({1, 2}, Alignment({{1, 3}, {1, 2}, {2, 1}})), (Edge{2, 1}));
  const auto p = verb_attached_pair();
  EXPECT_EQ(project_endpoints({5, 6}, p.alignment, Direction::SrcToTgt), (Edge{3, 2}));
  EXPECT_EQ(project_endpoints({3, 2}, p.alignment, Direction::TgtToSrc), (Edge{5, 6}));
}

TEST(FourNodeFeatures, TemplateReadout) {
  const auto p = verb_attached_pair();
  const auto f = four_node_features({4, 5}, {4, 3}, p);
  for (const char* name : {"s0w=jeans", "s1w=with", "t0w=jeans", "t1w=waali", "s0p=NNS", "s1p=IN", "t0p=NN",
                           "t1p=PSP", "sp=NNS|IN", "tp=NN|PSP", "tdist=1"})
    EXPECT_TRUE(f.contains(name)) << name;
  EXPECT_EQ(f, four_node_features({4, 5}, {4, 3}, p));
  EXPECT_THROW(four_node_features({4, 9}, {4, 3}, p), std::out_of_range);
}

TEST(FourNodeFeatures, RepeatedFormsStillDistinguished) {
  auto s = ParsedSentence::from_words("en", {"x", "x"}, {"NN", "VB"});
  auto t = ParsedSentence::from_words("hi", {"y", "y", "y"}, {"NN", "PSP", "VM"});
  const BitextPair p(s, t, Alignment::identity(2));
  const auto a = four_node_features({1, 2}, {1, 3}, p);
  const auto b = four_node_features({1, 2}, {2, 3}, p);
  EXPECT_TRUE(a.contains("t0w=y") && b.contains("t0w=y"));
  EXPECT_NE(a, b);
  EXPECT_TRUE(a.contains("t0p=NN"));
  EXPECT_TRUE(b.contains("t0p=PSP"));
  EXPECT_TRUE(a.contains("tdist=2"));
}

TEST(PathLength, PredictionRules) {
  PathLengthModel m;
  FeatureVector f;
  f.add("cue");
  EXPECT_EQ(predict_path_length(m, f), 1);
  m.w[2].set("cue", 2.0);
  m.w[4].set("cue", 1.0);
  EXPECT_EQ(predict_path_length(m, f), 3);
  m.w[4].set("cue", 2.0);
  EXPECT_EQ(predict_path_length(m, f), 3);
}

TEST(BestPath, Examples) {
  auto zero = [](int, int) { return 0.0; };
  int calls = 0;
  auto counting = [&](int, int) {
    ++calls;
    return 1.0;
  };
  EXPECT_EQ(best_path({2, 5}, 1, counting, 6).nodes, (std::vector<int>{2, 5}));
  EXPECT_EQ(calls, 0);
  auto s = [](int a, int b) {
    if ((a == 1 && b == 2) || (a == 2 && b == 4)) return 3.5;
    if ((a == 1 && b == 3) || (a == 3 && b == 4)) return 2.5;
    return -10.0;
  };
  const auto p = best_path({1, 4}, 2, s, 4);
  EXPECT_EQ(p.nodes, (std::vector<int>{1, 2, 4}));
  EXPECT_EQ(p.score, 7.0);
  EXPECT_EQ(best_path({1, 5}, 2, zero, 5).nodes, (std::vector<int>{1, 2, 5}));
  EXPECT_THROW(best_path({1, 4}, 4, zero, 4), std::invalid_argument);
  EXPECT_THROW(best_path({1, 1}, 2, zero, 4), std::invalid_argument);
}

TEST(BestPath, MatchesExhaustiveEnumeration) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    const int n = 3 + i % 6;
    const int k = 1 + static_cast<int>(rng() % std::min(5, n - 1));
    std::vector<double> table((n + 1) * (n + 1));
    std::uniform_int_distribution<int> d(-2, 2);
    for (auto& x : table) x = d(rng);
    auto scorer = [&](int a, int b) { return table[a * (n + 1) + b]; };
    const int from = 1 + static_cast<int>(rng() % n);
    int to = 1 + static_cast<int>(rng() % n);
    if (to == from) to = to % n + 1;
    const auto fast = best_path({from, to}, k, scorer, n);
    const auto slow = brute_force_path({from, to}, k, scorer, n);
    ASSERT_EQ(fast.nodes, slow.nodes);
    ASSERT_EQ(fast.score, slow.score);
  }
}

TEST(PathScore, AdditiveOverEdges) {
  const auto p = verb_attached_pair();
  const auto view = ProjectionView::of(p, Direction::SrcToTgt);
  PathPredictorModel m;
  EXPECT_EQ(path_edge_score(m, 3, view, {2, 5}, {5, 4}), 0.0);
  m.v[1].set("tp=VM|NN", 1.5);
  m.v[1].set("tp=NN|PSP", 0.25);
  m.v[1].set("t1p=PSP", 2.0);
  m.v[1].set("tdist=1", -0.5);
  EXPECT_EQ(path_edge_score(m, 3, view, {2, 5}, {5, 4}), 1.5 - 0.5 + 0.0);
  const std::vector<int> path = {5, 4, 3, 2};
  double manual = 0;
  for (int i = 0; i < 3; ++i) manual += path_edge_score(m, 3, view, {2, 5}, {path[i], path[i + 1]});
  EXPECT_EQ(path_score(m, view, {2, 5}, path), manual);
  EXPECT_EQ(manual, (1.5 - 0.5) + (0.25 + 2.0 - 0.5) + (-0.5));
}

TEST(Extraction, SentenceOneStylePair) {
  const std::vector<BitextPair> corpus = {verb_attached_pair()};
  const auto ts = extract_projection_training(corpus, Direction::SrcToTgt);
  ASSERT_EQ(ts.lengths.size(), 4u);
  ASSERT_EQ(ts.paths.size(), 1u);
  EXPECT_EQ(ts.paths[0].src_edge, (Edge{2, 5}));
  EXPECT_EQ(ts.paths[0].gold_path, (std::vector<int>{5, 4, 3}));
  int twos = 0;
  for (const auto& l : ts.lengths) twos += l.length == 2;
  EXPECT_EQ(twos, 1);
  EXPECT_EQ(ts.skips.root_edges, 1);
  EXPECT_EQ(ts.skips.unprojectable, 1);  // "the" is unaligned
}

TEST(Extraction, IdentityGivesOnlyLengthOne) {
  const auto fx = fixtures::identity_fixture();
  const auto ts = extract_projection_training(fx.pairs, Direction::SrcToTgt);
  EXPECT_EQ(ts.lengths.size(), 4u);
  for (const auto& l : ts.lengths) EXPECT_EQ(l.length, 1);
  EXPECT_TRUE(ts.paths.empty());
}

TEST(Extraction, NeedsBothTrees) {
  auto p = verb_attached_pair();
  p.tgt_tree.reset();
  const std::vector<BitextPair> corpus = {p};
  EXPECT_THROW(extract_projection_training(corpus, Direction::SrcToTgt), std::invalid_argument);
}

TEST(TrainPathLength, ZeroEpochsAndErrors) {
  const auto inst = fixtures::separable_length_instances(20, 1);
  const auto m = train_path_length(inst, 0);
  for (const auto& in : inst) EXPECT_EQ(predict_path_length(m, in.features), 1);
  EXPECT_THROW(train_path_length(std::vector<LengthInstance>{}, 5), std::invalid_argument);
  std::vector<LengthInstance> bad = {{FeatureVector{}, 6}};
  EXPECT_THROW(train_path_length(bad, 5), std::invalid_argument);
}

TEST(TrainPathLength, SeparableReachesZeroError) {
  const auto inst = fixtures::separable_length_instances(300, 4);
  const auto m = train_path_length(inst, 50, 0);
  for (const auto& in : inst) ASSERT_EQ(predict_path_length(m, in.features), in.length);
  EXPECT_EQ(write_path_length_model(m), write_path_length_model(train_path_length(inst, 50, 0)));
}

TEST(TrainPathPredictor, SeparableReachesZeroError) {
  const auto set = fixtures::separable_path_instances(200, 8);
  ClassifierTrainStats st;
  const auto m = train_path_predictor(set.instances, 50, 0, &st);
  EXPECT_EQ(st.instances, 200);
  for (const auto& in : set.instances) {
    const int k = static_cast<int>(in.gold_path.size()) - 1;
    const auto p = best_path({in.gold_path.front(), in.gold_path.back()}, k,
                             [&](int a, int b) { return path_edge_score(m, k, in.view, in.src_edge, {a, b}); },
                             in.view.target->size());
    ASSERT_EQ(p.nodes, in.gold_path);
  }
}

TEST(TrainPathPredictor, ZeroEpochsAndErrors) {
  const auto set = fixtures::separable_path_instances(5, 2);
  const auto m = train_path_predictor(set.instances, 0);
  for (const auto& v : m.v) EXPECT_TRUE(v.empty());
  auto bad = set.instances;
  bad[0].gold_path = {1, 2};
  EXPECT_THROW(train_path_predictor(bad, 1), std::invalid_argument);
}

TEST(TrainPathPredictor, NoUpdateOnceCorrect) {
  const auto set = fixtures::separable_path_instances(50, 3);
  ClassifierTrainStats a, b;
  train_path_predictor(set.instances, 20, 0, &a);
  train_path_predictor(set.instances, 40, 0, &b);
  EXPECT_EQ(a.updates, b.updates);
}

TEST(ModelFiles, RoundTrip) {
  PathLengthModel lm;
  lm.w[0].set("cue=1", 0.5);
  lm.w[4].set("sp=NN|IN", -1.0 / 7.0);
  const auto text = write_path_length_model(lm);
  EXPECT_EQ(text.substr(0, text.find('\n')), "biparse-pathlen v1");
  EXPECT_EQ(read_path_length_model(text), lm);
  PathPredictorModel pm, back;
  pm.v[1].set("tp=NN|PSP", 2.25);
  const auto t3 = write_path_predictor_weights(pm, 3);
  EXPECT_EQ(t3.substr(0, t3.find('\n')), "biparse-pathpred v1 k=3");
  EXPECT_EQ(read_path_predictor_weights(t3, back), 3);
  EXPECT_EQ(back, pm);
  EXPECT_THROW(read_path_length_model("biparse-pathlen v1\nk9:x\t1\n"), ParseError);
  EXPECT_THROW(read_path_predictor_weights("biparse-pathpred v1 k=1\n", back), ParseError);
  EXPECT_THROW(write_path_predictor_weights(pm, 1), std::out_of_range);
}
