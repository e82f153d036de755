#pragma once

// Small synthetic corpora with hand-set models, used by the tests, the
// acceptance suite and `biparse gen-fixtures`. Every generator is a pure
// function of its arguments.

#include <algorithm>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "biparse/agreement.hpp"
#include "biparse/corpus.hpp"
#include "biparse/eval.hpp"
#include "biparse/parser.hpp"
#include "biparse/projection.hpp"

namespace biparse::fixtures {

/// Parallel test data plus the models it is meant to be decoded with.
struct FixtureSet {
  std::vector<BitextPair> pairs;  // gold trees attached
  std::vector<PPInstance> pp_gold;  // source side
  LanguageModels src_models;
  LanguageModels tgt_models;
};

namespace detail {

inline ParsedSentence sent(const std::string& lang, std::vector<std::string> forms, std::vector<std::string> tags) {
  return ParsedSentence::from_words(lang, forms, tags);
}

inline void set_length(PathLengthModel& m, int k, const std::string& f, double v) {
  m.w[static_cast<std::size_t>(k - 1)].set(f, v);
}

inline void set_path(PathPredictorModel& m, int k, const std::string& f, double v) {
  m.v[static_cast<std::size_t>(k - 2)].set(f, v);
}

inline const std::vector<std::string>& random_tags(bool english) {
  static const std::vector<std::string> en = {"DT", "NN", "VBD", "IN", "JJ", "PRP"};
  static const std::vector<std::string> hi = {"NN", "PSP", "VM", "JJ", "PRP"};
  return english ? en : hi;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PP attachment: "I <verb>ed the <obj> with <x>" against a verb-final
// translation where the postposition tells noun attachment ("waali") from
// instrument ("se").

struct PPEntry {
  std::string verb_en, verb_hi;
  std::string obj_en, obj_pos, obj_hi;
  std::string pn_en, pn_pos, pn_hi;
  bool noun_attach;
};

inline const std::vector<PPEntry>& pp_vocabulary() {
  static const std::vector<PPEntry> v = {
      {"washed", "dhoyee", "jeans", "NNS", "jeans", "pockets", "NNS", "jeb", true},
      {"bought", "khareedi", "shirt", "NN", "kameez", "buttons", "NNS", "batan", true},
      {"painted", "rangaa", "door", "NN", "darvaaza", "hinges", "NNS", "kabze", true},
      {"sold", "becha", "house", "NN", "makaan", "windows", "NNS", "khidkiyaan", true},
      {"found", "paaya", "bag", "NN", "thaila", "zips", "NNS", "chain", true},
      {"ate", "khaaya", "cake", "NN", "cake", "cherries", "NNS", "cherry", true},
      {"fixed", "sudhaara", "bike", "NN", "cycle", "gears", "NNS", "gear", true},
      {"read", "padhi", "book", "NN", "kitaab", "pictures", "NNS", "chitr", true},
      {"carried", "uthaaya", "box", "NN", "dibba", "handles", "NNS", "hatthe", true},
      {"wore", "pehna", "coat", "NN", "kot", "hood", "NN", "topi", true},
      {"washed", "dhoyee", "shirt", "NN", "kameez", "soap", "NN", "saabun", false},
      {"cleaned", "saaf", "floor", "NN", "farsh", "mop", "NN", "pocha", false},
      {"cut", "kaata", "bread", "NN", "roti", "knife", "NN", "chaaku", false},
      {"painted", "rangaa", "wall", "NN", "deevaar", "brush", "NN", "koochi", false},
      {"opened", "khola", "lock", "NN", "taala", "key", "NN", "chaabi", false},
      {"wrote", "likha", "letter", "NN", "patr", "pen", "NN", "kalam", false},
      {"hit", "maara", "ball", "NN", "gend", "bat", "NN", "balla", false},
      {"watered", "seencha", "garden", "NN", "baag", "hose", "NN", "paaip", false},
      {"dried", "sukhaaya", "hair", "NN", "baal", "towel", "NN", "tauliya", false},
      {"ate", "khaaya", "rice", "NN", "chaaval", "spoon", "NN", "chammach", false},
  };
  return v;
}

/// English: I(1) V(2) the(3) OBJ(4) with(5) PN(6).
/// Hindi, noun attachment: maine(1) PN(2) waali(3) OBJ(4) V(5);
/// Hindi, instrument:      maine(1) PN(2) se(3) OBJ(4) V(5).
inline BitextPair pp_pair(const PPEntry& e) {
  auto en = detail::sent("en", {"I", e.verb_en, "the", e.obj_en, "with", e.pn_en},
                         {"PRP", "VBD", "DT", e.obj_pos, "IN", e.pn_pos});
  auto hi = detail::sent("hi", {"maine", e.pn_hi, e.noun_attach ? "waali" : "se", e.obj_hi, e.verb_hi},
                         {"PRP", "NN", "PSP", "NN", "VM"});
  DependencyTree en_tree({2, 0, 4, 2, e.noun_attach ? 4 : 2, 5});
  DependencyTree hi_tree(e.noun_attach ? std::vector<int>{5, 4, 2, 5, 0} : std::vector<int>{5, 5, 2, 5, 0});
  Alignment a({{1, 1}, {2, 5}, {4, 4}, {5, 3}, {6, 2}});
  return BitextPair(std::move(en), std::move(hi), std::move(a), std::move(en_tree), std::move(hi_tree));
}

/// English parser that gets every structural edge right and attaches every
/// preposition to the verb. Hindi parser that gets every tree right.
/// Projection classifiers that predict the length and shape of the gold
/// correspondences.
inline FixtureSet pp_flip_fixture() {
  FixtureSet fx;
  auto& en = fx.src_models;
  auto& hi = fx.tgt_models;
  en.parser.lang = "en";
  hi.parser.lang = "hi";
  en.parser.weights.set("root_dp=VBD", 10);
  en.parser.weights.set("hp_dp=VBD|PRP", 10);
  en.parser.weights.set("hp_dp=VBD|IN", 1.0);
  en.parser.weights.set("hp_dp=NN|IN", 0.5);
  en.parser.weights.set("hp_dp=NNS|IN", 0.5);
  hi.parser.weights.set("root_dp=VM", 10);
  hi.parser.weights.set("hp_dp=VM|PRP", 10);

  const auto& vocab = pp_vocabulary();
  for (std::size_t k = 0; k < vocab.size(); ++k) {
    const PPEntry& e = vocab[k];
    en.parser.weights.set("hw_dw=" + e.verb_en + "|" + e.obj_en, 10);
    en.parser.weights.set("hw_dw=" + e.obj_en + "|the", 10);
    en.parser.weights.set("hw_dw=with|" + e.pn_en, 10);
    hi.parser.weights.set("hw_dw=" + e.verb_hi + "|" + e.obj_hi, 10);
    if (e.noun_attach) {
      hi.parser.weights.set("hw_dw=" + e.obj_hi + "|" + e.pn_hi, 10);
      hi.parser.weights.set("hw_dw=" + e.pn_hi + "|waali", 10);
    } else {
      hi.parser.weights.set("hw_dw=" + e.verb_hi + "|" + e.pn_hi, 10);
      hi.parser.weights.set("hw_dw=" + e.pn_hi + "|se", 10);
    }
    fx.pairs.push_back(pp_pair(e));
    fx.pp_gold.push_back({static_cast<int>(k) + 1, 5, e.noun_attach ? 4 : 2});
  }

  // en -> hi: prepositional edges become two-edge paths through a noun.
  for (const char* sp : {"sp=VBD|IN", "sp=NN|IN", "sp=NNS|IN"}) detail::set_length(en.outgoing.length, 2, sp, 1);
  detail::set_path(en.outgoing.path, 2, "t1p=NN", 1);
  // hi -> en: noun-noun and long verb-noun edges pass through the preposition.
  detail::set_length(hi.outgoing.length, 1, "tdist=2", 0.5);
  detail::set_length(hi.outgoing.length, 2, "sp=NN|NN", 1);
  detail::set_length(hi.outgoing.length, 2, "tdist=4", 1);
  detail::set_path(hi.outgoing.path, 2, "t0p=IN", 1);
  detail::set_path(hi.outgoing.path, 2, "t1p=IN", 1);
  return fx;
}

// ---------------------------------------------------------------------------
// Two misparses that can only be undone in order: the Hindi tree is repaired
// in round 1 from the English edges that are already right, and the English
// preposition follows in round 2.

struct MultiRoundEntry {
  std::string verb_en, verb_hi, obj_en, obj_hi, pn_en, pn_hi;
};

inline const std::vector<MultiRoundEntry>& multi_round_vocabulary() {
  static const std::vector<MultiRoundEntry> v = {
      {"washed", "dhoyee", "jeans", "jeans", "pockets", "jeb"},
      {"bought", "khareedi", "shirts", "kameezein", "buttons", "batan"},
      {"sold", "beche", "houses", "makaan", "windows", "khidkiyaan"},
      {"fixed", "sudhaari", "bikes", "cyclein", "gears", "gear"},
  };
  return v;
}

/// English: I(1) V(2) OBJ(3) with(4) PN(5). Hindi: maine(1) PN(2) waali(3) OBJ(4) V(5).
inline BitextPair multi_round_pair(const MultiRoundEntry& e) {
  auto en = detail::sent("en", {"I", e.verb_en, e.obj_en, "with", e.pn_en}, {"PRP", "VBD", "NNS", "IN", "NNS"});
  auto hi = detail::sent("hi", {"maine", e.pn_hi, "waali", e.obj_hi, e.verb_hi}, {"PRP", "NN", "PSP", "NN", "VM"});
  DependencyTree en_tree({2, 0, 2, 3, 4});
  DependencyTree hi_tree({5, 4, 2, 5, 0});
  Alignment a({{1, 1}, {2, 5}, {3, 4}, {4, 3}, {5, 2}});
  return BitextPair(std::move(en), std::move(hi), std::move(a), std::move(en_tree), std::move(hi_tree));
}

inline FixtureSet multi_round_fixture() {
  FixtureSet fx;
  auto& en = fx.src_models;
  auto& hi = fx.tgt_models;
  en.parser.lang = "en";
  hi.parser.lang = "hi";
  en.parser.weights.set("root", -5);
  en.parser.weights.set("root_dp=VBD", 15);
  en.parser.weights.set("hp_dp=NNS|PRP", 0.2);  // "I" goes to the object
  en.parser.weights.set("hp_dp=VBD|IN", 1.0);
  en.parser.weights.set("hp_dp=NNS|IN", 0.5);
  hi.parser.weights.set("root", -5);
  hi.parser.weights.set("root_dp=VM", 15);

  const auto& vocab = multi_round_vocabulary();
  for (std::size_t k = 0; k < vocab.size(); ++k) {
    const auto& e = vocab[k];
    en.parser.weights.set("hw_dw=" + e.verb_en + "|" + e.obj_en, 10);
    en.parser.weights.set("hw_dw=with|" + e.pn_en, 10);
    hi.parser.weights.set("hw_dw=" + e.verb_hi + "|maine", 10);
    hi.parser.weights.set("hw_dw=" + e.verb_hi + "|" + e.obj_hi, 10);
    hi.parser.weights.set("hw_dw=" + e.pn_hi + "|waali", 10);
    hi.parser.weights.set("hw_dw=" + e.verb_hi + "|" + e.pn_hi, 0.3);  // possessor goes to the verb
    fx.pairs.push_back(multi_round_pair(e));
    fx.pp_gold.push_back({static_cast<int>(k) + 1, 4, 3});
  }

  // en -> hi: a verb-attached preposition spans three Hindi edges, a
  // noun-attached one two. Source-only features (s0p, s1p) shift every path
  // of one length equally, so they move r but never the best path.
  detail::set_length(en.outgoing.length, 3, "sp=VBD|IN", 1);
  detail::set_length(en.outgoing.length, 2, "sp=NNS|IN", 1);
  detail::set_path(en.outgoing.path, 2, "t1p=NN", 1);
  detail::set_path(en.outgoing.path, 2, "sp=NNS|IN", 1);
  detail::set_path(en.outgoing.path, 2, "s1p=IN", -0.5);
  detail::set_path(en.outgoing.path, 3, "t1p=NN", 1);
  detail::set_path(en.outgoing.path, 3, "tdist=1", 1);
  detail::set_path(en.outgoing.path, 3, "s1p=IN", -2);
  for (int k = 2; k <= kMaxPathLength; ++k)
    for (const char* tag : {"<root>", "PRP", "VBD", "NNS", "IN"})
      en.outgoing.path.v[static_cast<std::size_t>(k - 2)].set(std::string("s0p=") + tag, -2);
  // hi -> en: noun-noun edges and long verb-noun edges go through "with".
  detail::set_length(hi.outgoing.length, 2, "sp=NN|NN", 1);
  detail::set_length(hi.outgoing.length, 2, "tdist=3", 1);
  detail::set_path(hi.outgoing.path, 2, "t0p=IN", 1);
  detail::set_path(hi.outgoing.path, 2, "t1p=IN", 1);
  detail::set_path(hi.outgoing.path, 2, "sp=NN|NN", 1);
  detail::set_path(hi.outgoing.path, 2, "s1p=NN", -1);
  return fx;
}

// ---------------------------------------------------------------------------
// Identity alignment between two copies of one sentence with isomorphic gold
// trees, and parsers that already produce them.

inline FixtureSet identity_fixture() {
  FixtureSet fx;
  const std::vector<std::string> forms = {"the", "dog", "saw", "a", "cat"};
  const std::vector<std::string> tags = {"DT", "NN", "VBD", "DT", "NN"};
  const std::vector<int> heads = {2, 3, 0, 5, 3};
  auto s = detail::sent("en", forms, tags);
  auto t = detail::sent("xx", forms, tags);
  fx.pairs.emplace_back(s, t, Alignment::identity(s.size()), DependencyTree(heads), DependencyTree(heads));
  for (auto* lm : {&fx.src_models, &fx.tgt_models}) {
    for (int d = 1; d <= s.size(); ++d) {
      const int h = heads[static_cast<std::size_t>(d - 1)];
      if (h == 0) lm->parser.weights.set("root_dp=" + tags[static_cast<std::size_t>(d - 1)], 5);
      else lm->parser.weights.set("hw_dw=" + forms[static_cast<std::size_t>(h - 1)] + "|" + forms[static_cast<std::size_t>(d - 1)], 5);
    }
    detail::set_path(lm->outgoing.path, 2, "tdist=1", 1);
  }
  fx.src_models.parser.lang = "en";
  fx.tgt_models.parser.lang = "xx";
  return fx;
}

// ---------------------------------------------------------------------------
// Random material

/// Sentences whose gold heads follow fixed POS rules, so a first-order
/// parser can fit them exactly: determiners and adjectives attach to the
/// next noun, nouns before the verb to the verb, the verb to the root,
/// prepositions to the preceding noun, and a noun after a preposition to it.
inline std::vector<std::pair<ParsedSentence, DependencyTree>> synthetic_treebank(int count, std::uint64_t seed,
                                                                                  const std::string& lang = "en") {
  std::mt19937_64 rng(seed);
  auto pick = [&](const std::vector<std::string>& xs) {
    return xs[std::uniform_int_distribution<std::size_t>(0, xs.size() - 1)(rng)];
  };
  const std::vector<std::string> nouns = {"dog", "cat", "man", "park", "ball", "house", "tree", "car"};
  const std::vector<std::string> adjs = {"big", "red", "old", "small"};
  const std::vector<std::string> verbs = {"saw", "liked", "found", "chased"};
  const std::vector<std::string> preps = {"in", "near", "on"};
  std::vector<std::pair<ParsedSentence, DependencyTree>> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    std::vector<std::string> forms, tags;
    std::vector<int> heads;
    // NP := DT [JJ] NN ; heads of DT/JJ point at the NN index.
    auto np = [&](int noun_head) {
      const int start = static_cast<int>(forms.size()) + 1;
      const bool adj = std::bernoulli_distribution(0.5)(rng);
      const int noun = start + 1 + (adj ? 1 : 0);
      forms.push_back("the");
      tags.push_back("DT");
      heads.push_back(noun);
      if (adj) {
        forms.push_back(pick(adjs));
        tags.push_back("JJ");
        heads.push_back(noun);
      }
      forms.push_back(pick(nouns));
      tags.push_back("NN");
      heads.push_back(noun_head);
      return noun;
    };
    np(-1);  // subject, patched below
    const int verb = static_cast<int>(forms.size()) + 1;
    heads.back() = verb;
    forms.push_back(pick(verbs));
    tags.push_back("VBD");
    heads.push_back(0);
    int last_noun = np(verb);
    if (std::bernoulli_distribution(0.6)(rng)) {
      const int prep = static_cast<int>(forms.size()) + 1;
      forms.push_back(pick(preps));
      tags.push_back("IN");
      heads.push_back(last_noun);
      last_noun = np(prep);
    }
    out.emplace_back(ParsedSentence::from_words(lang, forms, tags), DependencyTree(heads));
  }
  return out;
}

/// Random bitext pairs (3..8 tokens per side, random alignments, random
/// gold trees) for decoding-level checks.
inline std::vector<BitextPair> random_bitext(int count, std::uint64_t seed, int min_len = 3, int max_len = 8) {
  std::mt19937_64 rng(seed);
  const auto& en_tags = detail::random_tags(true);
  const auto& hi_tags = detail::random_tags(false);
  auto rand_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  auto make = [&](const std::string& lang, const std::vector<std::string>& tagset, const std::string& prefix) {
    const int n = rand_int(min_len, max_len);
    std::vector<std::string> forms, tags;
    for (int i = 0; i < n; ++i) {
      tags.push_back(tagset[static_cast<std::size_t>(rand_int(0, static_cast<int>(tagset.size()) - 1))]);
      forms.push_back(prefix + std::to_string(rand_int(0, 9)));
    }
    return ParsedSentence::from_words(lang, forms, tags);
  };
  auto rand_tree = [&](int n) {
    // Random recursive tree over a random order: always an arborescence.
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i + 1;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> heads(static_cast<std::size_t>(n), 0);
    for (int k = 1; k < n; ++k)
      heads[static_cast<std::size_t>(order[static_cast<std::size_t>(k)] - 1)] = order[static_cast<std::size_t>(rand_int(0, k - 1))];
    return DependencyTree(heads);
  };
  std::vector<BitextPair> out;
  for (int k = 0; k < count; ++k) {
    auto s = make("en", en_tags, "e");
    auto t = make("hi", hi_tags, "h");
    std::vector<Alignment::Link> links;
    for (int i = 1; i <= s.size(); ++i)
      if (std::bernoulli_distribution(0.85)(rng)) links.push_back({i, rand_int(1, t.size())});
    auto st = rand_tree(s.size());
    auto tt = rand_tree(t.size());
    out.emplace_back(std::move(s), std::move(t), Alignment(links), std::move(st), std::move(tt));
  }
  return out;
}

/// Parser and projection models with random weights over the POS templates
/// of `random_bitext`; `english` picks the side. Weights are small integers
/// in [-2, 2] scaled by 0.5, so ties are common.
inline LanguageModels random_models(bool english, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto w = [&] { return 0.5 * std::uniform_int_distribution<int>(-2, 2)(rng); };
  const auto& own = detail::random_tags(english);
  const auto& other = detail::random_tags(!english);
  LanguageModels lm;
  lm.parser.lang = english ? "en" : "hi";
  for (const auto& h : own) {
    lm.parser.weights.set("root_dp=" + h, w());
    for (const auto& d : own) lm.parser.weights.set("hp_dp=" + h + "|" + d, w());
  }
  for (const char* dist : {"+1", "+2", "+3", "-1", "-2", "-3"}) lm.parser.weights.set(std::string("dist=") + dist, w());
  for (int k = 1; k <= kMaxPathLength; ++k)
    for (const auto& a : own)
      for (const auto& b : own) detail::set_length(lm.outgoing.length, k, "sp=" + a + "|" + b, w());
  for (int k = 2; k <= kMaxPathLength; ++k) {
    for (const auto& a : other)
      for (const auto& b : other) detail::set_path(lm.outgoing.path, k, "tp=" + a + "|" + b, w());
    for (const char* dist : {"1", "2", "3"}) detail::set_path(lm.outgoing.path, k, std::string("tdist=") + dist, w());
  }
  return lm;
}

/// Length instances separable by a single indicator feature per label.
inline std::vector<LengthInstance> separable_length_instances(int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<LengthInstance> out;
  for (int i = 0; i < count; ++i) {
    const int k = std::uniform_int_distribution<int>(1, kMaxPathLength)(rng);
    LengthInstance li;
    li.length = k;
    li.features.add("cue=" + std::to_string(k));
    li.features.add("noise=" + std::to_string(std::uniform_int_distribution<int>(0, 3)(rng)));
    out.push_back(std::move(li));
  }
  return out;
}

/// Path instances whose gold interior nodes are tagged P1..P(k-1) in path
/// order, endpoints E and every other target token X. `pairs` owns the
/// sentences the instance views point into.
struct PathInstanceSet {
  std::vector<BitextPair> pairs;
  std::vector<PathInstance> instances;
};

inline PathInstanceSet separable_path_instances(int count, std::uint64_t seed, int max_len = 8) {
  std::mt19937_64 rng(seed);
  auto rand_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  PathInstanceSet out;
  out.pairs.reserve(static_cast<std::size_t>(count));
  std::vector<std::vector<int>> gold;
  for (int i = 0; i < count; ++i) {
    const int k = rand_int(2, std::min(kMaxPathLength, max_len - 1));
    const int n = rand_int(k + 1, max_len);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) order[static_cast<std::size_t>(v)] = v + 1;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> path(order.begin(), order.begin() + k + 1);
    std::vector<std::string> forms, tags(static_cast<std::size_t>(n), "X");
    for (int v = 1; v <= n; ++v) forms.push_back("w" + std::to_string(v));
    tags[static_cast<std::size_t>(path.front() - 1)] = "E";
    tags[static_cast<std::size_t>(path.back() - 1)] = "E";
    for (int m = 1; m < k; ++m) tags[static_cast<std::size_t>(path[static_cast<std::size_t>(m)] - 1)] = "P" + std::to_string(m);
    auto s = detail::sent("en", {"a", "b"}, {"SA", "SB"});
    auto t = ParsedSentence::from_words("hi", forms, tags);
    out.pairs.emplace_back(std::move(s), std::move(t), Alignment({{1, path.front()}, {2, path.back()}}));
    gold.push_back(std::move(path));
  }
  for (std::size_t i = 0; i < out.pairs.size(); ++i)
    out.instances.push_back({ProjectionView::of(out.pairs[i], Direction::SrcToTgt), {1, 2}, gold[i]});
  return out;
}

}  // namespace biparse::fixtures
