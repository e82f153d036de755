// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. argv[1] is a scratch directory.

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "biparse/agreement.hpp"
#include "biparse/eval.hpp"
#include "biparse/fixtures.hpp"
#include "biparse/model_store.hpp"
#include "biparse/oracle.hpp"

using namespace biparse;
namespace fs = std::filesystem;

namespace {

fs::path g_work;
int g_failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::cout << (ok ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct CmdResult {
  int code;
  std::string out;
};

CmdResult cli(const std::string& args) {
  const fs::path o = g_work / "stdout.txt", e = g_work / "stderr.txt";
  const std::string cmd = std::string(BIPARSE_CLI) + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_file(o)};
}

std::string bitext(const fs::path& dir, const std::string& tgt = "hi") {
  return "--src " + (dir / "en.conll").string() + " --tgt " + (dir / (tgt + ".conll")).string() + " --align " +
         (dir / ("en-" + tgt + ".align")).string() + " --tgt-lang " + tgt + " --models " + (dir / "models").string();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << v;
  return os.str();
}

// ---------------------------------------------------------------------------

void decoder_oracle() {
  std::mt19937_64 rng(1);
  long mismatches = 0, total = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int n = 2; n <= 6; ++n)
    for (int i = 0; i < 1000; ++i) {
      ScoreMatrix m(n);
      // alternate coarse integer scores (many ties) with continuous ones
      std::uniform_int_distribution<int> coarse(-2, 2);
      std::uniform_real_distribution<double> fine(-5, 5);
      for (int h = 0; h <= n; ++h)
        for (int d = 1; d <= n; ++d)
          if (h != d) m.at(h, d) = i % 2 ? coarse(rng) : fine(rng);
      const auto a = decode_mst(m), b = brute_force_decode(m);
      ++total;
      if (!(a == b) || tree_score(m, a) != tree_score(m, b)) ++mismatches;
    }
  const double secs = seconds_since(t0);
  report(mismatches == 0 && secs < 10.0, "decoder-oracle",
         std::to_string(total - mismatches) + "/" + std::to_string(total) + " identical trees and scores, n=2..6, " +
             fmt(secs) + " s (budget 10 s)");
}

void path_oracle() {
  std::mt19937_64 rng(2);
  int agree = 0;
  const int total = 500;
  for (int i = 0; i < total; ++i) {
    const int n = std::uniform_int_distribution<int>(2, 8)(rng);
    const int k = std::uniform_int_distribution<int>(1, std::min(5, n - 1))(rng);
    std::vector<double> table(static_cast<std::size_t>((n + 1) * (n + 1)));
    std::uniform_int_distribution<int> d(-3, 3);
    for (auto& x : table) x = 0.5 * d(rng);
    auto scorer = [&](int a, int b) { return table[static_cast<std::size_t>(a * (n + 1) + b)]; };
    const int from = std::uniform_int_distribution<int>(1, n)(rng);
    int to = std::uniform_int_distribution<int>(1, n - 1)(rng);
    if (to >= from) ++to;
    const auto fast = best_path({from, to}, k, scorer, n);
    const auto slow = brute_force_path({from, to}, k, scorer, n);
    agree += fast.nodes == slow.nodes && fast.score == slow.score;
  }
  report(agree == total, "path-oracle",
         std::to_string(agree) + "/" + std::to_string(total) + " exact path and score matches, n<=8, k<=5");
}

void tree_path_oracle() {
  std::mt19937_64 rng(3);
  int trees_ok = 0;
  const int total = 500;
  for (int i = 0; i < total; ++i) {
    const int n = std::uniform_int_distribution<int>(1, 10)(rng);
    std::vector<int> order(static_cast<std::size_t>(n));
    for (int v = 0; v < n; ++v) order[static_cast<std::size_t>(v)] = v + 1;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<int> heads(static_cast<std::size_t>(n), 0);
    for (int v = 1; v < n; ++v) {
      const int p = std::uniform_int_distribution<int>(-1, v - 1)(rng);
      heads[static_cast<std::size_t>(order[static_cast<std::size_t>(v)] - 1)] =
          p < 0 ? 0 : order[static_cast<std::size_t>(p)];
    }
    const DependencyTree t(heads);
    bool ok = true;
    for (int a = 1; a <= n && ok; ++a)
      for (int b = 1; b <= n && ok; ++b) ok = tree_path(t, a, b) == bfs_tree_path(t, a, b);
    trees_ok += ok;
  }
  report(trees_ok == total, "tree-path-bfs",
         std::to_string(trees_ok) + "/" + std::to_string(total) + " random trees agree on every endpoint pair, n<=10");
}

void perceptron_convergence() {
  const auto tb = fixtures::synthetic_treebank(200, 42);
  int first_clean = 0;
  ParserTrainOptions opts;
  opts.epochs = 50;
  opts.on_epoch = [&](const ParserEpochStats& s) {
    if (!first_clean && s.correct == s.tokens) first_clean = s.epoch;
  };
  const auto model = train_parser(tb, opts);
  long correct = 0, tokens = 0;
  for (const auto& [s, t] : tb) {
    const auto p = parse(model, s);
    for (int d = 1; d <= s.size(); ++d) correct += p.head(d) == t.head(d);
    tokens += s.size();
  }

  const auto li = fixtures::separable_length_instances(500, 4);
  const auto lm = train_path_length(li, 50);
  long length_errors = 0;
  for (const auto& in : li) length_errors += predict_path_length(lm, in.features) != in.length;

  const auto ps = fixtures::separable_path_instances(300, 8);
  const auto pm = train_path_predictor(ps.instances, 50);
  long path_errors = 0;
  for (const auto& in : ps.instances) {
    const int k = static_cast<int>(in.gold_path.size()) - 1;
    const auto p = best_path({in.gold_path.front(), in.gold_path.back()}, k,
                             [&](int a, int b) { return path_edge_score(pm, k, in.view, in.src_edge, {a, b}); },
                             in.view.target->size());
    path_errors += p.nodes != in.gold_path;
  }
  report(correct == tokens && length_errors == 0 && path_errors == 0, "perceptron-convergence",
         "parser " + std::to_string(correct) + "/" + std::to_string(tokens) + " heads after 50 epochs (first clean epoch " +
             std::to_string(first_clean) + "); path-length errors " + std::to_string(length_errors) + "/" +
             std::to_string(li.size()) + "; path errors " + std::to_string(path_errors) + "/" +
             std::to_string(ps.instances.size()));
}

void baseline_reduction(const fs::path& fx) {
  const fs::path dir = fx / "reduction";
  const auto a = cli("infer " + bitext(dir) + " --baseline-only --out " + (g_work / "red_base").string());
  const auto b = cli("infer " + bitext(dir) + " --out " + (g_work / "red_full").string());
  bool ok = a.code == 0 && b.code == 0;
  std::string detail;
  if (ok) {
    const auto sm = load_language(dir / "models", "en", "hi");
    const auto tm = load_language(dir / "models", "hi", "en");
    const bool empty = sm.outgoing.empty() && tm.outgoing.empty();
    const auto src = read_conll(read_file(dir / "en.conll"), "en");
    const auto tgt = read_conll(read_file(dir / "hi.conll"), "hi");
    std::vector<std::pair<ParsedSentence, DependencyTree>> es, hs;
    for (std::size_t k = 0; k < src.size(); ++k) {
      es.emplace_back(src[k].sentence, decode_mst(score_edges(sm.parser, src[k].sentence)));
      hs.emplace_back(tgt[k].sentence, decode_mst(score_edges(tm.parser, tgt[k].sentence)));
    }
    const std::string golden_en = write_conll(es), golden_hi = write_conll(hs);
    const bool same = read_file(g_work / "red_base/en.conll") == read_file(g_work / "red_full/en.conll") &&
                      read_file(g_work / "red_base/hi.conll") == read_file(g_work / "red_full/hi.conll");
    const bool golden = read_file(g_work / "red_full/en.conll") == golden_en &&
                        read_file(g_work / "red_full/hi.conll") == golden_hi;
    ok = empty && same && golden;
    detail = std::to_string(src.size()) + " pairs; zero projection models " + (empty ? "yes" : "no") +
             "; baseline-only vs full byte-identical " + (same ? "yes" : "no") + "; equals decode_mst golden " +
             (golden ? "yes" : "no");
  } else {
    detail = "infer exited " + std::to_string(a.code) + "/" + std::to_string(b.code);
  }
  report(ok, "baseline-reduction", detail);
}

void identity_fixture() {
  const auto fx = fixtures::identity_fixture();
  const auto& p = fx.pairs[0];
  const auto r = coordinate_descent(p, fx.src_models, fx.tgt_models, AgreementConfig{});
  const auto& round = r.rounds.front();
  const bool outer = r.stopped && r.outer_iterations == 1 && !round.src_changed && !round.tgt_changed &&
                     r.src_tree == *p.src_tree && r.tgt_tree == *p.tgt_tree;
  bool inner = true;
  for (const auto* pr : {&round.src_projection, &round.tgt_projection})
    inner = inner && pr->converged && pr->iterations == 1 && pr->duals.all_zero() && !pr->constraints.empty();
  report(outer && inner, "identity-fixture",
         "outer rounds " + std::to_string(r.outer_iterations) + ", trees unchanged " + (outer ? "yes" : "no") +
             ", inner iterations " + std::to_string(round.src_projection.iterations) + "/" +
             std::to_string(round.tgt_projection.iterations) + ", u identically 0 " + (inner ? "yes" : "no"));
}

void pp_flip(const fs::path& fx) {
  const fs::path dir = fx / "ppflip";
  const auto a = cli("infer " + bitext(dir) + " --baseline-only --out " + (g_work / "pp_base").string());
  const auto b = cli("infer " + bitext(dir) + " --out " + (g_work / "pp_dd").string());
  const auto e = cli("evaluate --baseline " + (g_work / "pp_base/en.conll").string() + " --dd " +
                     (g_work / "pp_dd/en.conll").string() + " --gold " + (dir / "pp.tsv").string());
  if (a.code || b.code || e.code) {
    report(false, "pp-flip", "commands exited " + std::to_string(a.code) + "/" + std::to_string(b.code) + "/" +
                                 std::to_string(e.code));
    return;
  }
  const auto gold = read_pp_gold(read_file(dir / "pp.tsv"));
  std::vector<DependencyTree> base, dd;
  for (const auto& x : read_conll(read_file(g_work / "pp_base/en.conll"))) base.push_back(*x.tree);
  for (const auto& x : read_conll(read_file(g_work / "pp_dd/en.conll"))) dd.push_back(*x.tree);
  const auto rep = evaluate(base, dd, gold);
  int wrong = 0, corrected = 0;
  for (std::size_t i = 0; i < gold.size(); ++i)
    if (!rep.verdicts_baseline[i]) {
      ++wrong;
      corrected += rep.verdicts_dd[i];
    }
  const bool table = e.out == render_table(rep) && e.out.find("Accuracy (%)") != std::string::npos;
  std::cout << e.out;
  report(gold.size() == 20 && wrong == 10 && corrected >= 8 && table, "pp-flip",
         std::to_string(corrected) + " of " + std::to_string(wrong) + " baseline misattachments corrected (need >= 8); "
         "accuracy " + rep.accuracy_baseline() + " -> " + rep.accuracy_dd() + " on " + std::to_string(gold.size()) +
             " instances");
}

void sweep(const fs::path& fx) {
  const fs::path mr = fx / "multiround", pp = fx / "ppflip";
  const auto t0 = std::chrono::steady_clock::now();
  const auto a = cli("sweep " + bitext(mr) + " --gold " + (mr / "pp.tsv").string());
  const auto b = cli("sweep " + bitext(mr) + " --gold " + (mr / "pp.tsv").string());
  const auto c = cli("sweep " + bitext(pp) + " --gold " + (pp / "pp.tsv").string());
  const double secs = seconds_since(t0);
  if (a.code || b.code || c.code) {
    report(false, "sweep", "sweep exited " + std::to_string(a.code) + "/" + std::to_string(b.code) + "/" +
                               std::to_string(c.code));
    return;
  }
  std::cout << a.out;
  std::vector<std::pair<int, double>> rows;
  std::istringstream in(a.out);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto cols = biparse::detail::split(line, '\t');
    rows.emplace_back(std::stoi(std::string(cols[0])), std::stod(std::string(cols[2])));
  }
  int pp_rows = 0;
  for (char ch : c.out) pp_rows += ch == '\n';
  --pp_rows;
  double at10 = -1, at30 = -1;
  for (const auto& [n, acc] : rows) {
    if (n == 10) at10 = acc;
    if (n == 30) at30 = acc;
  }
  // the fixture's joint-objective optimum is the gold attachment
  const auto mf = fixtures::multi_round_fixture();
  int optimal = 0;
  for (std::size_t i = 0; i < mf.pairs.size(); ++i) {
    AgreementConfig cfg;
    cfg.outer_iters = 30;
    const auto r = coordinate_descent(mf.pairs[i], mf.src_models, mf.tgt_models, cfg);
    const auto best = brute_force_joint_max(mf.pairs[i], mf.src_models, mf.tgt_models);
    optimal += r.src_tree == best.src_tree && r.tgt_tree == best.tgt_tree &&
               best.src_tree.head(mf.pp_gold[i].prep_index) == mf.pp_gold[i].gold_head;
  }
  const bool ok = secs < 60.0 && rows.size() == 6 && pp_rows == 6 && a.out == b.out && at30 >= at10 && at10 >= 0 &&
                  optimal == static_cast<int>(mf.pairs.size());
  report(ok, "sweep", std::to_string(rows.size()) + " rows, repeat byte-identical " + (a.out == b.out ? "yes" : "no") +
                          ", N=10 " + fmt(at10) + " N=30 " + fmt(at30) + ", brute-force optimum reached on " +
                          std::to_string(optimal) + "/" + std::to_string(mf.pairs.size()) + " pairs, 3 sweeps in " +
                          fmt(secs) + " s (budget 60 s)");
}

void joint_bound() {
  const auto pairs = fixtures::random_bitext(100, 2024, 4, 4);
  AgreementConfig cfg;
  cfg.outer_iters = 10;
  cfg.inner_iters = 50;
  long visited = 0, violations = 0;
  double worst = -1e300;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto sm = fixtures::random_models(true, 10'000 + i);
    const auto tm = fixtures::random_models(false, 20'000 + i);
    const auto best = brute_force_joint_max(pairs[i], sm, tm);
    const auto r = coordinate_descent(pairs[i], sm, tm, cfg);
    auto check = [&](const DependencyTree& s, const DependencyTree& t) {
      const double v = joint_objective(s, t, pairs[i], sm, tm);
      ++visited;
      worst = std::max(worst, v - best.value);
      if (v > best.value + 1e-9) ++violations;
    };
    check(r.baseline_src, r.baseline_tgt);
    for (const auto& round : r.rounds) check(round.src_tree, round.tgt_tree);
  }
  report(violations == 0, "joint-objective-bound",
         std::to_string(visited) + " visited tree pairs over 100 random 4x4 pairs, " + std::to_string(violations) +
             " above the exhaustive maximum (max excess " + fmt(worst) + ", tolerance 1e-9)");
}

void determinism(const fs::path& fx) {
  struct Step {
    std::string name;
    std::function<std::string(const fs::path&)> run;  // returns stdout plus produced files
  };
  const fs::path pp = fx / "ppflip", id = fx / "identity";
  auto files_of = [](const fs::path& dir) {
    std::string all;
    std::vector<fs::path> paths;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file()) paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    for (const auto& p : paths) all += fs::relative(p, dir).string() + "\n" + read_file(p);
    return all;
  };
  const std::vector<Step> steps = {
      {"gen-fixtures", [&](const fs::path& o) { const auto out = cli("gen-fixtures --out " + o.string()).out;
         return out + files_of(o); }},
      {"train-parser",
       [&](const fs::path& o) {
         const auto out = cli("train-parser --lang en --treebank " + (fx / "treebank/en.conll").string() + " --epochs 5 --out " +
                    o.string()).out;
         return out + files_of(o);
       }},
      {"train-projection",
       [&](const fs::path& o) {
         const auto out = cli("train-projection --src " + (pp / "en.conll").string() + " --tgt " + (pp / "hi.conll").string() +
                    " --align " + (pp / "en-hi.align").string() + " --epochs 5 --out " + o.string()).out;
         return out + files_of(o);
       }},
      {"infer",
       [&](const fs::path& o) {
         const auto out = cli("infer " + bitext(pp) + " --diagnostics " + (o / "diag.tsv").string() + " --out " + o.string()).out;
         return out + files_of(o);
       }},
      {"infer-identity",
       [&](const fs::path& o) { const auto out = cli("infer " + bitext(id, "xx") + " --out " + o.string()).out;
         return out + files_of(o); }},
      {"evaluate",
       [&](const fs::path& o) {
         fs::create_directories(o);
         const auto out = cli("evaluate --baseline " + (pp / "en.conll").string() + " --dd " + (pp / "en.conll").string() +
                    " --gold " + (pp / "pp.tsv").string() + " --tsv " + (o / "t.tsv").string()).out;
         return out + files_of(o);
       }},
      {"sweep",
       [&](const fs::path& o) {
         const auto out = cli("sweep " + bitext(pp) + " --gold " + (pp / "pp.tsv").string() + " --out " + (o / "s.tsv").string()).out;
         return out + files_of(o);
       }},
  };
  int same = 0;
  std::string differing;
  for (const auto& s : steps) {
    const fs::path o = g_work / ("det_" + s.name);
    fs::remove_all(o);
    const auto r1 = s.run(o);
    fs::remove_all(o);
    const auto r2 = s.run(o);
    if (r1 == r2 && !r1.empty())
      ++same;
    else
      differing += " " + s.name;
  }
  report(same == static_cast<int>(steps.size()), "determinism",
         std::to_string(same) + "/" + std::to_string(steps.size()) + " commands byte-identical across two runs" +
             (differing.empty() ? "" : " (differs:" + differing + ")"));
}

}  // namespace

int main(int argc, char** argv) {
  g_work = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "biparse_acceptance";
  fs::remove_all(g_work);
  fs::create_directories(g_work);
  const fs::path fx = g_work / "fixtures";
  if (cli("gen-fixtures --out " + fx.string()).code != 0) {
    std::cout << "FAIL setup: gen-fixtures did not run\n";
    return 1;
  }
  try {
    decoder_oracle();
    path_oracle();
    tree_path_oracle();
    perceptron_convergence();
    baseline_reduction(fx);
    identity_fixture();
    pp_flip(fx);
    sweep(fx);
    joint_bound();
    determinism(fx);
  } catch (const std::exception& e) {
    std::cout << "FAIL exception: " << e.what() << '\n';
    return 1;
  }
  std::cout << (g_failures ? "acceptance: " + std::to_string(g_failures) + " criteria failed\n"
                           : std::string("acceptance: all criteria passed\n"));
  return g_failures ? 1 : 0;
}
