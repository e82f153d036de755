// biparse: train, decode and evaluate bilingually constrained dependency parsers.
//
// Exit codes: 0 success, 2 invalid input, 3 runtime failure.
//
// Diagnostics (infer --diagnostics FILE) are TSV, one record per inner
// iteration:
//   pair  round  side  iteration  dual_value  disagreements  tree_changed
// `side` is the language being re-decoded in that project call.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "biparse/agreement.hpp"
#include "biparse/config.hpp"
#include "biparse/corpus.hpp"
#include "biparse/eval.hpp"
#include "biparse/fixtures.hpp"
#include "biparse/model_store.hpp"
#include "biparse/parser.hpp"
#include "biparse/projection.hpp"

namespace fs = std::filesystem;
using namespace biparse;

namespace {

/// Bad user input: reported and mapped to exit code 2.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const std::set<std::string> kConfigKeys = {"outer_iters", "inner_iters", "alpha0", "schedule", "convergence",
                                           "seed",        "epochs"};

struct CommonAgreementFlags {
  std::string config;
  int outer_iters = 30;
  int inner_iters = 100;
  double alpha0 = 0.1;
  std::string schedule = "constant";
  std::string convergence = "either";
  CLI::Option* o_outer = nullptr;
  CLI::Option* o_inner = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_sched = nullptr;
  CLI::Option* o_conv = nullptr;

  void add(CLI::App* app) {
    app->add_option("--config", config, "key = value configuration file");
    o_outer = app->add_option("--outer-iters", outer_iters, "outer coordinate-descent rounds (default 30)");
    o_inner = app->add_option("--inner-iters", inner_iters, "subgradient iterations per projection (default 100)");
    o_alpha = app->add_option("--alpha", alpha0, "initial step size (default 0.1)");
    o_sched = app->add_option("--schedule", schedule, "constant | harmonic");
    o_conv = app->add_option("--convergence", convergence, "either | both");
  }

  /// defaults < config file < flags
  AgreementConfig resolve() const {
    AgreementConfig cfg;
    if (!config.empty()) apply_config(ConfigFile::parse(read_file(config), kConfigKeys), cfg);
    if (o_outer->count()) cfg.outer_iters = outer_iters;
    if (o_inner->count()) cfg.inner_iters = inner_iters;
    if (o_alpha->count()) cfg.alpha0 = alpha0;
    if (o_sched->count()) cfg.schedule = parse_schedule(schedule);
    if (o_conv->count()) cfg.convergence = parse_convergence(convergence);
    cfg.validate();
    return cfg;
  }
};

struct BitextFlags {
  std::string src, tgt, align, src_lang = "en", tgt_lang = "hi", models;

  void add(CLI::App* app, bool need_models = true) {
    app->add_option("--src", src, "source-side CoNLL-X file")->required();
    app->add_option("--tgt", tgt, "target-side CoNLL-X file")->required();
    app->add_option("--align", align, "Pharaoh alignments, one line per pair")->required();
    app->add_option("--src-lang", src_lang, "source language id (default en)");
    app->add_option("--tgt-lang", tgt_lang, "target language id (default hi)");
    if (need_models) app->add_option("--models", models, "model directory")->required();
  }

  std::vector<BitextPair> load() const {
    auto s = read_conll(read_file(src), src_lang);
    auto t = read_conll(read_file(tgt), tgt_lang);
    auto a = read_alignments(read_file(align));
    if (s.size() != t.size() || s.size() != a.size()) {
      std::ostringstream m;
      m << "sentence counts differ: " << src << " has " << s.size() << ", " << tgt << " has " << t.size() << ", "
        << align << " has " << a.size();
      throw InputError(m.str());
    }
    std::vector<BitextPair> out;
    out.reserve(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
      try {
        out.emplace_back(std::move(s[k].sentence), std::move(t[k].sentence), std::move(a[k]), std::move(s[k].tree),
                         std::move(t[k].tree));
      } catch (const std::exception& e) {
        throw InputError("pair " + std::to_string(k + 1) + ": " + e.what());
      }
    }
    return out;
  }
};

std::string conll_of(const std::vector<BitextPair>& pairs, const std::vector<DependencyTree>& trees, bool src_side) {
  std::vector<std::pair<ParsedSentence, DependencyTree>> rows;
  rows.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) rows.emplace_back(src_side ? pairs[k].src : pairs[k].tgt, trees[k]);
  return write_conll(rows);
}

std::vector<int> parse_iters(const std::string& text) {
  std::vector<int> out;
  for (auto part : biparse::detail::split(text, ',')) {
    const auto v = biparse::detail::to_int(part);
    if (!v || *v < 1) throw InputError("--iters needs a comma-separated list of positive integers");
    out.push_back(*v);
  }
  if (out.empty()) throw InputError("--iters is empty");
  return out;
}

// ---------------------------------------------------------------------------

int cmd_train_parser(const std::string& lang, const std::string& treebank, int epochs, const std::string& out_dir,
                     std::uint64_t seed) {
  if (epochs < 0) throw InputError("--epochs must be >= 0");
  const auto entries = read_conll(read_file(treebank), lang);
  std::vector<std::pair<ParsedSentence, DependencyTree>> tb;
  tb.reserve(entries.size());
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (!entries[k].tree) throw InputError(treebank + ": sentence " + std::to_string(k + 1) + " has no gold heads");
    tb.emplace_back(entries[k].sentence, *entries[k].tree);
  }
  if (epochs == 0) std::cerr << "warning: --epochs 0 writes an all-zero model\n";
  ParserTrainOptions opts;
  opts.epochs = epochs;
  opts.seed = seed;
  opts.lang = lang;
  std::cout << "epoch\ttokens\tcorrect\taccuracy\tupdates\n";
  opts.on_epoch = [](const ParserEpochStats& s) {
    std::cout << s.epoch << '\t' << s.tokens << '\t' << s.correct << '\t'
              << (s.tokens ? format_percent(s.correct, s.tokens) : std::string("-")) << '\t' << s.updates << '\n';
  };
  const auto model = train_parser(tb, opts);
  save_parser(out_dir, model);
  std::cout << "wrote " << store::parser_path(out_dir, lang).string() << '\n';
  return 0;
}

int cmd_train_projection(const BitextFlags& bx, int epochs, std::uint64_t seed, const std::string& out_dir) {
  if (epochs < 0) throw InputError("--epochs must be >= 0");
  const auto pairs = bx.load();
  for (std::size_t k = 0; k < pairs.size(); ++k)
    if (!pairs[k].src_tree || !pairs[k].tgt_tree)
      throw InputError("pair " + std::to_string(k + 1) + " lacks a tree on one side");
  std::cout << "direction\tlength_instances\tpath_instances\troot_edges\tunprojectable\ttoo_long\tthrough_root\t"
               "length_updates\tpath_updates\n";
  for (const Direction dir : {Direction::SrcToTgt, Direction::TgtToSrc}) {
    const std::string from = dir == Direction::SrcToTgt ? bx.src_lang : bx.tgt_lang;
    const std::string to = dir == Direction::SrcToTgt ? bx.tgt_lang : bx.src_lang;
    const auto set = extract_projection_training(pairs, dir);
    ProjectionModels m;
    ClassifierTrainStats ls, ps;
    if (!set.lengths.empty()) m.length = train_path_length(set.lengths, epochs, seed, &ls);
    if (!set.paths.empty()) m.path = train_path_predictor(set.paths, epochs, seed, &ps);
    save_projection(out_dir, from, to, m);
    std::cout << from << '-' << to << '\t' << set.lengths.size() << '\t' << set.paths.size() << '\t'
              << set.skips.root_edges << '\t' << set.skips.unprojectable << '\t' << set.skips.too_long << '\t'
              << set.skips.through_root << '\t' << ls.updates << '\t' << ps.updates << '\n';
    if (set.lengths.empty()) std::cerr << "warning: " << from << '-' << to << ": no projectable edges\n";
    if (ps.updates == 0) std::cerr << "warning: " << from << '-' << to << ": path predictors received no updates\n";
  }
  return 0;
}

struct Decoded {
  std::vector<DependencyTree> baseline_src, baseline_tgt, src, tgt;
  std::vector<AgreementResult> runs;
};

Decoded decode_all(const std::vector<BitextPair>& pairs, const LanguageModels& sm, const LanguageModels& tm,
                   const AgreementConfig& cfg, bool baseline_only) {
  Decoded d;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& p = pairs[k];
    try {
      p.alignment.check_bounds(p.src.size(), p.tgt.size());
    } catch (const std::exception& e) {
      throw InputError("pair " + std::to_string(k + 1) + ": " + e.what());
    }
    if (baseline_only) {
      d.baseline_src.push_back(parse(sm.parser, p.src));
      d.baseline_tgt.push_back(parse(tm.parser, p.tgt));
      d.src.push_back(d.baseline_src.back());
      d.tgt.push_back(d.baseline_tgt.back());
      continue;
    }
    auto r = coordinate_descent(p, sm, tm, cfg);
    d.baseline_src.push_back(r.baseline_src);
    d.baseline_tgt.push_back(r.baseline_tgt);
    d.src.push_back(r.src_tree);
    d.tgt.push_back(r.tgt_tree);
    d.runs.push_back(std::move(r));
  }
  return d;
}

std::string diagnostics_tsv(const Decoded& d, const std::string& src_lang, const std::string& tgt_lang) {
  std::string out = "pair\tround\tside\titeration\tdual_value\tdisagreements\ttree_changed\n";
  for (std::size_t k = 0; k < d.runs.size(); ++k)
    for (const auto& round : d.runs[k].rounds)
      for (const auto* side : {&round.src_projection, &round.tgt_projection}) {
        const std::string& lang = side == &round.src_projection ? src_lang : tgt_lang;
        for (const auto& rec : side->log)
          out += std::to_string(k + 1) + '\t' + std::to_string(round.iteration) + '\t' + lang + '\t' +
                 std::to_string(rec.iteration) + '\t' + format_weight(rec.dual_value) + '\t' +
                 std::to_string(rec.disagreements) + '\t' + (rec.tree_changed ? "1" : "0") + '\n';
      }
  return out;
}

int cmd_infer(const BitextFlags& bx, const AgreementConfig& cfg, bool baseline_only, const std::string& out_dir,
              const std::string& diagnostics) {
  const auto pairs = bx.load();
  const auto sm = load_language(bx.models, bx.src_lang, bx.tgt_lang);
  const auto tm = load_language(bx.models, bx.tgt_lang, bx.src_lang);
  const auto d = decode_all(pairs, sm, tm, cfg, baseline_only);
  write_file(fs::path(out_dir) / (bx.src_lang + ".conll"), conll_of(pairs, d.src, true));
  write_file(fs::path(out_dir) / (bx.tgt_lang + ".conll"), conll_of(pairs, d.tgt, false));
  if (!diagnostics.empty()) write_file(diagnostics, diagnostics_tsv(d, bx.src_lang, bx.tgt_lang));
  int changed_src = 0, changed_tgt = 0, stopped = 0;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    changed_src += !(d.src[k] == d.baseline_src[k]);
    changed_tgt += !(d.tgt[k] == d.baseline_tgt[k]);
  }
  for (const auto& r : d.runs) stopped += r.stopped;
  std::cout << "pairs\t" << pairs.size() << "\nmode\t" << (baseline_only ? "baseline" : "agreement")
            << "\nouter_iters\t" << cfg.outer_iters << "\nchanged_" << bx.src_lang << '\t' << changed_src
            << "\nchanged_" << bx.tgt_lang << '\t' << changed_tgt << "\nstopped_early\t" << stopped << '\n';
  return 0;
}

std::vector<DependencyTree> read_predictions(const std::string& path) {
  const auto entries = read_conll(read_file(path));
  std::vector<DependencyTree> out;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (!entries[k].tree) throw InputError(path + ": sentence " + std::to_string(k + 1) + " has no heads");
    out.push_back(*entries[k].tree);
  }
  return out;
}

int cmd_evaluate(const std::string& baseline, const std::string& dd, const std::string& gold, const std::string& tsv) {
  const auto instances = read_pp_gold(read_file(gold));
  if (instances.empty()) throw InputError("no instances");
  const auto b_entries = read_conll(read_file(baseline));
  const auto d_entries = read_conll(read_file(dd));
  if (b_entries.size() != d_entries.size())
    throw InputError("prediction files differ in sentence count (" + std::to_string(b_entries.size()) + " vs " +
                     std::to_string(d_entries.size()) + ")");
  std::vector<ParsedSentence> sents;
  for (const auto& e : b_entries) sents.push_back(e.sentence);
  validate_pp_instances(sents, instances);
  const auto report = evaluate(read_predictions(baseline), read_predictions(dd), instances);
  std::cout << render_table(report);
  if (!tsv.empty()) write_file(tsv, render_tsv(report));
  return 0;
}

int cmd_sweep(const BitextFlags& bx, const AgreementConfig& cfg, const std::string& gold, const std::string& iters,
              const std::string& out) {
  const auto budgets = parse_iters(iters);
  const auto instances = read_pp_gold(read_file(gold));
  if (instances.empty()) throw InputError("no instances");
  const auto pairs = bx.load();
  std::vector<ParsedSentence> sents;
  for (const auto& p : pairs) sents.push_back(p.src);
  validate_pp_instances(sents, instances);
  const auto sm = load_language(bx.models, bx.src_lang, bx.tgt_lang);
  const auto tm = load_language(bx.models, bx.tgt_lang, bx.src_lang);
  const auto rows = iteration_sweep(pairs, sm, tm, instances, cfg, budgets);
  const std::string text = render_sweep_tsv(rows);
  std::cout << text;
  if (!out.empty()) write_file(out, text);
  return 0;
}

// ---------------------------------------------------------------------------
// gen-fixtures

void write_fixture_dir(const fs::path& dir, const std::vector<BitextPair>& pairs, const std::vector<PPInstance>& gold,
                       const LanguageModels& sm, const LanguageModels& tm) {
  std::vector<DependencyTree> st, tt;
  std::vector<Alignment> al;
  for (const auto& p : pairs) {
    st.push_back(*p.src_tree);
    tt.push_back(*p.tgt_tree);
    al.push_back(p.alignment);
  }
  const std::string sl = pairs.front().src.lang(), tl = pairs.front().tgt.lang();
  write_file(dir / (sl + ".conll"), conll_of(pairs, st, true));
  write_file(dir / (tl + ".conll"), conll_of(pairs, tt, false));
  write_file(dir / (sl + "-" + tl + ".align"), write_alignments(al));
  if (!gold.empty()) write_file(dir / "pp.tsv", write_pp_gold(gold));
  save_language(dir / "models", sm, tl);
  save_language(dir / "models", tm, sl);
}

int cmd_gen_fixtures(const std::string& out_dir, std::uint64_t seed) {
  const fs::path root(out_dir);
  for (const auto& [name, fx] : {std::pair{"ppflip", fixtures::pp_flip_fixture()},
                                 std::pair{"multiround", fixtures::multi_round_fixture()},
                                 std::pair{"identity", fixtures::identity_fixture()}})
    write_fixture_dir(root / name, fx.pairs, fx.pp_gold, fx.src_models, fx.tgt_models);

  // 50 random pairs; parsers fitted to their gold trees, projection models left empty.
  const auto pairs = fixtures::random_bitext(50, seed);
  std::vector<std::pair<ParsedSentence, DependencyTree>> src_tb, tgt_tb;
  for (const auto& p : pairs) {
    src_tb.emplace_back(p.src, *p.src_tree);
    tgt_tb.emplace_back(p.tgt, *p.tgt_tree);
  }
  LanguageModels sm, tm;
  sm.parser = train_parser(src_tb, 5, seed);
  tm.parser = train_parser(tgt_tb, 5, seed);
  write_fixture_dir(root / "reduction", pairs, {}, sm, tm);

  const auto tb = fixtures::synthetic_treebank(200, seed);
  write_file(root / "treebank" / "en.conll", write_conll(tb));
  std::cout << "wrote fixtures under " << root.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bilingually constrained dependency parsing"};
  app.require_subcommand(1);

  std::string lang, treebank, out, gold, iters = "10,20,30,40,50,60", diagnostics, baseline, dd, tsv, config;
  int epochs = 10;
  std::uint64_t seed = 0;
  bool baseline_only = false;

  auto* tp = app.add_subcommand("train-parser", "train an edge-factored parser on a CoNLL-X treebank");
  tp->add_option("--lang", lang, "language id")->required();
  tp->add_option("--treebank", treebank, "CoNLL-X treebank")->required();
  auto* tp_epochs = tp->add_option("--epochs", epochs, "perceptron epochs (default 10)");
  auto* tp_seed = tp->add_option("--seed", seed, "random seed");
  tp->add_option("--config", config, "key = value configuration file");
  tp->add_option("--out", out, "model directory")->required();

  BitextFlags tpj_bx;
  auto* tpj = app.add_subcommand("train-projection", "train path-length and path classifiers in both directions");
  tpj_bx.add(tpj, false);
  auto* tpj_epochs = tpj->add_option("--epochs", epochs, "perceptron epochs (default 10)");
  auto* tpj_seed = tpj->add_option("--seed", seed, "random seed");
  tpj->add_option("--config", config, "key = value configuration file");
  tpj->add_option("--out", out, "model directory")->required();

  BitextFlags inf_bx;
  CommonAgreementFlags inf_ag;
  auto* inf = app.add_subcommand("infer", "decode parallel sentences with agreement constraints");
  inf_bx.add(inf);
  inf_ag.add(inf);
  inf->add_flag("--baseline-only", baseline_only, "plain maximum spanning tree decoding");
  inf->add_option("--diagnostics", diagnostics, "write per-iteration records to this TSV file");
  inf->add_option("--out", out, "output directory for <lang>.conll")->required();

  auto* ev = app.add_subcommand("evaluate", "PP-attachment accuracy of baseline and agreement output");
  ev->add_option("--baseline", baseline, "baseline predictions (CoNLL-X)")->required();
  ev->add_option("--dd", dd, "agreement predictions (CoNLL-X)")->required();
  ev->add_option("--gold", gold, "PP gold TSV")->required();
  ev->add_option("--tsv", tsv, "also write the table as TSV");

  BitextFlags sw_bx;
  CommonAgreementFlags sw_ag;
  auto* sw = app.add_subcommand("sweep", "PP accuracy as a function of the outer iteration budget");
  sw_bx.add(sw);
  sw_ag.add(sw);
  sw->add_option("--gold", gold, "PP gold TSV")->required();
  sw->add_option("--iters", iters, "comma-separated budgets (default 10,20,30,40,50,60)");
  sw->add_option("--out", out, "also write the TSV here");

  auto* gf = app.add_subcommand("gen-fixtures", "write the synthetic corpora and models used by the tests");
  gf->add_option("--out", out, "output directory")->required();
  gf->add_option("--seed", seed, "random seed (default 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::Error& e) {
    app.exit(e);
    return 2;
  }

  // Training commands read epochs/seed from the config file unless flagged.
  auto training_config = [&](CLI::Option* o_epochs, CLI::Option* o_seed) {
    if (config.empty()) return;
    const auto cf = ConfigFile::parse(read_file(config), kConfigKeys);
    if (!o_epochs->count())
      if (auto v = cf.get_int("epochs")) epochs = *v;
    if (!o_seed->count())
      if (auto v = cf.get_int("seed")) seed = static_cast<std::uint64_t>(*v);
  };

  try {
    if (*tp) {
      training_config(tp_epochs, tp_seed);
      return cmd_train_parser(lang, treebank, epochs, out, seed);
    }
    if (*tpj) {
      training_config(tpj_epochs, tpj_seed);
      return cmd_train_projection(tpj_bx, epochs, seed, out);
    }
    if (*inf) return cmd_infer(inf_bx, inf_ag.resolve(), baseline_only, out, diagnostics);
    if (*ev) return cmd_evaluate(baseline, dd, gold, tsv);
    if (*sw) return cmd_sweep(sw_bx, sw_ag.resolve(), gold, iters, out);
    if (*gf) return cmd_gen_fixtures(out, seed);
  } catch (const biparse::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const MissingFile& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 3;
}
