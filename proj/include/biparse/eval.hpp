#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "biparse/agreement.hpp"
#include "biparse/corpus.hpp"

namespace biparse {

inline constexpr std::string_view kEnglishPrepositionTag = "IN";

/// One annotated preposition: sentence ids and token indices are 1-based.
struct PPInstance {
  int sentence_id = 0;
  int prep_index = 0;
  int gold_head = 0;

  friend bool operator==(const PPInstance&, const PPInstance&) = default;
};

/// Indices of tokens tagged as prepositions, in sentence order.
inline std::vector<int> find_pp_candidates(const ParsedSentence& s, std::string_view prep_tag = kEnglishPrepositionTag) {
  std::vector<int> out;
  for (const Token& t : s.tokens())
    if (t.pos == prep_tag) out.push_back(t.index);
  return out;
}

/// TSV: sentence_id, prep_index, gold_head; '#' lines and blank lines skipped.
inline std::vector<PPInstance> read_pp_gold(std::string_view text) {
  std::vector<PPInstance> out;
  const auto all = detail::lines(text);
  for (std::size_t ln = 0; ln < all.size(); ++ln) {
    const std::string_view line = all[ln];
    if (line.empty() || line.front() == '#') continue;
    const auto cols = detail::split(line, '\t');
    if (cols.size() != 3) throw ParseError(ln + 1, "expected sentence_id<TAB>prep_index<TAB>gold_head");
    const auto sid = detail::to_int(cols[0]), prep = detail::to_int(cols[1]), head = detail::to_int(cols[2]);
    if (!sid || !prep || !head) throw ParseError(ln + 1, "non-integer field in PP gold line");
    if (*sid < 1 || *prep < 1 || *head < 0) throw ParseError(ln + 1, "PP gold indices are 1-based (head may be 0)");
    out.push_back({*sid, *prep, *head});
  }
  return out;
}

inline std::string write_pp_gold(std::span<const PPInstance> instances) {
  std::string out = "# sentence_id\tprep_index\tgold_head\n";
  for (const auto& p : instances)
    out += std::to_string(p.sentence_id) + '\t' + std::to_string(p.prep_index) + '\t' + std::to_string(p.gold_head) + '\n';
  return out;
}

/// Checks each instance against its sentence: ids resolve, indices in range,
/// and the annotated token carries the preposition tag.
inline void validate_pp_instances(std::span<const ParsedSentence> sentences, std::span<const PPInstance> instances,
                                  std::string_view prep_tag = kEnglishPrepositionTag) {
  for (const auto& p : instances) {
    if (p.sentence_id < 1 || p.sentence_id > static_cast<int>(sentences.size()))
      throw std::invalid_argument("PP instance refers to missing sentence " + std::to_string(p.sentence_id));
    const ParsedSentence& s = sentences[static_cast<std::size_t>(p.sentence_id - 1)];
    if (p.prep_index > s.size() || p.gold_head > s.size() || p.gold_head == p.prep_index)
      throw std::invalid_argument("PP instance indices out of range in sentence " + std::to_string(p.sentence_id));
    if (s.token(p.prep_index).pos != prep_tag)
      throw std::invalid_argument("token " + std::to_string(p.prep_index) + " of sentence " +
                                  std::to_string(p.sentence_id) + " is not tagged " + std::string(prep_tag));
  }
}

struct AttachmentScore {
  int total = 0;
  int correct = 0;
  std::vector<bool> verdicts;  // aligned with the instances
};

inline AttachmentScore attachment_accuracy(std::span<const DependencyTree> predictions,
                                           std::span<const PPInstance> instances) {
  AttachmentScore out;
  for (const auto& p : instances) {
    if (p.sentence_id < 1 || p.sentence_id > static_cast<int>(predictions.size()))
      throw std::invalid_argument("no prediction for sentence " + std::to_string(p.sentence_id));
    const DependencyTree& t = predictions[static_cast<std::size_t>(p.sentence_id - 1)];
    if (p.prep_index < 1 || p.prep_index > t.size())
      throw std::invalid_argument("preposition index " + std::to_string(p.prep_index) + " out of range in sentence " +
                                  std::to_string(p.sentence_id));
    const bool ok = t.head(p.prep_index) == p.gold_head;
    out.verdicts.push_back(ok);
    ++out.total;
    if (ok) ++out.correct;
  }
  return out;
}

/// 100 * correct / total rounded half-up to two decimals, from integers.
inline std::string format_percent(long correct, long total) {
  if (total <= 0) throw std::invalid_argument("percentage of an empty set");
  const long hundredths = (20000 * correct + total) / (2 * total);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%ld.%02ld", hundredths / 100, hundredths % 100);
  return buf;
}

inline double percent(long correct, long total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

/// Paired evaluation of the baseline parser and the agreement decoder on the
/// same instance set.
struct EvalReport {
  int total = 0;
  int correct_baseline = 0;
  int correct_dd = 0;
  std::vector<bool> verdicts_baseline;
  std::vector<bool> verdicts_dd;

  std::string accuracy_baseline() const { return format_percent(correct_baseline, total); }
  std::string accuracy_dd() const { return format_percent(correct_dd, total); }
};

inline EvalReport evaluate(std::span<const DependencyTree> baseline, std::span<const DependencyTree> dd,
                           std::span<const PPInstance> instances) {
  if (instances.empty()) throw std::invalid_argument("no instances");
  const auto b = attachment_accuracy(baseline, instances);
  const auto d = attachment_accuracy(dd, instances);
  return EvalReport{b.total, b.correct, d.correct, b.verdicts, d.verdicts};
}

/// Three-row comparison table (total, correct, accuracy) for console output.
inline std::string render_table(const EvalReport& r) {
  const std::vector<std::array<std::string, 3>> rows = {
      {"", "Baseline MST", "Agreement DD"},
      {"PP attachments", std::to_string(r.total), std::to_string(r.total)},
      {"Correctly attached", std::to_string(r.correct_baseline), std::to_string(r.correct_dd)},
      {"Accuracy (%)", r.accuracy_baseline(), r.accuracy_dd()},
  };
  std::array<std::size_t, 3> width{};
  for (const auto& row : rows)
    for (std::size_t c = 0; c < 3; ++c) width[c] = std::max(width[c], row[c].size());
  std::string out;
  auto rule = [&] {
    out += '+';
    for (auto w : width) out += std::string(w + 2, '-') + '+';
    out += '\n';
  };
  rule();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out += '|';
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& cell = rows[i][c];
      out += ' ' + cell + std::string(width[c] - cell.size(), ' ') + " |";
    }
    out += '\n';
    if (i == 0) rule();
  }
  rule();
  return out;
}

inline std::string render_tsv(const EvalReport& r) {
  std::string out = "metric\tbaseline\tdd\n";
  out += "total\t" + std::to_string(r.total) + '\t' + std::to_string(r.total) + '\n';
  out += "correct\t" + std::to_string(r.correct_baseline) + '\t' + std::to_string(r.correct_dd) + '\n';
  out += "accuracy\t" + r.accuracy_baseline() + '\t' + r.accuracy_dd() + '\n';
  return out;
}

// ---------------------------------------------------------------------------
// Iteration sweep

struct SweepRow {
  int outer_iters = 0;
  int correct = 0;
  int total = 0;
  std::string accuracy;
};

/// Source-side (English) trees after `n` outer rounds, read off a longer run:
/// a run with budget n is a prefix of any run with a larger budget.
inline DependencyTree src_tree_after(const AgreementResult& r, int n) {
  if (r.rounds.empty()) return r.baseline_src;
  const auto last = std::min<std::size_t>(static_cast<std::size_t>(n), r.rounds.size());
  return r.rounds[last - 1].src_tree;
}

/// PP accuracy of the source side for every outer-iteration budget in
/// `budgets`. Each pair is decoded once with the largest budget.
inline std::vector<SweepRow> iteration_sweep(std::span<const BitextPair> testset, const LanguageModels& src_models,
                                             const LanguageModels& tgt_models, std::span<const PPInstance> instances,
                                             const AgreementConfig& base_cfg, std::span<const int> budgets) {
  if (budgets.empty()) throw std::invalid_argument("no iteration budgets given");
  int max_n = 0;
  for (int n : budgets) {
    if (n < 1) throw std::invalid_argument("iteration budgets must be >= 1");
    max_n = std::max(max_n, n);
  }
  AgreementConfig cfg = base_cfg;
  cfg.outer_iters = max_n;
  std::vector<AgreementResult> runs;
  runs.reserve(testset.size());
  for (const auto& p : testset) runs.push_back(coordinate_descent(p, src_models, tgt_models, cfg));

  std::vector<SweepRow> rows;
  for (int n : budgets) {
    std::vector<DependencyTree> preds;
    preds.reserve(runs.size());
    for (const auto& r : runs) preds.push_back(src_tree_after(r, n));
    const auto score = attachment_accuracy(preds, instances);
    rows.push_back({n, score.correct, score.total, format_percent(score.correct, score.total)});
  }
  return rows;
}

inline std::string render_sweep_tsv(std::span<const SweepRow> rows) {
  std::string out = "N\tcorrect\taccuracy\n";
  for (const auto& r : rows) out += std::to_string(r.outer_iters) + '\t' + std::to_string(r.correct) + '\t' + r.accuracy + '\n';
  return out;
}

}  // namespace biparse
