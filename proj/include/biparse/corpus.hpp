#pragma once

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biparse {

/// Raised by the text readers; carries the 1-based line number of the fault.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

struct Token {
  int index = 0;
  std::string form;
  std::string pos;

  friend bool operator==(const Token&, const Token&) = default;
};

inline constexpr std::string_view kRootForm = "<root>";
inline constexpr std::string_view kRootPos = "<root>";

/// A POS-tagged sentence. Position 0 is the artificial root and is never
/// stored as a token; tokens carry indices 1..n in order.
class ParsedSentence {
 public:
  ParsedSentence() = default;

  ParsedSentence(std::string lang, std::vector<Token> tokens)
      : lang_(std::move(lang)), tokens_(std::move(tokens)) {
    if (tokens_.empty()) throw std::invalid_argument("sentence must have at least one token");
    for (std::size_t k = 0; k < tokens_.size(); ++k) {
      const Token& t = tokens_[k];
      if (t.index != static_cast<int>(k) + 1)
        throw std::invalid_argument("token indices must be 1..n in order (got " +
                                    std::to_string(t.index) + " at position " +
                                    std::to_string(k + 1) + ")");
      if (t.form.empty()) throw std::invalid_argument("empty form at token " + std::to_string(t.index));
      if (t.pos.empty()) throw std::invalid_argument("empty POS at token " + std::to_string(t.index));
    }
  }

  /// Convenience: builds tokens 1..n from parallel form/POS lists.
  static ParsedSentence from_words(std::string lang, const std::vector<std::string>& forms,
                                   const std::vector<std::string>& tags) {
    if (forms.size() != tags.size()) throw std::invalid_argument("forms/tags length mismatch");
    std::vector<Token> toks;
    toks.reserve(forms.size());
    for (std::size_t k = 0; k < forms.size(); ++k)
      toks.push_back(Token{static_cast<int>(k) + 1, forms[k], tags[k]});
    return ParsedSentence(std::move(lang), std::move(toks));
  }

  const std::string& lang() const noexcept { return lang_; }
  int size() const noexcept { return static_cast<int>(tokens_.size()); }
  const std::vector<Token>& tokens() const noexcept { return tokens_; }

  const Token& token(int i) const {
    if (i < 1 || i > size()) throw std::out_of_range("token index " + std::to_string(i));
    return tokens_[static_cast<std::size_t>(i - 1)];
  }

  /// Form of position i; the root reads as "<root>".
  std::string_view form(int i) const { return i == 0 ? kRootForm : std::string_view(token(i).form); }
  std::string_view pos(int i) const { return i == 0 ? kRootPos : std::string_view(token(i).pos); }

  friend bool operator==(const ParsedSentence&, const ParsedSentence&) = default;

 private:
  std::string lang_;
  std::vector<Token> tokens_;
};

/// Returns a description of why `heads` (heads[d-1] is the head of d) is not
/// a spanning arborescence rooted at 0, or nullopt when it is one.
inline std::optional<std::string> arborescence_violation(std::span<const int> heads) {
  const int n = static_cast<int>(heads.size());
  if (n == 0) return "empty tree";
  for (int d = 1; d <= n; ++d) {
    const int h = heads[static_cast<std::size_t>(d - 1)];
    if (h < 0 || h > n) return "head of " + std::to_string(d) + " out of range: " + std::to_string(h);
    if (h == d) return "token " + std::to_string(d) + " is its own head";
  }
  // 0 = unvisited, 1 = on current walk, 2 = known to reach root
  std::vector<int> state(static_cast<std::size_t>(n) + 1, 0);
  state[0] = 2;
  for (int start = 1; start <= n; ++start) {
    int v = start;
    while (state[static_cast<std::size_t>(v)] == 0) {
      state[static_cast<std::size_t>(v)] = 1;
      v = heads[static_cast<std::size_t>(v - 1)];
    }
    if (state[static_cast<std::size_t>(v)] == 1) return "cycle through token " + std::to_string(v);
    for (v = start; state[static_cast<std::size_t>(v)] == 1; v = heads[static_cast<std::size_t>(v - 1)])
      state[static_cast<std::size_t>(v)] = 2;
  }
  return std::nullopt;
}

/// Head assignment over a sentence of n tokens; always a valid arborescence
/// rooted at 0. Several root children are allowed.
class DependencyTree {
 public:
  DependencyTree() = default;

  explicit DependencyTree(std::vector<int> heads) : heads_(std::move(heads)) {
    if (auto why = arborescence_violation(heads_)) throw std::invalid_argument("invalid tree: " + *why);
  }

  int size() const noexcept { return static_cast<int>(heads_.size()); }
  const std::vector<int>& heads() const noexcept { return heads_; }

  int head(int dep) const {
    if (dep < 1 || dep > size()) throw std::out_of_range("dependent index " + std::to_string(dep));
    return heads_[static_cast<std::size_t>(dep - 1)];
  }

  bool has_edge(int h, int d) const { return d >= 1 && d <= size() && head(d) == h; }

  /// Undirected adjacency: either orientation is a tree edge.
  bool connects(int a, int b) const { return has_edge(a, b) || has_edge(b, a); }

  int root_children() const {
    return static_cast<int>(std::count(heads_.begin(), heads_.end(), 0));
  }

  bool single_root() const { return root_children() == 1; }

  /// (head, dependent) pairs ordered by dependent.
  std::vector<std::pair<int, int>> edges() const {
    std::vector<std::pair<int, int>> out;
    out.reserve(heads_.size());
    for (int d = 1; d <= size(); ++d) out.emplace_back(head(d), d);
    return out;
  }

  friend bool operator==(const DependencyTree&, const DependencyTree&) = default;

 private:
  std::vector<int> heads_;
};

/// Many-to-many word alignment, 1-based on both sides.
class Alignment {
 public:
  using Link = std::pair<int, int>;

  Alignment() = default;

  explicit Alignment(const std::vector<Link>& links) {
    for (const auto& [i, j] : links) {
      if (i < 1 || j < 1) throw std::invalid_argument("alignment indices are 1-based");
      links_.insert({i, j});
    }
  }

  const std::set<Link>& links() const noexcept { return links_; }
  bool empty() const noexcept { return links_.empty(); }
  std::size_t size() const noexcept { return links_.size(); }
  bool contains(int i, int j) const { return links_.count({i, j}) != 0; }

  /// Throws unless every link lies in [1..n_src] x [1..n_tgt].
  void check_bounds(int n_src, int n_tgt) const {
    for (const auto& [i, j] : links_)
      if (i > n_src || j > n_tgt)
        throw std::invalid_argument("alignment link " + std::to_string(i) + "-" + std::to_string(j) +
                                    " outside " + std::to_string(n_src) + "x" + std::to_string(n_tgt));
  }

  /// Smallest target index aligned to source index i.
  std::optional<int> first_target(int i) const {
    auto it = links_.lower_bound({i, 0});
    if (it == links_.end() || it->first != i) return std::nullopt;
    return it->second;
  }

  Alignment reversed() const {
    Alignment out;
    for (const auto& [i, j] : links_) out.links_.insert({j, i});
    return out;
  }

  static Alignment identity(int n) {
    Alignment out;
    for (int k = 1; k <= n; ++k) out.links_.insert({k, k});
    return out;
  }

  friend bool operator==(const Alignment&, const Alignment&) = default;

 private:
  std::set<Link> links_;
};

/// Which side of a bitext pair plays the source role in a projection.
enum class Direction { SrcToTgt, TgtToSrc };

struct BitextPair {
  ParsedSentence src;
  ParsedSentence tgt;
  Alignment alignment;  // (src index, tgt index)
  std::optional<DependencyTree> src_tree;
  std::optional<DependencyTree> tgt_tree;

  BitextPair() = default;

  BitextPair(ParsedSentence s, ParsedSentence t, Alignment a,
             std::optional<DependencyTree> s_tree = std::nullopt,
             std::optional<DependencyTree> t_tree = std::nullopt)
      : src(std::move(s)), tgt(std::move(t)), alignment(std::move(a)),
        src_tree(std::move(s_tree)), tgt_tree(std::move(t_tree)) {
    alignment.check_bounds(src.size(), tgt.size());
    if (src_tree && src_tree->size() != src.size())
      throw std::invalid_argument("source tree length does not match source sentence");
    if (tgt_tree && tgt_tree->size() != tgt.size())
      throw std::invalid_argument("target tree length does not match target sentence");
  }
};

// ---------------------------------------------------------------------------
// Text formats

namespace detail {

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

/// Splits into lines; a trailing newline does not open an extra line.
inline std::vector<std::string_view> lines(std::string_view text) {
  if (text.empty()) return {};
  auto out = split(text, '\n');
  if (!text.empty() && text.back() == '\n') out.pop_back();
  for (auto& l : out)
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  return out;
}

inline std::optional<int> to_int(std::string_view s) {
  int v = 0;
  if (s.empty()) return std::nullopt;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace detail

struct ConllEntry {
  ParsedSentence sentence;
  std::optional<DependencyTree> tree;
};

/// Reads CoNLL-X. Uses ID, FORM, POSTAG and HEAD; the other columns are
/// accepted and dropped. A "_" HEAD anywhere in a block leaves its tree absent.
inline std::vector<ConllEntry> read_conll(std::string_view text, const std::string& lang = "") {
  std::vector<ConllEntry> out;
  std::vector<Token> toks;
  std::vector<std::optional<int>> heads;
  std::vector<std::size_t> head_lines;
  std::size_t block_start = 0;

  auto flush = [&]() {
    if (toks.empty()) return;
    const int n = static_cast<int>(toks.size());
    bool annotated = true;
    for (std::size_t k = 0; k < heads.size(); ++k) {
      if (!heads[k]) {
        annotated = false;
        continue;
      }
      const int h = *heads[k];
      if (h < 0 || h > n) throw ParseError(head_lines[k], "HEAD " + std::to_string(h) + " out of range 0.." + std::to_string(n));
      if (h == static_cast<int>(k) + 1) throw ParseError(head_lines[k], "token is its own head");
    }
    std::optional<DependencyTree> tree;
    if (annotated) {
      std::vector<int> hv;
      hv.reserve(heads.size());
      for (const auto& h : heads) hv.push_back(*h);
      if (auto why = arborescence_violation(hv)) throw ParseError(block_start, "sentence is not a tree: " + *why);
      tree = DependencyTree(std::move(hv));
    }
    out.push_back(ConllEntry{ParsedSentence(lang, std::move(toks)), std::move(tree)});
    toks.clear();
    heads.clear();
    head_lines.clear();
  };

  const auto all = detail::lines(text);
  for (std::size_t ln = 0; ln < all.size(); ++ln) {
    const std::size_t line_no = ln + 1;
    const std::string_view line = all[ln];
    if (line.empty()) {
      flush();
      continue;
    }
    if (toks.empty() && line.front() == '#') continue;
    const auto cols = detail::split(line, '\t');
    if (cols.size() != 10)
      throw ParseError(line_no, "expected 10 tab-separated columns, found " + std::to_string(cols.size()));
    if (toks.empty()) block_start = line_no;
    const auto id = detail::to_int(cols[0]);
    const int expected = static_cast<int>(toks.size()) + 1;
    if (!id || *id != expected)
      throw ParseError(line_no, "ID '" + std::string(cols[0]) + "' breaks the 1..n sequence (expected " +
                                    std::to_string(expected) + ")");
    if (cols[1].empty() || cols[4].empty()) throw ParseError(line_no, "empty FORM or POSTAG");
    toks.push_back(Token{*id, std::string(cols[1]), std::string(cols[4])});
    if (cols[6] == "_") {
      heads.emplace_back(std::nullopt);
    } else {
      const auto h = detail::to_int(cols[6]);
      if (!h) throw ParseError(line_no, "HEAD '" + std::string(cols[6]) + "' is not an integer");
      heads.emplace_back(*h);
    }
    head_lines.push_back(line_no);
  }
  flush();
  return out;
}

/// Writes CoNLL-X with ID, FORM, POSTAG, HEAD filled and every other column "_".
inline std::string write_conll(std::span<const std::pair<ParsedSentence, DependencyTree>> entries) {
  std::string out;
  for (const auto& [sent, tree] : entries) {
    if (tree.size() != sent.size())
      throw std::invalid_argument("tree has " + std::to_string(tree.size()) + " heads for a sentence of " +
                                  std::to_string(sent.size()) + " tokens");
    for (const Token& t : sent.tokens()) {
      out += std::to_string(t.index);
      out += '\t';
      out += t.form;
      out += "\t_\t_\t";
      out += t.pos;
      out += "\t_\t";
      out += std::to_string(tree.head(t.index));
      out += "\t_\t_\t_\n";
    }
    out += '\n';
  }
  return out;
}

/// Reads Pharaoh "i-j" lines (0-based in the file); line k is sentence pair k.
inline std::vector<Alignment> read_alignments(std::string_view text) {
  std::vector<Alignment> out;
  const auto all = detail::lines(text);
  for (std::size_t ln = 0; ln < all.size(); ++ln) {
    std::vector<Alignment::Link> links;
    std::string_view line = all[ln];
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
      if (pos >= line.size()) break;
      std::size_t end = pos;
      while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
      const std::string_view tok = line.substr(pos, end - pos);
      pos = end;
      const auto dash = tok.find('-');
      if (dash == 0) throw ParseError(ln + 1, "negative index in '" + std::string(tok) + "'");
      if (dash == std::string_view::npos) throw ParseError(ln + 1, "malformed alignment pair '" + std::string(tok) + "'");
      const std::string_view rhs = tok.substr(dash + 1);
      if (!rhs.empty() && rhs.front() == '-') throw ParseError(ln + 1, "negative index in '" + std::string(tok) + "'");
      const auto i = detail::to_int(tok.substr(0, dash));
      const auto j = detail::to_int(rhs);
      if (!i || !j) throw ParseError(ln + 1, "malformed alignment pair '" + std::string(tok) + "'");
      links.emplace_back(*i + 1, *j + 1);
    }
    out.emplace_back(links);
  }
  return out;
}

inline std::string write_alignments(std::span<const Alignment> alignments) {
  std::string out;
  for (const Alignment& a : alignments) {
    bool first = true;
    for (const auto& [i, j] : a.links()) {
      if (!first) out += ' ';
      first = false;
      out += std::to_string(i - 1);
      out += '-';
      out += std::to_string(j - 1);
    }
    out += '\n';
  }
  return out;
}

}  // namespace biparse
