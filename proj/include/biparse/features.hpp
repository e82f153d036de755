#pragma once

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "biparse/corpus.hpp"

namespace biparse {

/// Sparse feature counts keyed by feature name. Zero entries are never stored,
/// and iteration is in name order so dot products are reproducible.
class FeatureVector {
 public:
  void add(std::string name, double value = 1.0) {
    if (value == 0.0) return;
    auto [it, inserted] = entries_.try_emplace(std::move(name), value);
    if (!inserted) {
      it->second += value;
      if (it->second == 0.0) entries_.erase(it);
    }
  }

  void add(const FeatureVector& other, double scale = 1.0) {
    for (const auto& [k, v] : other.entries_) add(k, scale * v);
  }

  double get(const std::string& name) const {
    auto it = entries_.find(name);
    return it == entries_.end() ? 0.0 : it->second;
  }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;

 private:
  std::map<std::string, double> entries_;
};

/// Linear weights over feature names; absent features weigh 0.
class WeightVector {
 public:
  double dot(const FeatureVector& f) const {
    double s = 0.0;
    for (const auto& [k, v] : f) {
      auto it = w_.find(k);
      if (it != w_.end()) s += it->second * v;
    }
    return s;
  }

  double get(const std::string& name) const {
    auto it = w_.find(name);
    return it == w_.end() ? 0.0 : it->second;
  }

  void set(const std::string& name, double value) {
    if (value == 0.0)
      w_.erase(name);
    else
      w_[name] = value;
  }

  void add(const FeatureVector& f, double scale) {
    for (const auto& [k, v] : f) set(k, get(k) + scale * v);
  }

  bool empty() const noexcept { return w_.empty(); }
  std::size_t size() const noexcept { return w_.size(); }

  /// Entries sorted by feature name.
  std::vector<std::pair<std::string, double>> sorted() const {
    std::vector<std::pair<std::string, double>> out(w_.begin(), w_.end());
    std::sort(out.begin(), out.end());
    return out;
  }

  friend bool operator==(const WeightVector& a, const WeightVector& b) { return a.w_ == b.w_; }

 private:
  std::unordered_map<std::string, double> w_;
};

/// Perceptron weights with lazy averaging: after `tick()` has been called T
/// times, `averaged()` equals the mean of the weight vector over those steps.
class AveragedWeights {
 public:
  const WeightVector& current() const noexcept { return w_; }

  void update(const FeatureVector& f, double scale) {
    w_.add(f, scale);
    acc_.add(f, scale * static_cast<double>(steps_));
  }

  void tick() { ++steps_; }
  long steps() const noexcept { return steps_; }

  WeightVector averaged() const {
    if (steps_ == 0) return WeightVector{};
    WeightVector out;
    const double c = static_cast<double>(steps_);
    for (const auto& [k, v] : w_.sorted()) out.set(k, v - acc_.get(k) / c);
    for (const auto& [k, v] : acc_.sorted())
      if (w_.get(k) == 0.0) out.set(k, -v / c);
    return out;
  }

 private:
  WeightVector w_;
  WeightVector acc_;
  long steps_ = 0;
};

/// Training-time feature interning; maps names to dense ids.
class FeatureInterner {
 public:
  using Sparse = std::vector<std::pair<int, double>>;

  int id(const std::string& name) {
    auto [it, inserted] = ids_.try_emplace(name, static_cast<int>(names_.size()));
    if (inserted) names_.push_back(name);
    return it->second;
  }

  Sparse intern(const FeatureVector& f) {
    Sparse out;
    out.reserve(f.size());
    for (const auto& [k, v] : f) out.emplace_back(id(k), v);
    return out;
  }

  const std::string& name(int id) const { return names_[static_cast<std::size_t>(id)]; }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::unordered_map<std::string, int> ids_;
  std::vector<std::string> names_;
};

/// Dense counterpart of AveragedWeights over interned ids.
class DenseAveragedWeights {
 public:
  double dot(const FeatureInterner::Sparse& f) const {
    double s = 0.0;
    for (const auto& [k, v] : f)
      if (static_cast<std::size_t>(k) < w_.size()) s += w_[static_cast<std::size_t>(k)] * v;
    return s;
  }

  void update(const FeatureInterner::Sparse& f, double scale) {
    for (const auto& [k, v] : f) {
      const auto i = static_cast<std::size_t>(k);
      if (i >= w_.size()) {
        w_.resize(i + 1, 0.0);
        acc_.resize(i + 1, 0.0);
      }
      w_[i] += scale * v;
      acc_[i] += scale * v * static_cast<double>(steps_);
    }
  }

  void tick() { ++steps_; }

  WeightVector averaged(const FeatureInterner& names) const {
    WeightVector out;
    if (steps_ == 0) return out;
    const double c = static_cast<double>(steps_);
    for (std::size_t i = 0; i < w_.size(); ++i) out.set(names.name(static_cast<int>(i)), w_[i] - acc_[i] / c);
    return out;
  }

 private:
  std::vector<double> w_;
  std::vector<double> acc_;
  long steps_ = 0;
};

// ---------------------------------------------------------------------------
// Distance buckets shared by the feature templates.

inline std::string distance_bucket(int signed_distance) {
  const int a = signed_distance < 0 ? -signed_distance : signed_distance;
  const char sign = signed_distance < 0 ? '-' : '+';
  if (a >= 5) return std::string(1, sign) + "5+";
  return std::string(1, sign) + std::to_string(a);
}

inline std::string abs_distance_bucket(int distance) {
  const int a = distance < 0 ? -distance : distance;
  return a >= 5 ? "5+" : std::to_string(a);
}

// ---------------------------------------------------------------------------
// Text serialisation: "feature<TAB>weight" lines after a one-line header.

inline std::string format_weight(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline double parse_weight(std::string_view s, std::size_t line) {
  const std::string tmp(s);
  char* end = nullptr;
  const double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw ParseError(line, "bad weight '" + tmp + "'");
  return v;
}

inline void write_weight_lines(std::ostream& os, const WeightVector& w, std::string_view prefix = {}) {
  for (const auto& [k, v] : w.sorted()) os << prefix << k << '\t' << format_weight(v) << '\n';
}

struct WeightFile {
  std::string header;
  std::vector<std::pair<std::string, double>> entries;
};

inline WeightFile read_weight_file(std::string_view text) {
  const auto all = detail::lines(text);
  if (all.empty()) throw ParseError(1, "empty model file");
  WeightFile out;
  out.header = std::string(all[0]);
  for (std::size_t ln = 1; ln < all.size(); ++ln) {
    if (all[ln].empty()) continue;
    const auto tab = all[ln].rfind('\t');
    if (tab == std::string_view::npos || tab == 0) throw ParseError(ln + 1, "expected feature<TAB>weight");
    out.entries.emplace_back(std::string(all[ln].substr(0, tab)), parse_weight(all[ln].substr(tab + 1), ln + 1));
  }
  return out;
}

}  // namespace biparse
