#pragma once

// Line-oriented `key = value` configuration files.

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "biparse/agreement.hpp"
#include "biparse/corpus.hpp"

namespace biparse {

class ConfigFile {
 public:
  ConfigFile() = default;

  /// Blank lines and lines starting with '#' are ignored; keys must be
  /// unique and belong to `known` when it is nonempty.
  static ConfigFile parse(std::string_view text, const std::set<std::string>& known = {}) {
    ConfigFile out;
    const auto all = detail::lines(text);
    for (std::size_t ln = 0; ln < all.size(); ++ln) {
      const std::string line = trim(all[ln]);
      if (line.empty() || line.front() == '#') continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw ParseError(ln + 1, "expected 'key = value'");
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) throw ParseError(ln + 1, "empty key");
      if (!known.empty() && !known.count(key)) throw ParseError(ln + 1, "unknown key '" + key + "'");
      if (!out.values_.emplace(key, value).second) throw ParseError(ln + 1, "duplicate key '" + key + "'");
    }
    return out;
  }

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<int> get_int(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    const auto n = detail::to_int(*v);
    if (!n) throw std::invalid_argument("config key '" + key + "' needs an integer, got '" + *v + "'");
    return n;
  }

  std::optional<double> get_double(const std::string& key) const {
    const auto v = get(key);
    if (!v) return std::nullopt;
    try {
      std::size_t used = 0;
      const double d = std::stod(*v, &used);
      if (used != v->size()) throw std::invalid_argument("trailing");
      return d;
    } catch (const std::exception&) {
      throw std::invalid_argument("config key '" + key + "' needs a number, got '" + *v + "'");
    }
  }

  const std::map<std::string, std::string>& values() const noexcept { return values_; }

 private:
  static std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
  }

  std::map<std::string, std::string> values_;
};

inline StepSchedule parse_schedule(std::string_view s) {
  if (s == "constant") return StepSchedule::Constant;
  if (s == "harmonic") return StepSchedule::Harmonic;
  throw std::invalid_argument("schedule must be 'constant' or 'harmonic', got '" + std::string(s) + "'");
}

inline ConvergenceMode parse_convergence(std::string_view s) {
  if (s == "either") return ConvergenceMode::Either;
  if (s == "both") return ConvergenceMode::Both;
  throw std::invalid_argument("convergence must be 'either' or 'both', got '" + std::string(s) + "'");
}

/// Overlays the agreement keys present in `file` onto `cfg`.
inline void apply_config(const ConfigFile& file, AgreementConfig& cfg) {
  if (auto v = file.get_int("outer_iters")) cfg.outer_iters = *v;
  if (auto v = file.get_int("inner_iters")) cfg.inner_iters = *v;
  if (auto v = file.get_double("alpha0")) cfg.alpha0 = *v;
  if (auto v = file.get("schedule")) cfg.schedule = parse_schedule(*v);
  if (auto v = file.get("convergence")) cfg.convergence = parse_convergence(*v);
  if (auto v = file.get_int("seed")) {
    if (*v < 0) throw std::invalid_argument("seed must be >= 0");
    cfg.seed = static_cast<std::uint64_t>(*v);
  }
}

}  // namespace biparse
