#pragma once

// Model directory layout:
//   <lang>.parser                 edge-factored parser
//   <from>-<to>.pathlen           path-length classifier, edges of <from> onto <to>
//   <from>-<to>.pathpred.k<K>     path predictor for K = 2..5

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "biparse/agreement.hpp"
#include "biparse/parser.hpp"
#include "biparse/projection.hpp"

namespace biparse {

/// Missing or unreadable input file.
class MissingFile : public std::runtime_error {
 public:
  explicit MissingFile(const std::filesystem::path& p) : std::runtime_error("cannot read " + p.string()) {}
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw MissingFile(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

namespace store {

inline std::filesystem::path parser_path(const std::filesystem::path& dir, const std::string& lang) {
  return dir / (lang + ".parser");
}

inline std::filesystem::path pathlen_path(const std::filesystem::path& dir, const std::string& from,
                                          const std::string& to) {
  return dir / (from + "-" + to + ".pathlen");
}

inline std::filesystem::path pathpred_path(const std::filesystem::path& dir, const std::string& from,
                                           const std::string& to, int k) {
  return dir / (from + "-" + to + ".pathpred.k" + std::to_string(k));
}

}  // namespace store

inline void save_parser(const std::filesystem::path& dir, const EdgeFactoredModel& m) {
  write_file(store::parser_path(dir, m.lang), write_model(m));
}

inline void save_projection(const std::filesystem::path& dir, const std::string& from, const std::string& to,
                            const ProjectionModels& m) {
  write_file(store::pathlen_path(dir, from, to), write_path_length_model(m.length));
  for (int k = 2; k <= kMaxPathLength; ++k)
    write_file(store::pathpred_path(dir, from, to, k), write_path_predictor_weights(m.path, k));
}

inline ProjectionModels load_projection(const std::filesystem::path& dir, const std::string& from,
                                        const std::string& to) {
  ProjectionModels m;
  m.length = read_path_length_model(read_file(store::pathlen_path(dir, from, to)));
  for (int k = 2; k <= kMaxPathLength; ++k) {
    const auto p = store::pathpred_path(dir, from, to, k);
    if (read_path_predictor_weights(read_file(p), m.path) != k)
      throw std::invalid_argument(p.string() + " holds weights for another path length");
  }
  return m;
}

/// Parser of `lang` plus its projection models onto `other`.
inline LanguageModels load_language(const std::filesystem::path& dir, const std::string& lang,
                                    const std::string& other) {
  LanguageModels lm;
  lm.parser = read_model(read_file(store::parser_path(dir, lang)));
  if (lm.parser.lang != lang)
    throw std::invalid_argument(store::parser_path(dir, lang).string() + " is a model for '" + lm.parser.lang + "'");
  lm.outgoing = load_projection(dir, lang, other);
  return lm;
}

inline void save_language(const std::filesystem::path& dir, const LanguageModels& lm, const std::string& other) {
  save_parser(dir, lm.parser);
  save_projection(dir, lm.parser.lang, other, lm.outgoing);
}

}  // namespace biparse
