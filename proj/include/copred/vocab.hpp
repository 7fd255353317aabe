#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "copred/common.hpp"

namespace copred {

// Splits a type path into lowercase words: "/organization/company/news"
// -> {organization, company, news}. Segments are further split on '_' and
// camelCase boundaries ("sportsTeam" -> {sports, team}).
inline std::vector<std::string> path_words(const std::string& path) {
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) {
      words.push_back(to_lower(current));
      current.clear();
    }
  };
  for (std::size_t i = 0; i < path.size(); ++i) {
    char c = path[i];
    if (c == '/' || c == '_' || c == '-' || c == ' ') {
      flush();
    } else if (std::isupper(static_cast<unsigned char>(c)) && !current.empty() &&
               std::islower(static_cast<unsigned char>(current.back()))) {
      flush();
      current.push_back(c);
    } else {
      current.push_back(c);
    }
  }
  flush();
  return words;
}

// The fixed fine-grained type inventory. Ordering follows the source file;
// ids are dense 0..t-1.
class TypeVocabulary {
 public:
  TypeVocabulary() = default;

  // `origin` labels error messages (file name or "<memory>").
  static TypeVocabulary from_paths(const std::vector<std::string>& paths,
                                   const std::string& origin = "<memory>") {
    if (paths.empty()) {
      fail_validation("type vocabulary ", origin, " is empty");
    }
    TypeVocabulary vocab;
    vocab.types_.reserve(paths.size());
    for (std::size_t line = 0; line < paths.size(); ++line) {
      const std::string& path = paths[line];
      if (path.empty() || path[0] != '/') {
        fail_validation(origin, ":", line + 1, ": type path must be non-empty and begin with '/', got \"",
                        path, "\"");
      }
      int d = depth_of(path, origin, line + 1);
      if (vocab.index_.count(path)) {
        fail_validation(origin, ":", line + 1, ": duplicate type path \"", path, "\"");
      }
      vocab.index_.emplace(path, static_cast<int>(vocab.types_.size()));
      vocab.types_.push_back(path);
      vocab.depth_.push_back(d);
    }
    return vocab;
  }

  std::size_t size() const { return types_.size(); }
  const std::vector<std::string>& types() const { return types_; }
  const std::string& path_of(int id) const { return types_.at(static_cast<std::size_t>(id)); }
  int depth(int id) const { return depth_.at(static_cast<std::size_t>(id)); }

  std::optional<int> id_of(const std::string& path) const {
    auto it = index_.find(path);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const std::string& path) const { return index_.count(path) > 0; }

  // Id of the immediate parent path, when that path is itself in the
  // vocabulary ("/organization/company" -> "/organization").
  std::optional<int> parent_of(int id) const {
    const std::string& path = path_of(id);
    auto pos = path.find_last_of('/');
    if (pos == 0 || pos == std::string::npos) return std::nullopt;
    return id_of(path.substr(0, pos));
  }

  bool operator==(const TypeVocabulary& other) const { return types_ == other.types_; }

 private:
  static int depth_of(const std::string& path, const std::string& origin, std::size_t line) {
    int depth = 0;
    std::size_t i = 0;
    while (i < path.size()) {
      if (path[i] != '/') fail_validation(origin, ":", line, ": malformed type path \"", path, "\"");
      std::size_t start = ++i;
      while (i < path.size() && path[i] != '/') ++i;
      if (i == start) {
        fail_validation(origin, ":", line, ": empty segment in type path \"", path, "\"");
      }
      ++depth;
    }
    return depth;
  }

  std::vector<std::string> types_;
  std::unordered_map<std::string, int> index_;
  std::vector<int> depth_;
};

// One type path per line, UTF-8. Blank or duplicate lines are hard errors.
inline TypeVocabulary load_type_vocabulary(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_validation("cannot open type vocabulary file: ", path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return TypeVocabulary::from_paths(lines, path);
}

inline void save_type_vocabulary(const TypeVocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_runtime("cannot write type vocabulary file: ", path);
  for (const auto& t : vocab.types()) out << t << '\n';
}

}  // namespace copred
