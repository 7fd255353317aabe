#pragma once

// Shared test helpers: scratch directories, file builders, and the
// brute-force metric oracle (independent set counting, no shared code with
// copred::evaluate).

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "copred/dataset.hpp"

namespace test_util {

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("copred-" + tag + "-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter_++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  static inline int counter_ = 0;
  std::filesystem::path path_;
};

inline void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& line : lines) out << line << '\n';
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

inline copred::TypeVocabulary simple_vocab(int t) {
  std::vector<std::string> paths;
  for (int i = 0; i < t; ++i) paths.push_back("/type" + std::to_string(i));
  return copred::TypeVocabulary::from_paths(paths);
}

struct OracleMetrics {
  double strict = 0, macro_p = 0, macro_r = 0, macro_f1 = 0;
  double micro_p = 0, micro_r = 0, micro_f1 = 0;
};

// Deliberately naive: plain int-vector label lists, quadratic membership
// scans, and formulas written out straight from their definitions.
inline OracleMetrics oracle_evaluate(const std::vector<std::vector<int>>& pred,
                                     const std::vector<std::vector<int>>& gold) {
  OracleMetrics m;
  const std::size_t n = pred.size();
  if (n == 0) return m;
  long inter_total = 0, pred_total = 0, gold_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int inter = 0;
    for (int a : pred[i]) {
      for (int b : gold[i]) {
        if (a == b) {
          ++inter;
          break;
        }
      }
    }
    bool equal = pred[i].size() == gold[i].size();
    if (equal) {
      for (int a : pred[i]) {
        bool found = false;
        for (int b : gold[i]) {
          if (a == b) found = true;
        }
        if (!found) equal = false;
      }
    }
    if (equal) m.strict += 1.0;
    if (pred[i].empty()) {
      m.macro_p += gold[i].empty() ? 1.0 : 0.0;
    } else {
      m.macro_p += static_cast<double>(inter) / static_cast<double>(pred[i].size());
    }
    if (gold[i].empty()) {
      m.macro_r += pred[i].empty() ? 1.0 : 0.0;
    } else {
      m.macro_r += static_cast<double>(inter) / static_cast<double>(gold[i].size());
    }
    inter_total += inter;
    pred_total += static_cast<long>(pred[i].size());
    gold_total += static_cast<long>(gold[i].size());
  }
  m.strict /= static_cast<double>(n);
  m.macro_p /= static_cast<double>(n);
  m.macro_r /= static_cast<double>(n);
  m.macro_f1 = (m.macro_p + m.macro_r) > 0 ? 2 * m.macro_p * m.macro_r / (m.macro_p + m.macro_r) : 0;
  m.micro_p = pred_total > 0 ? static_cast<double>(inter_total) / static_cast<double>(pred_total) : 0;
  m.micro_r = gold_total > 0 ? static_cast<double>(inter_total) / static_cast<double>(gold_total) : 0;
  m.micro_f1 = (m.micro_p + m.micro_r) > 0 ? 2 * m.micro_p * m.micro_r / (m.micro_p + m.micro_r) : 0;
  return m;
}

inline std::vector<std::vector<int>> to_id_lists(const std::vector<copred::LabelSet>& sets) {
  std::vector<std::vector<int>> out;
  out.reserve(sets.size());
  for (const auto& s : sets) out.push_back(s.ids());
  return out;
}

// Oracle macro F1 between two datasets' label sets (for noise baselines).
inline double oracle_macro_f1(const copred::Dataset& a, const copred::Dataset& b) {
  std::vector<std::vector<int>> pa, pb;
  for (const auto& ex : a.examples) pa.push_back(ex.labels.ids());
  for (const auto& ex : b.examples) pb.push_back(ex.labels.ids());
  return oracle_evaluate(pa, pb).macro_f1;
}

template <class Fn>
std::string error_message(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace test_util
