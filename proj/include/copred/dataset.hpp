#pragma once

#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copred/common.hpp"
#include "copred/labels.hpp"
#include "copred/vocab.hpp"

namespace copred {

using json = nlohmann::json;

// One training instance. Contexts and mention are token sequences; labels
// hold type ids valid under the owning dataset's vocabulary. The label set
// may be empty only for prediction inputs, never for training data.
struct MentionExample {
  std::string id;
  std::vector<std::string> left_context;
  std::vector<std::string> mention;
  std::vector<std::string> right_context;
  LabelSet labels;

  bool operator==(const MentionExample&) const = default;
};

struct Dataset {
  std::vector<MentionExample> examples;
  TypeVocabulary vocabulary;
  std::string split_name;

  std::size_t size() const { return examples.size(); }
};

namespace detail {

inline MentionExample parse_record(const json& rec, const TypeVocabulary& vocab,
                                   const std::string& origin, std::size_t line) {
  auto context = [&](const char* field) -> std::string {
    if (!rec.contains(field) || !rec[field].is_string()) {
      fail_validation(origin, ":", line, ": missing or non-string field \"", field, "\"");
    }
    return rec[field].get<std::string>();
  };
  MentionExample ex;
  ex.mention = tokenize(context("mention"));
  if (ex.mention.empty()) {
    fail_validation(origin, ":", line, ": mention must be non-empty");
  }
  ex.left_context = tokenize(context("left_context"));
  ex.right_context = tokenize(context("right_context"));
  if (rec.contains("id")) {
    if (!rec["id"].is_string()) fail_validation(origin, ":", line, ": \"id\" must be a string");
    ex.id = rec["id"].get<std::string>();
  }
  if (!rec.contains("labels") || !rec["labels"].is_array()) {
    fail_validation(origin, ":", line, ": missing or non-array field \"labels\"");
  }
  for (const auto& label : rec["labels"]) {
    if (!label.is_string()) fail_validation(origin, ":", line, ": labels must be strings");
    const std::string path = label.get<std::string>();
    auto id = vocab.id_of(path);
    if (!id) {
      fail_validation(origin, ":", line, ": unknown type \"", path, "\"");
    }
    ex.labels.insert(*id);
  }
  return ex;
}

}  // namespace detail

// Line-delimited JSON records with fields mention, left_context,
// right_context, labels and optional id. Unknown label strings are hard
// errors: silently dropping them would corrupt noise statistics.
inline Dataset load_dataset(const std::string& path, const TypeVocabulary& vocab,
                            const std::string& split_name = "") {
  std::ifstream in(path);
  if (!in) fail_validation("cannot open dataset file: ", path);
  Dataset ds;
  ds.vocabulary = vocab;
  ds.split_name = split_name.empty() ? path : split_name;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      fail_validation(path, ":", line_no, ": malformed record: ", e.what());
    }
    if (!rec.is_object()) fail_validation(path, ":", line_no, ": record must be a JSON object");
    ds.examples.push_back(detail::parse_record(rec, vocab, path, line_no));
  }
  return ds;
}

inline json example_to_json(const MentionExample& ex, const TypeVocabulary& vocab) {
  json rec;
  if (!ex.id.empty()) rec["id"] = ex.id;
  rec["mention"] = join_tokens(ex.mention);
  rec["left_context"] = join_tokens(ex.left_context);
  rec["right_context"] = join_tokens(ex.right_context);
  json labels = json::array();
  for (int id : ex.labels) labels.push_back(vocab.path_of(id));
  rec["labels"] = std::move(labels);
  return rec;
}

inline void save_dataset(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_runtime("cannot write dataset file: ", path);
  for (const auto& ex : ds.examples) {
    out << example_to_json(ex, ds.vocabulary).dump() << '\n';
  }
}

// Training mode requires every example to carry at least one label.
inline void require_labeled(const Dataset& ds, const std::string& what) {
  for (std::size_t i = 0; i < ds.examples.size(); ++i) {
    if (ds.examples[i].labels.empty()) {
      fail_validation(what, ": example ", i, (ds.examples[i].id.empty() ? "" : " (" + ds.examples[i].id + ")"),
                      " has an empty label set");
    }
  }
}

}  // namespace copred
