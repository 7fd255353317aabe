#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "copred/dataset.hpp"
#include "copred/rng.hpp"

namespace copred {

struct AnnotatorConfig {
  std::size_t min_frequency = 0;   // mention-surface frequency cutoff (10 OntoNotes, 20 Wiki)
  std::size_t sample_size = 0;     // 0 = keep the whole filtered pool
  double temperature = 0.7;
  double top_p = 1.0;
  std::string endpoint;            // remote completion service, empty = caller supplies a client
  std::string prompt_template =
      "Sentence: \"{sentence}\"\n"
      "Which entity types from this inventory apply to the mention \"{mention}\"?\n"
      "Inventory: {types}\n"
      "Reply with a comma-separated list of type paths.";
  double rate_limit = 1.0;         // max requests per second
  int max_retries = 3;
  std::uint64_t seed = 42;
  std::vector<std::string> stop_mentions = {"yes", "please"};

  void validate() const {
    if (temperature < 0.0) fail_validation("temperature must be >= 0");
    if (top_p <= 0.0 || top_p > 1.0) fail_validation("top_p must be in (0,1]");
    if (rate_limit <= 0.0) fail_validation("rate_limit must be positive");
    if (max_retries < 0) fail_validation("max_retries must be >= 0");
    if (prompt_template.find("{sentence}") == std::string::npos ||
        prompt_template.find("{mention}") == std::string::npos ||
        prompt_template.find("{types}") == std::string::npos) {
      fail_validation("prompt_template must contain {sentence}, {mention} and {types}");
    }
  }

  nlohmann::json to_json() const {
    return {{"min_frequency", min_frequency}, {"sample_size", sample_size},
            {"temperature", temperature},     {"top_p", top_p},
            {"endpoint", endpoint},           {"rate_limit", rate_limit},
            {"max_retries", max_retries},     {"seed", seed},
            {"stop_mentions", stop_mentions}};
  }
};

// Text-in/text-out completion call. Implementations throw on failure; the
// pipeline retries up to max_retries.
class AnnotationClient {
 public:
  virtual ~AnnotationClient() = default;
  virtual std::string complete(const std::string& prompt, double temperature, double top_p) = 0;
};

// Offline deterministic client. The response function sees the example, so
// tests can script fixed lists, per-id answers, or failures.
class MockClient : public AnnotationClient {
 public:
  using ResponseFn = std::function<std::string(const std::string& prompt)>;

  explicit MockClient(std::string fixed_response)
      : respond_([text = std::move(fixed_response)](const std::string&) { return text; }) {}
  explicit MockClient(ResponseFn respond) : respond_(std::move(respond)) {}

  // Every request fails `times` times before succeeding (retry testing).
  void fail_first(int times) { fail_budget_ = times; }

  std::string complete(const std::string& prompt, double, double) override {
    ++n_calls_;
    if (fail_budget_ > 0) {
      --fail_budget_;
      fail_runtime("mock client failure injected");
    }
    return respond_(prompt);
  }

  int n_calls() const { return n_calls_; }

 private:
  ResponseFn respond_;
  int fail_budget_ = 0;
  int n_calls_ = 0;
};

// Keeps examples whose lowercase mention surface occurs at least
// min_frequency times corpus-wide and is not a stop mention, then samples
// sample_size of them (seeded, corpus order preserved).
inline Dataset filter_candidates(const Dataset& dataset, const AnnotatorConfig& cfg) {
  cfg.validate();
  std::unordered_map<std::string, std::size_t> frequency;
  for (const auto& ex : dataset.examples) {
    ++frequency[to_lower(join_tokens(ex.mention))];
  }
  std::unordered_set<std::string> stop(cfg.stop_mentions.begin(), cfg.stop_mentions.end());

  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < dataset.examples.size(); ++i) {
    const std::string surface = to_lower(join_tokens(dataset.examples[i].mention));
    if (frequency[surface] >= cfg.min_frequency && !stop.count(surface)) pool.push_back(i);
  }
  if (cfg.sample_size > 0) {
    if (cfg.sample_size > pool.size()) {
      fail_validation("sample_size ", cfg.sample_size, " exceeds filtered pool of ", pool.size(),
                      " examples");
    }
    Rng rng = Rng(cfg.seed).fork("annotator-sample");
    rng.shuffle(pool);
    pool.resize(cfg.sample_size);
    std::sort(pool.begin(), pool.end());
  }

  Dataset out;
  out.vocabulary = dataset.vocabulary;
  out.split_name = dataset.split_name + "+filtered";
  out.examples.reserve(pool.size());
  for (std::size_t i : pool) out.examples.push_back(dataset.examples[i]);
  return out;
}

// Splits a completion response on commas/newlines/semicolons and matches
// each piece case-insensitively against vocabulary paths (leading '/'
// optional). Returns matched ids plus the unmatched raw pieces.
inline std::pair<LabelSet, std::vector<std::string>> parse_response_labels(
    const std::string& response, const TypeVocabulary& vocab) {
  std::unordered_map<std::string, int> lower_index;
  for (std::size_t y = 0; y < vocab.size(); ++y) {
    lower_index[to_lower(vocab.path_of(static_cast<int>(y)))] = static_cast<int>(y);
  }
  LabelSet labels;
  std::vector<std::string> unmatched;
  std::string piece;
  auto flush = [&] {
    std::string cleaned = trim(piece);
    piece.clear();
    while (!cleaned.empty() && (cleaned.back() == '.' || cleaned.back() == '"')) cleaned.pop_back();
    while (!cleaned.empty() && cleaned.front() == '"') cleaned.erase(cleaned.begin());
    cleaned = trim(cleaned);
    if (cleaned.empty()) return;
    std::string key = to_lower(cleaned);
    if (key.front() != '/') key.insert(key.begin(), '/');
    auto it = lower_index.find(key);
    if (it != lower_index.end()) {
      labels.insert(it->second);
    } else {
      unmatched.push_back(cleaned);
    }
  };
  for (char c : response) {
    if (c == ',' || c == '\n' || c == ';') {
      flush();
    } else {
      piece.push_back(c);
    }
  }
  flush();
  return {labels, unmatched};
}

inline std::string fill_prompt_template(const std::string& tmpl, const MentionExample& ex,
                                        const TypeVocabulary& vocab) {
  std::string sentence = join_tokens(ex.left_context);
  if (!sentence.empty()) sentence += ' ';
  sentence += join_tokens(ex.mention);
  const std::string right = join_tokens(ex.right_context);
  if (!right.empty()) sentence += ' ' + right;
  std::string types;
  for (std::size_t y = 0; y < vocab.size(); ++y) {
    if (y > 0) types += ", ";
    types += vocab.path_of(static_cast<int>(y));
  }
  std::string out = tmpl;
  auto replace_all = [&out](const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = out.find(key, pos)) != std::string::npos) {
      out.replace(pos, key.size(), value);
      pos += value.size();
    }
  };
  replace_all("{sentence}", sentence);
  replace_all("{mention}", join_tokens(ex.mention));
  replace_all("{types}", types);
  return out;
}

enum class AnnotationStatus { ok, empty, failed };

inline const char* to_string(AnnotationStatus s) {
  switch (s) {
    case AnnotationStatus::ok: return "ok";
    case AnnotationStatus::empty: return "empty";
    case AnnotationStatus::failed: return "failed";
  }
  return "unknown";
}

struct ResponseLogEntry {
  std::string example_id;
  std::string prompt;
  std::string response;       // last response or error text
  LabelSet parsed_labels;
  std::vector<std::string> unmatched;
  AnnotationStatus status = AnnotationStatus::ok;
  int attempts = 0;
};

struct AnnotationResult {
  Dataset annotated;  // examples with at least one parsed label
  std::vector<ResponseLogEntry> log;  // one entry per attempted example
  std::size_t n_ok = 0, n_empty = 0, n_failed = 0;
};

// Runs the relabeling protocol over a (filtered) dataset. Requests are
// paced at rate_limit and retried with exponential backoff; failures and
// empty parses are flagged in the log and excluded from the output
// dataset, never silently skipped.
inline AnnotationResult annotate(const Dataset& examples, const AnnotatorConfig& cfg,
                                 AnnotationClient& client,
                                 std::function<void(double)> sleep_seconds = {}) {
  cfg.validate();
  if (!sleep_seconds) {
    sleep_seconds = [](double s) {
      std::this_thread::sleep_for(std::chrono::duration<double>(s));
    };
  }
  const double min_interval = 1.0 / cfg.rate_limit;

  AnnotationResult result;
  result.annotated.vocabulary = examples.vocabulary;
  result.annotated.split_name = examples.split_name + "+weak";
  result.log.reserve(examples.size());

  bool first_request = true;
  for (const auto& ex : examples.examples) {
    ResponseLogEntry entry;
    entry.example_id = ex.id;
    entry.prompt = fill_prompt_template(cfg.prompt_template, ex, examples.vocabulary);

    bool succeeded = false;
    for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
      if (!first_request) sleep_seconds(min_interval);
      first_request = false;
      ++entry.attempts;
      try {
        entry.response = client.complete(entry.prompt, cfg.temperature, cfg.top_p);
        succeeded = true;
        break;
      } catch (const std::exception& e) {
        entry.response = concat("<error: ", e.what(), ">");
        if (attempt < cfg.max_retries) {
          sleep_seconds(min_interval * static_cast<double>(1 << attempt));
        }
      }
    }

    if (!succeeded) {
      entry.status = AnnotationStatus::failed;
      ++result.n_failed;
    } else {
      auto [labels, unmatched] = parse_response_labels(entry.response, examples.vocabulary);
      entry.parsed_labels = labels;
      entry.unmatched = std::move(unmatched);
      if (labels.empty()) {
        entry.status = AnnotationStatus::empty;
        ++result.n_empty;
      } else {
        entry.status = AnnotationStatus::ok;
        ++result.n_ok;
        MentionExample weak = ex;
        weak.labels = labels;
        result.annotated.examples.push_back(std::move(weak));
      }
    }
    result.log.push_back(std::move(entry));
  }
  return result;
}

inline void write_response_log(const std::vector<ResponseLogEntry>& log,
                               const TypeVocabulary& vocab, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail_runtime("cannot write response log: ", path);
  for (const auto& entry : log) {
    nlohmann::json labels = nlohmann::json::array();
    for (int y : entry.parsed_labels) labels.push_back(vocab.path_of(y));
    nlohmann::json rec{{"example_id", entry.example_id},
                       {"prompt", entry.prompt},
                       {"response", entry.response},
                       {"parsed_labels", std::move(labels)},
                       {"unmatched", entry.unmatched},
                       {"status", to_string(entry.status)},
                       {"attempts", entry.attempts}};
    out << rec.dump() << '\n';
  }
}

}  // namespace copred
