#pragma once

#include <array>
#include <string>
#include <vector>

#include "copred/dataset.hpp"
#include "copred/rng.hpp"

namespace copred {

// Seeded generator for desk-scale corpora. Every type gets a small lexicon
// of mention words (unique to the type) and context cue words; contexts mix
// cue words for each gold label with shared filler words, so labels are
// recoverable from mention and context but not from either alone.
struct SynthConfig {
  int n_types = 8;
  int n_examples = 200;
  int n_dev = 50;
  std::uint64_t seed = 7;
  double second_label_prob = 0.35;

  void validate() const {
    if (n_types < 1) fail_validation("synth: n_types must be >= 1");
    if (n_examples < 1) fail_validation("synth: n_examples must be >= 1");
    if (n_dev < 0) fail_validation("synth: n_dev must be >= 0");
    if (second_label_prob < 0.0 || second_label_prob > 1.0) {
      fail_validation("synth: second_label_prob must be in [0,1]");
    }
  }
};

struct SynthCorpus {
  TypeVocabulary vocab;
  Dataset train;  // clean gold labels
  Dataset dev;    // clean, for early stopping
};

namespace detail {

inline const std::array<const char*, 10>& synth_top_segments() {
  static const std::array<const char*, 10> segs = {
      "person", "organization", "location", "event", "product",
      "art",    "building",     "food",     "animal", "substance"};
  return segs;
}

inline const std::array<const char*, 10>& synth_sub_segments() {
  static const std::array<const char*, 10> segs = {
      "company", "politician", "city", "sports", "software",
      "music",   "hotel",      "dish", "bird",   "metal"};
  return segs;
}

inline std::vector<std::string> synth_type_paths(int n_types) {
  const auto& top = synth_top_segments();
  const auto& sub = synth_sub_segments();
  std::vector<std::string> paths;
  paths.reserve(static_cast<std::size_t>(n_types));
  for (int i = 0; i < n_types; ++i) {
    const std::size_t n_top = top.size();
    if (static_cast<std::size_t>(i) < n_top) {
      paths.push_back(concat("/", top[static_cast<std::size_t>(i)]));
    } else {
      std::size_t k = static_cast<std::size_t>(i) - n_top;
      paths.push_back(concat("/", top[k % n_top], "/", sub[(k / n_top + k) % sub.size()],
                             k >= n_top * sub.size() ? std::to_string(k) : ""));
    }
  }
  return paths;
}

}  // namespace detail

// Mention words "m<type><a..d>" identify the primary type; cue words
// "k<type><a..c>" mark every gold label in context; fillers are shared.
inline SynthCorpus make_synthetic_corpus(const SynthConfig& cfg) {
  cfg.validate();
  SynthCorpus corpus;
  corpus.vocab = TypeVocabulary::from_paths(detail::synth_type_paths(cfg.n_types), "<synth>");

  const std::vector<std::string> fillers = {"the", "a",  "of",   "in",  "was",
                                            "and", "on", "said", "for", "with"};
  auto mention_word = [](int type, int k) { return concat("m", type, static_cast<char>('a' + k)); };
  auto cue_word = [](int type, int k) { return concat("k", type, static_cast<char>('a' + k)); };

  Rng rng(cfg.seed);
  auto make_example = [&](Rng& r, const std::string& id) {
    MentionExample ex;
    ex.id = id;
    const int t = cfg.n_types;
    int primary = static_cast<int>(r.below(t));
    ex.labels.insert(primary);
    if (t > 1 && r.bernoulli(cfg.second_label_prob)) {
      int secondary = primary;
      while (secondary == primary) secondary = static_cast<int>(r.below(t));
      ex.labels.insert(secondary);
    }
    ex.mention.push_back(mention_word(primary, r.int_in(0, 3)));
    if (r.bernoulli(0.15)) ex.mention.push_back(mention_word(primary, r.int_in(0, 3)));

    // Two cue tokens per gold label, a random side each, plus fillers.
    std::vector<std::string> left, right;
    for (int label : ex.labels) {
      for (int rep = 0; rep < 2; ++rep) {
        auto& side = r.bernoulli(0.5) ? left : right;
        side.push_back(cue_word(label, r.int_in(0, 2)));
      }
    }
    int n_left = r.int_in(2, 5), n_right = r.int_in(2, 5);
    while (static_cast<int>(left.size()) < n_left) {
      left.push_back(fillers[r.below(fillers.size())]);
    }
    while (static_cast<int>(right.size()) < n_right) {
      right.push_back(fillers[r.below(fillers.size())]);
    }
    r.shuffle(left);
    r.shuffle(right);
    ex.left_context = std::move(left);
    ex.right_context = std::move(right);
    return ex;
  };

  Rng train_rng = rng.fork("train");
  corpus.train.vocabulary = corpus.vocab;
  corpus.train.split_name = "synth-train";
  for (int i = 0; i < cfg.n_examples; ++i) {
    corpus.train.examples.push_back(make_example(train_rng, concat("train-", i)));
  }
  Rng dev_rng = rng.fork("dev");
  corpus.dev.vocabulary = corpus.vocab;
  corpus.dev.split_name = "synth-dev";
  for (int i = 0; i < cfg.n_dev; ++i) {
    corpus.dev.examples.push_back(make_example(dev_rng, concat("dev-", i)));
  }
  return corpus;
}

}  // namespace copred
