#pragma once

#include <utility>

#include "copred/dataset.hpp"
#include "copred/rng.hpp"

namespace copred {

// Synthetic corruption covering both noise kinds: swapping a label for a
// random wrong one (inaccurate labeling) and deleting a label (unlabeled
// labeling). Deterministic given the seed.
struct NoiseSpec {
  double inaccurate_rate = 0.0;
  double drop_rate = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    if (inaccurate_rate < 0.0 || inaccurate_rate > 1.0) {
      fail_validation("inaccurate_rate must be in [0,1], got ", inaccurate_rate);
    }
    if (drop_rate < 0.0 || drop_rate > 1.0) {
      fail_validation("drop_rate must be in [0,1], got ", drop_rate);
    }
  }
};

// Per clean label: drop with drop_rate, otherwise swap to a uniformly random
// wrong label with inaccurate_rate, otherwise keep. An example never ends up
// empty: if everything was removed, one uniformly chosen original label is
// retained. Swap targets are resampled until they fall outside the original
// set (no wrong label exists when t == 1, so the label is kept).
inline std::pair<Dataset, Dataset> inject_noise(const Dataset& clean, const NoiseSpec& spec) {
  spec.validate();
  require_labeled(clean, "inject_noise");
  const int t = static_cast<int>(clean.vocabulary.size());

  Dataset noisy = clean;
  noisy.split_name = clean.split_name + "+noise";
  Rng rng(spec.seed);

  for (auto& ex : noisy.examples) {
    const LabelSet original = ex.labels;
    LabelSet corrupted;
    for (int label : original) {
      if (rng.bernoulli(spec.drop_rate)) continue;
      if (rng.bernoulli(spec.inaccurate_rate) && t > 1) {
        int wrong = label;
        while (original.contains(wrong)) wrong = static_cast<int>(rng.below(t));
        corrupted.insert(wrong);
      } else {
        corrupted.insert(label);
      }
    }
    if (corrupted.empty()) {
      const auto& ids = original.ids();
      corrupted.insert(ids[rng.below(ids.size())]);
    }
    ex.labels = corrupted;
  }
  return {std::move(noisy), clean};
}

}  // namespace copred
