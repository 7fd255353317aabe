#include <gtest/gtest.h>

#include "copred/noise.hpp"
#include "copred/synth.hpp"
#include "test_util.hpp"

using namespace copred;

namespace {

// Frozen from the brute-force oracle run in BaselineF1AtBenchmarkNoise.
constexpr double k_frozen_baseline_f1 = 0.73389959155888373;

Dataset labeled_corpus(int n, int t, int labels_per_example, std::uint64_t seed) {
  Dataset ds;
  ds.vocabulary = test_util::simple_vocab(t);
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    MentionExample ex;
    ex.id = "ex-" + std::to_string(i);
    ex.mention = {"m"};
    while (static_cast<int>(ex.labels.size()) < labels_per_example) {
      ex.labels.insert(static_cast<int>(rng.below(t)));
    }
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

}  // namespace

TEST(InjectNoise, ZeroNoiseIsIdentity) {
  Dataset clean = labeled_corpus(100, 8, 2, 1);
  auto [noisy, truth] = inject_noise(clean, NoiseSpec{0.0, 0.0, 99});
  ASSERT_EQ(noisy.size(), clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) {
    EXPECT_EQ(noisy.examples[i], clean.examples[i]);
  }
  EXPECT_DOUBLE_EQ(test_util::oracle_macro_f1(noisy, truth), 1.0);
}

TEST(InjectNoise, FullDropKeepsExactlyOneLabel) {
  Dataset clean = labeled_corpus(200, 8, 2, 2);
  auto [noisy, truth] = inject_noise(clean, NoiseSpec{0.0, 1.0, 5});
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    ASSERT_EQ(noisy.examples[i].labels.size(), 1u) << "example " << i;
    // the floor keeps an original label, never a random one
    EXPECT_TRUE(noisy.examples[i].labels.is_subset_of(truth.examples[i].labels));
  }
}

TEST(InjectNoise, DeterministicGivenSeed) {
  Dataset clean = labeled_corpus(300, 10, 2, 3);
  auto [a, a_truth] = inject_noise(clean, NoiseSpec{0.3, 0.2, 7});
  auto [b, b_truth] = inject_noise(clean, NoiseSpec{0.3, 0.2, 7});
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.examples[i], b.examples[i]);
  auto [c, c_truth] = inject_noise(clean, NoiseSpec{0.3, 0.2, 8});
  bool any_difference = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!(a.examples[i] == c.examples[i])) any_difference = true;
  }
  EXPECT_TRUE(any_difference);
}

TEST(InjectNoise, SwappedLabelsAreWrongLabels) {
  Dataset clean = labeled_corpus(300, 6, 1, 11);
  auto [noisy, truth] = inject_noise(clean, NoiseSpec{1.0, 0.0, 13});
  for (std::size_t i = 0; i < noisy.size(); ++i) {
    ASSERT_EQ(noisy.examples[i].labels.size(), 1u);
    EXPECT_TRUE(set_intersection(noisy.examples[i].labels, truth.examples[i].labels).empty());
  }
}

TEST(InjectNoise, RatesOutsideRangeRejected) {
  Dataset clean = labeled_corpus(3, 4, 1, 1);
  EXPECT_THROW(inject_noise(clean, NoiseSpec{-0.1, 0.0, 1}), ValidationError);
  EXPECT_THROW(inject_noise(clean, NoiseSpec{0.0, 1.5, 1}), ValidationError);
}

TEST(InjectNoise, EmptyLabelInputRejected) {
  Dataset clean = labeled_corpus(3, 4, 1, 1);
  clean.examples[1].labels = LabelSet{};
  EXPECT_THROW(inject_noise(clean, NoiseSpec{0.1, 0.1, 1}), ValidationError);
}

// Pre-correction baseline on a 1000-example synthetic corpus with the
// benchmark noise level, measured by the brute-force oracle and frozen.
TEST(InjectNoise, BaselineF1AtBenchmarkNoise) {
  SynthConfig cfg;
  cfg.n_types = 8;
  cfg.n_examples = 1000;
  cfg.n_dev = 0;
  cfg.seed = 7;
  SynthCorpus corpus = make_synthetic_corpus(cfg);
  auto [noisy, truth] = inject_noise(corpus.train, NoiseSpec{0.3, 0.2, 7});
  const double f1 = test_util::oracle_macro_f1(noisy, truth);
  EXPECT_GT(f1, 0.5);
  EXPECT_LT(f1, 0.95);
  EXPECT_NEAR(f1, k_frozen_baseline_f1, 1e-12);
}

TEST(Synth, DeterministicAndWellFormed) {
  SynthConfig cfg;
  SynthCorpus a = make_synthetic_corpus(cfg);
  SynthCorpus b = make_synthetic_corpus(cfg);
  ASSERT_EQ(a.train.size(), b.train.size());
  for (std::size_t i = 0; i < a.train.size(); ++i) {
    EXPECT_EQ(a.train.examples[i], b.train.examples[i]);
  }
  EXPECT_EQ(a.vocab.size(), 8u);
  require_labeled(a.train, "synth train");
  require_labeled(a.dev, "synth dev");
  for (const auto& ex : a.train.examples) {
    EXPECT_FALSE(ex.mention.empty());
    EXPECT_LE(ex.labels.size(), 2u);
  }
}
