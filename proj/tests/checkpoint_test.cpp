#include <gtest/gtest.h>

#include "copred/checkpoint.hpp"
#include "copred/corrector.hpp"
#include "copred/synth.hpp"
#include "test_util.hpp"

using namespace copred;

namespace {

ModelConfig checkpoint_model_config() {
  ModelConfig cfg;
  cfg.backbone.hidden_dim = 16;
  cfg.backbone.n_layers = 2;
  cfg.backbone.ffn_dim = 20;
  cfg.backbone.max_len = 40;
  cfg.backbone.init_std = 0.1;
  cfg.backbone.seed = 13;
  return cfg;
}

}  // namespace

TEST(Checkpoint, RoundTripPreservesScoresBitExactly) {
  SynthConfig scfg;
  scfg.n_types = 5;
  scfg.n_examples = 12;
  scfg.n_dev = 4;
  SynthCorpus corpus = make_synthetic_corpus(scfg);
  CoPredictionModel model(corpus.vocab, checkpoint_model_config());
  model.register_tokens(corpus.train);

  test_util::TempDir dir("ckpt");
  TrainConfig tcfg;
  tcfg.seed = 99;
  save_checkpoint(model, tcfg, dir.file("checkpoint.json"));
  Checkpoint loaded = load_checkpoint(dir.file("checkpoint.json"));

  EXPECT_EQ(loaded.train_config.seed, 99u);
  EXPECT_TRUE(loaded.model.vocab() == model.vocab());
  for (const auto& ex : corpus.train.examples) {
    CoPredictionScores a = model.score(ex);
    CoPredictionScores b = loaded.model.score(ex);
    EXPECT_EQ(a.p_pos, b.p_pos);
    EXPECT_EQ(a.p_neg, b.p_neg);
  }
}

TEST(Checkpoint, SecondSaveIsByteIdentical) {
  SynthConfig scfg;
  scfg.n_types = 3;
  scfg.n_examples = 6;
  scfg.n_dev = 2;
  SynthCorpus corpus = make_synthetic_corpus(scfg);
  CoPredictionModel model(corpus.vocab, checkpoint_model_config());
  model.register_tokens(corpus.train);
  test_util::TempDir dir("ckpt2");
  save_checkpoint(model, TrainConfig{}, dir.file("a.json"));
  Checkpoint loaded = load_checkpoint(dir.file("a.json"));
  save_checkpoint(loaded.model, loaded.train_config, dir.file("b.json"));
  EXPECT_EQ(test_util::read_file(dir.file("a.json")), test_util::read_file(dir.file("b.json")));
}

TEST(Checkpoint, LoadedModelCorrects) {
  SynthConfig scfg;
  scfg.n_types = 4;
  scfg.n_examples = 10;
  scfg.n_dev = 4;
  SynthCorpus corpus = make_synthetic_corpus(scfg);
  CoPredictionModel model(corpus.vocab, checkpoint_model_config());
  test_util::TempDir dir("ckpt3");
  save_checkpoint(model, TrainConfig{}, dir.file("checkpoint.json"));
  Checkpoint loaded = load_checkpoint(dir.file("checkpoint.json"));
  CorrectionConfig cfg;
  cfg.epsilon = 0.8;
  auto [corrected, report] = correct_dataset(loaded.model, corpus.train, cfg);
  EXPECT_EQ(corrected.size(), corpus.train.size());
}

TEST(Checkpoint, UnsupportedFormatTagRejected) {
  test_util::TempDir dir("ckpt4");
  test_util::write_lines(dir.file("bad.json"), {R"({"format":"something.else","model":{}})"});
  EXPECT_THROW(load_checkpoint(dir.file("bad.json")), ValidationError);
  test_util::write_lines(dir.file("not_json.json"), {"not json at all"});
  EXPECT_THROW(load_checkpoint(dir.file("not_json.json")), ValidationError);
  EXPECT_THROW(load_checkpoint(dir.file("missing.json")), ValidationError);
}

TEST(Checkpoint, BaselineFlagSurvives)
{
  TypeVocabulary vocab = test_util::simple_vocab(3);
  ModelConfig cfg = checkpoint_model_config();
  cfg.baseline = true;
  CoPredictionModel model(vocab, cfg);
  test_util::TempDir dir("ckpt5");
  save_checkpoint(model, TrainConfig{}, dir.file("b.json"));
  Checkpoint loaded = load_checkpoint(dir.file("b.json"));
  EXPECT_TRUE(loaded.model.baseline());
}
