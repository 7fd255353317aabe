// copred: noisy-label detection and correction for fine-grained entity
// typing via co-prediction prompt tuning.
//
// Subcommands: train, correct, evaluate, annotate, synth, plot.
// Exit codes: 0 success, 1 usage/validation, 2 runtime failure.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "copred/annotator.hpp"
#include "copred/checkpoint.hpp"
#include "copred/corrector.hpp"
#include "copred/http_client.hpp"
#include "copred/manifest.hpp"
#include "copred/metrics.hpp"
#include "copred/noise.hpp"
#include "copred/presets.hpp"
#include "copred/svg_plot.hpp"
#include "copred/synth.hpp"
#include "copred/trainer.hpp"

namespace fs = std::filesystem;
using namespace copred;

namespace {

std::string out_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

struct TrainArgs {
  std::string train_path, dev_path, vocab_path, out_dir;
  std::string preset = "tiny";
  std::uint64_t seed = 42;
  std::vector<std::uint64_t> seeds;  // multi-seed runner; one run per seed
  bool baseline = false;
  bool tiny_backbone = true;  // the bundled backbone; kept as an explicit switch
  bool quiet = false;
  // optional overrides
  std::optional<int> batch_size, max_epochs, patience, n_soft, hidden_dim, layers, ffn_dim, max_len;
  std::optional<double> learning_rate, adam_epsilon, warmup_ratio, dropout, weight_decay, grad_clip,
      gamma_min, gamma_decay;
  std::string dev_metric;
};

int run_train(const TrainArgs& args);

// Repeats training once per seed, each run in its own subdirectory.
int run_train_multi_seed(const TrainArgs& args) {
  for (std::uint64_t seed : args.seeds) {
    TrainArgs single = args;
    single.seeds.clear();
    single.seed = seed;
    single.out_dir = (fs::path(args.out_dir) / ("seed-" + std::to_string(seed))).string();
    std::cout << "=== seed " << seed << " -> " << single.out_dir << '\n';
    const int rc = run_train(single);
    if (rc != 0) return rc;
  }
  return 0;
}

int run_train(const TrainArgs& args) {
  if (!args.seeds.empty()) return run_train_multi_seed(args);
  Preset preset = preset_by_name(args.preset);
  TrainConfig train_cfg = preset.train;
  ModelConfig model_cfg = preset.model;
  train_cfg.seed = args.seed;
  train_cfg.baseline_mode = args.baseline;
  train_cfg.quiet = args.quiet;
  model_cfg.baseline = args.baseline;
  model_cfg.backbone.seed = args.seed;
  if (args.batch_size) train_cfg.batch_size = *args.batch_size;
  if (args.learning_rate) train_cfg.learning_rate = *args.learning_rate;
  if (args.adam_epsilon) train_cfg.adam_epsilon = *args.adam_epsilon;
  if (args.warmup_ratio) train_cfg.warmup_ratio = *args.warmup_ratio;
  if (args.dropout) train_cfg.embedding_dropout = *args.dropout;
  if (args.weight_decay) train_cfg.weight_decay = *args.weight_decay;
  if (args.grad_clip) train_cfg.grad_clip = *args.grad_clip;
  if (args.gamma_min) train_cfg.gamma_min = *args.gamma_min;
  if (args.gamma_decay) train_cfg.gamma_decay = *args.gamma_decay;
  if (args.max_epochs) train_cfg.max_epochs = *args.max_epochs;
  if (args.patience) train_cfg.patience = *args.patience;
  if (!args.dev_metric.empty()) train_cfg.dev_metric = args.dev_metric;
  if (args.n_soft) model_cfg.n_soft = *args.n_soft;
  if (args.hidden_dim) model_cfg.backbone.hidden_dim = *args.hidden_dim;
  if (args.layers) model_cfg.backbone.n_layers = *args.layers;
  if (args.ffn_dim) model_cfg.backbone.ffn_dim = *args.ffn_dim;
  if (args.max_len) model_cfg.backbone.max_len = *args.max_len;
  train_cfg.validate();
  model_cfg.validate();

  TypeVocabulary vocab = load_type_vocabulary(args.vocab_path);
  Dataset train_set = load_dataset(args.train_path, vocab, "train");
  Dataset dev_set = load_dataset(args.dev_path, vocab, "dev");

  CoPredictionModel model(vocab, model_cfg);
  TrainResult result = train(model, train_set, dev_set, train_cfg);

  const std::string checkpoint_path = out_path(args.out_dir, "checkpoint.json");
  const std::string trace_path = out_path(args.out_dir, "trace.csv");
  save_checkpoint(model, train_cfg, checkpoint_path);
  write_trace_csv(result.trace, trace_path);

  RunManifest manifest;
  manifest.command = "train";
  manifest.seed = args.seed;
  manifest.config = {{"train", train_cfg.to_json()},
                     {"model", model_cfg.to_json()},
                     {"preset", args.preset}};
  manifest.add_input(args.train_path);
  manifest.add_input(args.dev_path);
  manifest.add_input(args.vocab_path);
  manifest.add_output(checkpoint_path);
  manifest.add_output(trace_path);
  manifest.write(out_path(args.out_dir, "manifest.json"));

  std::cout << "best epoch " << result.best_epoch << "  dev_macro_f1 " << result.best_dev_macro_f1
            << "\nwrote " << checkpoint_path << ", " << trace_path << '\n';
  return 0;
}

struct CorrectArgs {
  std::string checkpoint_path, data_path, out_dir;
  std::string preset = "tiny";
  std::string source = "distant";
  std::optional<double> epsilon;
  double threshold = 0.5;
  std::string recall_rule = "union_both_masks";
  bool no_protect_gold = false;
  std::string export_embeddings;
};

int run_correct(const CorrectArgs& args) {
  Checkpoint checkpoint = load_checkpoint(args.checkpoint_path);
  Dataset data = load_dataset(args.data_path, checkpoint.model.vocab(), "input");

  CorrectionConfig cfg;
  cfg.epsilon = args.epsilon ? *args.epsilon
                             : epsilon_for_source(preset_by_name(args.preset), args.source);
  cfg.positive_threshold = args.threshold;
  if (args.recall_rule == "union_both_masks") {
    cfg.recall_rule = RecallRule::union_both_masks;
  } else if (args.recall_rule == "pmask_only") {
    cfg.recall_rule = RecallRule::pmask_only;
  } else {
    fail_validation("unknown recall rule \"", args.recall_rule, "\"");
  }
  cfg.protect_gold = !args.no_protect_gold;
  cfg.validate();

  auto [corrected, report] = correct_dataset(checkpoint.model, data, cfg);

  const std::string corrected_path = out_path(args.out_dir, "corrected.jsonl");
  const std::string report_path = out_path(args.out_dir, "report.json");
  const std::string summary_path = out_path(args.out_dir, "report.txt");
  const std::string hist_path = out_path(args.out_dir, "delta_hist.csv");
  save_dataset(corrected, corrected_path);
  {
    std::ofstream out(report_path);
    out << correction_report_to_json(report, checkpoint.model.vocab(), cfg).dump(2) << '\n';
  }
  {
    std::ofstream out(summary_path);
    out << correction_summary(report, cfg);
  }
  write_delta_histogram_csv(report, hist_path);

  RunManifest manifest;
  manifest.command = "correct";
  manifest.seed = checkpoint.train_config.seed;
  manifest.config = {{"correction", cfg.to_json()}, {"preset", args.preset}, {"source", args.source}};
  manifest.add_input(args.checkpoint_path);
  manifest.add_input(args.data_path);
  manifest.add_output(corrected_path);
  manifest.add_output(report_path);
  manifest.add_output(hist_path);

  if (!args.export_embeddings.empty()) {
    std::ofstream out(args.export_embeddings);
    if (!out) fail_runtime("cannot write embeddings file: ", args.export_embeddings);
    for (const auto& ex : data.examples) {
      const Eigen::VectorXd h = checkpoint.model.pmask_hidden(ex);
      nlohmann::json rec{{"id", ex.id}, {"vector", nlohmann::json::array()}};
      for (Eigen::Index i = 0; i < h.size(); ++i) rec["vector"].push_back(h(i));
      out << rec.dump() << '\n';
    }
    manifest.add_output(args.export_embeddings);
  }
  manifest.write(out_path(args.out_dir, "manifest.json"));

  std::cout << correction_summary(report, cfg) << "wrote " << corrected_path << '\n';
  return 0;
}

struct EvaluateArgs {
  std::string pred_path, gold_path, vocab_path, out_dir;
};

// Loads prediction/gold files; when no vocabulary is given, one is built
// from the union of label strings in both files.
Dataset load_for_eval(const std::string& path, const TypeVocabulary& vocab) {
  return load_dataset(path, vocab, "eval");
}

TypeVocabulary union_vocab(const std::string& pred_path, const std::string& gold_path) {
  std::vector<std::string> paths;
  std::unordered_set<std::string> seen;
  for (const std::string& file : {pred_path, gold_path}) {
    std::ifstream in(file);
    if (!in) fail_validation("cannot open dataset file: ", file);
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.contains("labels")) continue;
      for (const auto& label : rec["labels"]) {
        std::string path = label.get<std::string>();
        if (seen.insert(path).second) paths.push_back(path);
      }
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) paths.push_back("/none");
  return TypeVocabulary::from_paths(paths, "<union>");
}

int run_evaluate(const EvaluateArgs& args) {
  TypeVocabulary vocab = args.vocab_path.empty() ? union_vocab(args.pred_path, args.gold_path)
                                                 : load_type_vocabulary(args.vocab_path);
  Dataset pred = load_for_eval(args.pred_path, vocab);
  Dataset gold = load_for_eval(args.gold_path, vocab);
  if (pred.size() != gold.size()) {
    fail_validation("prediction file has ", pred.size(), " examples but gold has ", gold.size());
  }
  std::vector<LabelSet> p, g;
  for (const auto& ex : pred.examples) p.push_back(ex.labels);
  for (const auto& ex : gold.examples) g.push_back(ex.labels);
  MetricReport report = evaluate(p, g);
  std::cout << format_metric_table(report);

  if (!args.out_dir.empty()) {
    const std::string metrics_path = out_path(args.out_dir, "metrics.json");
    std::ofstream out(metrics_path);
    out << metric_report_to_json(report).dump(2) << '\n';
    RunManifest manifest;
    manifest.command = "evaluate";
    manifest.config = {{"vocab", args.vocab_path}};
    manifest.add_input(args.pred_path);
    manifest.add_input(args.gold_path);
    manifest.add_output(metrics_path);
    manifest.write(out_path(args.out_dir, "manifest.json"));
  }
  return 0;
}

struct AnnotateArgs {
  std::string data_path, vocab_path, out_dir;
  std::string endpoint, mock_response, template_file;
  std::size_t min_frequency = 0;
  std::size_t sample_size = 0;
  double temperature = 0.7;
  double top_p = 1.0;
  double rate_limit = 1.0;
  int max_retries = 3;
  std::uint64_t seed = 42;
};

int run_annotate(const AnnotateArgs& args) {
  AnnotatorConfig cfg;
  cfg.min_frequency = args.min_frequency;
  cfg.sample_size = args.sample_size;
  cfg.temperature = args.temperature;
  cfg.top_p = args.top_p;
  cfg.endpoint = args.endpoint;
  cfg.rate_limit = args.rate_limit;
  cfg.max_retries = args.max_retries;
  cfg.seed = args.seed;
  if (!args.template_file.empty()) {
    std::ifstream in(args.template_file);
    if (!in) fail_validation("cannot open prompt template: ", args.template_file);
    cfg.prompt_template.assign((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
  }
  cfg.validate();

  TypeVocabulary vocab = load_type_vocabulary(args.vocab_path);
  Dataset data = load_dataset(args.data_path, vocab, "pool");
  Dataset filtered = filter_candidates(data, cfg);

  std::unique_ptr<AnnotationClient> client;
  if (!args.mock_response.empty()) {
    client = std::make_unique<MockClient>(args.mock_response);
  } else if (!cfg.endpoint.empty()) {
    client = std::make_unique<HttpCompletionClient>(cfg.endpoint);
  } else {
    fail_validation("annotate needs --endpoint (or COPRED_ANNOTATOR_ENDPOINT) or --mock-response");
  }

  AnnotationResult result = annotate(filtered, cfg, *client);

  const std::string weak_path = out_path(args.out_dir, "weak.jsonl");
  const std::string log_path = out_path(args.out_dir, "responses.jsonl");
  save_dataset(result.annotated, weak_path);
  write_response_log(result.log, vocab, log_path);

  RunManifest manifest;
  manifest.command = "annotate";
  manifest.seed = args.seed;
  manifest.config = cfg.to_json();
  manifest.add_input(args.data_path);
  manifest.add_input(args.vocab_path);
  manifest.add_output(weak_path);
  manifest.add_output(log_path);
  manifest.write(out_path(args.out_dir, "manifest.json"));

  std::cout << "annotated " << result.n_ok << " ok, " << result.n_empty << " empty, "
            << result.n_failed << " failed (pool " << filtered.size() << ")\nwrote " << weak_path
            << ", " << log_path << '\n';
  return 0;
}

struct SynthArgs {
  std::string out_dir;
  int types = 8;
  int examples = 200;
  int dev = 50;
  double swap = 0.3;
  double drop = 0.2;
  std::uint64_t seed = 7;
};

int run_synth(const SynthArgs& args) {
  SynthConfig cfg;
  cfg.n_types = args.types;
  cfg.n_examples = args.examples;
  cfg.n_dev = args.dev;
  cfg.seed = args.seed;
  SynthCorpus corpus = make_synthetic_corpus(cfg);
  auto [noisy, truth] = inject_noise(corpus.train, NoiseSpec{args.swap, args.drop, args.seed});

  const std::string vocab_path = out_path(args.out_dir, "vocab.txt");
  const std::string clean_path = out_path(args.out_dir, "clean.jsonl");
  const std::string noisy_path = out_path(args.out_dir, "noisy.jsonl");
  const std::string dev_path = out_path(args.out_dir, "dev.jsonl");
  save_type_vocabulary(corpus.vocab, vocab_path);
  save_dataset(truth, clean_path);
  save_dataset(noisy, noisy_path);
  save_dataset(corpus.dev, dev_path);

  RunManifest manifest;
  manifest.command = "synth";
  manifest.seed = args.seed;
  manifest.config = {{"types", args.types}, {"examples", args.examples}, {"dev", args.dev},
                     {"swap", args.swap},   {"drop", args.drop}};
  manifest.add_output(vocab_path);
  manifest.add_output(clean_path);
  manifest.add_output(noisy_path);
  manifest.add_output(dev_path);
  manifest.write(out_path(args.out_dir, "manifest.json"));

  std::cout << "wrote " << vocab_path << ", " << clean_path << ", " << noisy_path << ", "
            << dev_path << '\n';
  return 0;
}

struct PlotArgs {
  std::string trace_path, report_path, out_dir;
};

int run_plot(const PlotArgs& args) {
  if (args.trace_path.empty() && args.report_path.empty()) {
    fail_validation("plot needs --trace and/or --report");
  }
  RunManifest manifest;
  manifest.command = "plot";
  manifest.config = {{"trace", args.trace_path}, {"report", args.report_path}};

  if (!args.trace_path.empty()) {
    DivergenceTrace trace = read_trace_csv(args.trace_path);
    svg::Series divergence{"divergence rate", "firebrick", {}, {}};
    svg::Series dev{"dev macro F1", "steelblue", {}, {}};
    for (const auto& row : trace) {
      divergence.x.push_back(row.epoch);
      divergence.y.push_back(row.divergence_rate);
      dev.x.push_back(row.epoch);
      dev.y.push_back(row.dev_macro_f1);
    }
    const std::string svg_path = out_path(args.out_dir, "divergence_trace.svg");
    const std::string csv_path = out_path(args.out_dir, "divergence_trace.csv");
    svg::write_file(svg_path, svg::line_chart({divergence, dev}, "divergent co-predictions per epoch",
                                              "epoch", "rate / F1"));
    write_trace_csv(trace, csv_path);
    manifest.add_input(args.trace_path);
    manifest.add_output(svg_path);
    manifest.add_output(csv_path);
    std::cout << "wrote " << svg_path << ", " << csv_path << '\n';
  }

  if (!args.report_path.empty()) {
    std::ifstream in(args.report_path);
    if (!in) fail_validation("cannot open report: ", args.report_path);
    nlohmann::json report;
    try {
      in >> report;
    } catch (const nlohmann::json::exception& e) {
      fail_validation("report ", args.report_path, " is not valid JSON: ", e.what());
    }
    if (!report.contains("delta_histogram")) {
      fail_validation("report ", args.report_path, " lacks a delta_histogram section");
    }
    std::vector<double> lows, highs;
    std::vector<std::size_t> counts;
    for (const auto& bin : report["delta_histogram"]) {
      lows.push_back(bin.at("bin_low").get<double>());
      highs.push_back(bin.at("bin_high").get<double>());
      counts.push_back(bin.at("count").get<std::size_t>());
    }
    const std::string svg_path = out_path(args.out_dir, "delta_hist.svg");
    const std::string csv_path = out_path(args.out_dir, "delta_hist.csv");
    svg::write_file(svg_path, svg::bar_chart(lows, highs, counts, "divergence score distribution",
                                             "delta", "count"));
    std::ofstream csv(csv_path);
    csv << "bin_low,bin_high,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i) {
      csv << lows[i] << ',' << highs[i] << ',' << counts[i] << '\n';
    }
    manifest.add_input(args.report_path);
    manifest.add_output(svg_path);
    manifest.add_output(csv_path);
    std::cout << "wrote " << svg_path << ", " << csv_path << '\n';
  }

  manifest.write(out_path(args.out_dir, "manifest.json"));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"noisy-label correction for fine-grained entity typing via co-prediction prompts"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value config file; command-line flags win");

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "fine-tune the co-prediction model");
  train_cmd->configurable();
  train_cmd->add_option("--train", train_args.train_path, "training dataset (jsonl)")->required();
  train_cmd->add_option("--dev", train_args.dev_path, "dev dataset (jsonl)")->required();
  train_cmd->add_option("--vocab", train_args.vocab_path, "type vocabulary file")->required();
  train_cmd->add_option("--out", train_args.out_dir, "output directory")->required();
  train_cmd->add_option("--preset", train_args.preset, "ontonotes|wiki|ultrafine|tiny");
  train_cmd->add_option("--seed", train_args.seed, "seed for all randomness");
  train_cmd->add_option("--seeds", train_args.seeds,
                        "multi-seed runner: train once per seed into <out>/seed-<k>/")
      ->delimiter(',');
  train_cmd->add_flag("--baseline", train_args.baseline, "single-mask standard prompt");
  train_cmd->add_flag("--tiny-backbone", train_args.tiny_backbone,
                      "use the bundled random-init backbone (default; no downloads)");
  train_cmd->add_flag("--quiet", train_args.quiet, "suppress per-epoch log lines");
  auto opt_int = [&](const char* name, std::optional<int>& slot, const char* help) {
    train_cmd->add_option_function<int>(name, [&slot](const int& v) { slot = v; }, help);
  };
  auto opt_double = [&](const char* name, std::optional<double>& slot, const char* help) {
    train_cmd->add_option_function<double>(name, [&slot](const double& v) { slot = v; }, help);
  };
  opt_int("--batch-size", train_args.batch_size, "examples per optimizer step");
  opt_double("--learning-rate", train_args.learning_rate, "Adam learning rate");
  opt_double("--adam-epsilon", train_args.adam_epsilon, "Adam epsilon");
  opt_double("--warmup-ratio", train_args.warmup_ratio, "linear warmup fraction");
  opt_double("--dropout", train_args.dropout, "embedding dropout");
  opt_double("--weight-decay", train_args.weight_decay, "decoupled weight decay");
  opt_double("--grad-clip", train_args.grad_clip, "gradient norm clip");
  opt_double("--gamma-min", train_args.gamma_min, "loss-weight floor for divergent labels");
  opt_double("--gamma-decay", train_args.gamma_decay, "per-epoch gamma decay factor");
  opt_int("--max-epochs", train_args.max_epochs, "epoch cap");
  opt_int("--patience", train_args.patience, "epochs without dev improvement before stopping");
  train_cmd->add_option("--dev-metric", train_args.dev_metric,
                        "early-stopping metric: macro_f1|micro_f1|strict_accuracy");
  opt_int("--n-soft", train_args.n_soft, "number of soft prompt tokens");
  opt_int("--hidden-dim", train_args.hidden_dim, "backbone hidden size");
  opt_int("--layers", train_args.layers, "backbone layers");
  opt_int("--ffn-dim", train_args.ffn_dim, "backbone feed-forward size");
  opt_int("--max-len", train_args.max_len, "backbone input length limit");

  CorrectArgs correct_args;
  auto* correct_cmd = app.add_subcommand("correct", "rewrite label sets with a trained checkpoint");
  correct_cmd->configurable();
  correct_cmd->add_option("--checkpoint", correct_args.checkpoint_path, "trained checkpoint")->required();
  correct_cmd->add_option("--data", correct_args.data_path, "dataset to correct (jsonl)")->required();
  correct_cmd->add_option("--out", correct_args.out_dir, "output directory")->required();
  correct_cmd->add_option_function<double>(
      "--epsilon", [&](const double& v) { correct_args.epsilon = v; },
      "divergence margin (overrides preset)");
  correct_cmd->add_option("--preset", correct_args.preset, "preset supplying the margin");
  correct_cmd->add_option("--source", correct_args.source, "annotation source: distant|chatgpt|crowd");
  correct_cmd->add_option("--threshold", correct_args.threshold, "predicted-positive threshold");
  correct_cmd->add_option("--recall-rule", correct_args.recall_rule, "union_both_masks|pmask_only");
  correct_cmd->add_flag("--no-protect-gold", correct_args.no_protect_gold,
                        "drop gold labels from the candidate set");
  correct_cmd->add_option("--export-embeddings", correct_args.export_embeddings,
                          "write PMASK hidden vectors to this jsonl file");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "score predictions against gold label sets");
  eval_cmd->configurable();
  eval_cmd->add_option("--pred", eval_args.pred_path, "predictions (jsonl)")->required();
  eval_cmd->add_option("--gold", eval_args.gold_path, "gold labels (jsonl)")->required();
  eval_cmd->add_option("--vocab", eval_args.vocab_path, "type vocabulary (optional)");
  eval_cmd->add_option("--out", eval_args.out_dir, "directory for metrics.json (optional)");

  AnnotateArgs annotate_args;
  auto* annotate_cmd = app.add_subcommand("annotate", "relabel examples with a completion service");
  annotate_cmd->configurable();
  annotate_cmd->add_option("--data", annotate_args.data_path, "dataset pool (jsonl)")->required();
  annotate_cmd->add_option("--vocab", annotate_args.vocab_path, "type vocabulary")->required();
  annotate_cmd->add_option("--out", annotate_args.out_dir, "output directory")->required();
  annotate_cmd->add_option("--endpoint", annotate_args.endpoint, "completion endpoint URL")
      ->envname("COPRED_ANNOTATOR_ENDPOINT");
  annotate_cmd->add_option("--mock-response", annotate_args.mock_response,
                           "offline mock: fixed response text");
  annotate_cmd->add_option("--min-frequency", annotate_args.min_frequency,
                           "mention frequency cutoff (10 OntoNotes, 20 Wiki)");
  annotate_cmd->add_option("--sample-size", annotate_args.sample_size, "examples to draw (0 = all)");
  annotate_cmd->add_option("--temperature", annotate_args.temperature, "sampling temperature");
  annotate_cmd->add_option("--top-p", annotate_args.top_p, "nucleus sampling parameter");
  annotate_cmd->add_option("--rate-limit", annotate_args.rate_limit, "max requests per second");
  annotate_cmd->add_option("--max-retries", annotate_args.max_retries, "retries per example");
  annotate_cmd->add_option("--seed", annotate_args.seed, "sampling seed");
  annotate_cmd->add_option("--prompt-template", annotate_args.template_file,
                           "file overriding the default prompt template");

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic corpus with noise");
  synth_cmd->configurable();
  synth_cmd->add_option("--out", synth_args.out_dir, "output directory")->required();
  synth_cmd->add_option("--types", synth_args.types, "number of types");
  synth_cmd->add_option("--examples", synth_args.examples, "training examples");
  synth_cmd->add_option("--dev", synth_args.dev, "clean dev examples");
  synth_cmd->add_option("--swap", synth_args.swap, "inaccurate-label rate");
  synth_cmd->add_option("--drop", synth_args.drop, "unlabeled-label rate");
  synth_cmd->add_option("--seed", synth_args.seed, "corpus and noise seed");

  PlotArgs plot_args;
  auto* plot_cmd = app.add_subcommand("plot", "render divergence trace and delta histogram");
  plot_cmd->configurable();
  plot_cmd->add_option("--trace", plot_args.trace_path, "trace.csv from train");
  plot_cmd->add_option("--report", plot_args.report_path, "report.json from correct");
  plot_cmd->add_option("--out", plot_args.out_dir, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(train_cmd)) return run_train(train_args);
    if (app.got_subcommand(correct_cmd)) return run_correct(correct_args);
    if (app.got_subcommand(eval_cmd)) return run_evaluate(eval_args);
    if (app.got_subcommand(annotate_cmd)) return run_annotate(annotate_args);
    if (app.got_subcommand(synth_cmd)) return run_synth(synth_args);
    if (app.got_subcommand(plot_cmd)) return run_plot(plot_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
