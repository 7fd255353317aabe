#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <httplib.h>

#include "copred/annotator.hpp"
#include "copred/http_client.hpp"
#include "test_util.hpp"

using namespace copred;

namespace {

Dataset corpus_with_mentions(const std::vector<std::pair<std::string, int>>& surface_counts,
                             int t = 4) {
  Dataset ds;
  ds.vocabulary = test_util::simple_vocab(t);
  int id = 0;
  for (const auto& [surface, count] : surface_counts) {
    for (int i = 0; i < count; ++i) {
      MentionExample ex;
      ex.id = "ex-" + std::to_string(id++);
      ex.mention = tokenize(surface);
      ex.left_context = {"ctx"};
      ex.labels = {0};
      ds.examples.push_back(std::move(ex));
    }
  }
  return ds;
}

AnnotatorConfig fast_config() {
  AnnotatorConfig cfg;
  cfg.rate_limit = 1e6;  // effectively no pacing in tests
  return cfg;
}

}  // namespace

TEST(FilterCandidates, ZeroCutoffIsIdentity) {
  Dataset ds = corpus_with_mentions({{"alpha", 3}, {"beta", 2}});
  AnnotatorConfig cfg = fast_config();
  cfg.min_frequency = 0;
  cfg.stop_mentions.clear();
  Dataset out = filter_candidates(ds, cfg);
  EXPECT_EQ(out.size(), ds.size());
}

// The two shipped cutoffs on a constructed corpus: surfaces with corpus
// frequency 25, 15 and 9.
TEST(FilterCandidates, FrequencyCutoffsTenAndTwenty) {
  Dataset ds = corpus_with_mentions({{"common", 25}, {"medium", 15}, {"rare", 9}});
  AnnotatorConfig cfg = fast_config();
  cfg.min_frequency = 10;  // OntoNotes cutoff
  EXPECT_EQ(filter_candidates(ds, cfg).size(), 40u);
  cfg.min_frequency = 20;  // Wiki cutoff
  EXPECT_EQ(filter_candidates(ds, cfg).size(), 25u);
}

TEST(FilterCandidates, StopMentionsRemoved) {
  Dataset ds = corpus_with_mentions({{"yes", 30}, {"Please", 30}, {"acme", 30}});
  AnnotatorConfig cfg = fast_config();
  cfg.min_frequency = 10;
  Dataset out = filter_candidates(ds, cfg);
  EXPECT_EQ(out.size(), 30u);
  for (const auto& ex : out.examples) EXPECT_EQ(join_tokens(ex.mention), "acme");
}

TEST(FilterCandidates, SeededSamplingIsDeterministicAndOrdered) {
  Dataset ds = corpus_with_mentions({{"alpha", 40}, {"beta", 40}});
  AnnotatorConfig cfg = fast_config();
  cfg.sample_size = 10;
  cfg.seed = 5;
  Dataset a = filter_candidates(ds, cfg);
  Dataset b = filter_candidates(ds, cfg);
  ASSERT_EQ(a.size(), 10u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.examples[i], b.examples[i]);
  cfg.seed = 6;
  Dataset c = filter_candidates(ds, cfg);
  bool differs = false;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!(a.examples[i] == c.examples[i])) differs = true;
  }
  EXPECT_TRUE(differs);
}

TEST(FilterCandidates, OverdrawnSampleNamesPoolSize) {
  Dataset ds = corpus_with_mentions({{"alpha", 5}});
  AnnotatorConfig cfg = fast_config();
  cfg.sample_size = 9;
  std::string msg = test_util::error_message([&] { filter_candidates(ds, cfg); });
  EXPECT_NE(msg.find("pool of 5"), std::string::npos) << msg;
}

TEST(ParseResponse, MatchesPathsCaseInsensitively) {
  TypeVocabulary vocab =
      TypeVocabulary::from_paths({"/person", "/person/politician", "/organization"});
  auto [labels, unmatched] =
      parse_response_labels("/person/politician, /person", vocab);
  EXPECT_EQ(labels, (LabelSet{0, 1}));
  EXPECT_TRUE(unmatched.empty());

  auto [labels2, unmatched2] =
      parse_response_labels("Person; ORGANIZATION\n/made/up.", vocab);
  EXPECT_EQ(labels2, (LabelSet{0, 2}));
  ASSERT_EQ(unmatched2.size(), 1u);
  EXPECT_EQ(unmatched2[0], "/made/up");
}

TEST(ParseResponse, PureFunctionOfInputs) {
  TypeVocabulary vocab = test_util::simple_vocab(3);
  auto a = parse_response_labels("/type0, junk, /type2", vocab);
  auto b = parse_response_labels("/type0, junk, /type2", vocab);
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(Annotate, MockEchoIntersectsVocabulary) {
  Dataset ds = corpus_with_mentions({{"acme", 3}});
  AnnotatorConfig cfg = fast_config();
  MockClient client("/type0, /type2, /not/in/vocab");
  AnnotationResult result = annotate(ds, cfg, client, [](double) {});
  ASSERT_EQ(result.annotated.size(), 3u);
  for (const auto& ex : result.annotated.examples) EXPECT_EQ(ex.labels, (LabelSet{0, 2}));
  ASSERT_EQ(result.log.size(), 3u);
  for (const auto& entry : result.log) {
    EXPECT_EQ(entry.status, AnnotationStatus::ok);
    EXPECT_EQ(entry.unmatched, (std::vector<std::string>{"/not/in/vocab"}));
    EXPECT_NE(entry.prompt.find("acme"), std::string::npos);
  }
}

TEST(Annotate, PromptTemplateFilled) {
  Dataset ds = corpus_with_mentions({{"acme", 1}});
  AnnotatorConfig cfg = fast_config();
  std::string seen;
  MockClient client([&seen](const std::string& prompt) {
    seen = prompt;
    return std::string("/type0");
  });
  annotate(ds, cfg, client, [](double) {});
  EXPECT_NE(seen.find("ctx acme"), std::string::npos);
  EXPECT_NE(seen.find("\"acme\""), std::string::npos);
  EXPECT_NE(seen.find("/type0, /type1"), std::string::npos);
  // and a template missing a placeholder is rejected up front
  cfg.prompt_template = "no placeholders";
  EXPECT_THROW(annotate(ds, cfg, client), ValidationError);
}

TEST(Annotate, FailuresRetriedThenFlaggedNeverDropped) {
  Dataset ds = corpus_with_mentions({{"acme", 3}});
  AnnotatorConfig cfg = fast_config();
  cfg.max_retries = 2;
  MockClient client("/type1");
  client.fail_first(3);  // first example exhausts its 1 + 2 attempts
  AnnotationResult result = annotate(ds, cfg, client, [](double) {});
  ASSERT_EQ(result.log.size(), 3u);
  EXPECT_EQ(result.log[0].status, AnnotationStatus::failed);
  EXPECT_EQ(result.log[0].attempts, 3);
  EXPECT_NE(result.log[0].response.find("error"), std::string::npos);
  EXPECT_EQ(result.log[1].status, AnnotationStatus::ok);
  EXPECT_EQ(result.n_failed, 1u);
  EXPECT_EQ(result.n_ok, 2u);
  EXPECT_EQ(result.annotated.size(), 2u);
}

TEST(Annotate, EmptyParseFlagged) {
  Dataset ds = corpus_with_mentions({{"acme", 2}});
  AnnotatorConfig cfg = fast_config();
  MockClient client("nothing usable here");
  AnnotationResult result = annotate(ds, cfg, client, [](double) {});
  EXPECT_EQ(result.n_empty, 2u);
  EXPECT_TRUE(result.annotated.examples.empty());
  for (const auto& entry : result.log) EXPECT_EQ(entry.status, AnnotationStatus::empty);
}

TEST(Annotate, RateLimiterPacesRequests) {
  Dataset ds = corpus_with_mentions({{"acme", 5}});
  AnnotatorConfig cfg = fast_config();
  cfg.rate_limit = 2.0;  // 0.5 s between requests
  MockClient client("/type0");
  double slept = 0.0;
  annotate(ds, cfg, client, [&slept](double s) { slept += s; });
  EXPECT_NEAR(slept, 4.0 * 0.5, 1e-9);  // first request unpaced
}

TEST(Annotate, DeterministicWithMock) {
  Dataset ds = corpus_with_mentions({{"acme", 10}, {"globex", 5}});
  AnnotatorConfig cfg = fast_config();
  MockClient c1("/type0, /type3");
  MockClient c2("/type0, /type3");
  AnnotationResult a = annotate(ds, cfg, c1, [](double) {});
  AnnotationResult b = annotate(ds, cfg, c2, [](double) {});
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].prompt, b.log[i].prompt);
    EXPECT_EQ(a.log[i].response, b.log[i].response);
    EXPECT_EQ(a.log[i].parsed_labels, b.log[i].parsed_labels);
  }
}

TEST(ResponseLog, WritesOneRecordPerExample) {
  Dataset ds = corpus_with_mentions({{"acme", 4}});
  AnnotatorConfig cfg = fast_config();
  MockClient client("/type0");
  client.fail_first(cfg.max_retries + 1);
  AnnotationResult result = annotate(ds, cfg, client, [](double) {});
  test_util::TempDir dir("log");
  write_response_log(result.log, ds.vocabulary, dir.file("responses.jsonl"));
  std::ifstream in(dir.file("responses.jsonl"));
  std::string line;
  std::size_t lines = 0;
  std::size_t failed = 0;
  while (std::getline(in, line)) {
    nlohmann::json rec = nlohmann::json::parse(line);
    EXPECT_TRUE(rec.contains("example_id"));
    EXPECT_TRUE(rec.contains("status"));
    if (rec["status"] == "failed") ++failed;
    ++lines;
  }
  EXPECT_EQ(lines, 4u);
  EXPECT_EQ(failed, 1u);
}

// The remote path, exercised against an in-process HTTP server.
TEST(HttpClient, CompletesAndRetriesThroughAnnotate) {
  httplib::Server server;
  std::atomic<int> hits{0};
  std::string last_auth;
  server.Post("/v1/complete", [&](const httplib::Request& req, httplib::Response& res) {
    const int n = ++hits;
    last_auth = req.get_header_value("Authorization");
    nlohmann::json body = nlohmann::json::parse(req.body);
    EXPECT_DOUBLE_EQ(body.at("temperature").get<double>(), 0.7);
    EXPECT_DOUBLE_EQ(body.at("top_p").get<double>(), 1.0);
    if (n == 1) {
      res.status = 500;  // first call fails, the pipeline must retry
      return;
    }
    res.set_content(nlohmann::json{{"text", "/type0, /type1"}}.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  ASSERT_GT(port, 0);
  std::thread server_thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();

  setenv("COPRED_ANNOTATOR_TOKEN", "sekrit", 1);
  HttpCompletionClient client(concat("http://127.0.0.1:", port, "/v1/complete"));
  EXPECT_EQ(client.base(), concat("http://127.0.0.1:", port));
  EXPECT_EQ(client.path(), "/v1/complete");

  Dataset ds = corpus_with_mentions({{"acme", 2}});
  AnnotatorConfig cfg = fast_config();
  AnnotationResult result = annotate(ds, cfg, client, [](double) {});
  EXPECT_EQ(result.n_ok, 2u);
  EXPECT_EQ(result.log[0].attempts, 2);  // retried once after the 500
  for (const auto& ex : result.annotated.examples) EXPECT_EQ(ex.labels, (LabelSet{0, 1}));
  EXPECT_EQ(last_auth, "Bearer sekrit");
  unsetenv("COPRED_ANNOTATOR_TOKEN");

  server.stop();
  server_thread.join();
}

TEST(AnnotatorConfig, Validation) {
  AnnotatorConfig cfg;
  cfg.top_p = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = AnnotatorConfig{};
  cfg.temperature = -0.1;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = AnnotatorConfig{};
  cfg.rate_limit = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  // defaults carry the published sampling parameters and stop mentions
  cfg = AnnotatorConfig{};
  EXPECT_DOUBLE_EQ(cfg.temperature, 0.7);
  EXPECT_DOUBLE_EQ(cfg.top_p, 1.0);
  EXPECT_EQ(cfg.stop_mentions, (std::vector<std::string>{"yes", "please"}));
}
