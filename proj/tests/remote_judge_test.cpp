#include <atomic>
#include <cstdlib>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <json.hpp>

#include "refladder/experiment.hpp"
#include "refladder/remote_judge.hpp"

using namespace refladder;
using json = nlohmann::json;

namespace {

// Chat-completions stub. Tracks peak in-flight requests; the reply is chosen
// by a handler so each test can script the endpoint.
class StubServer {
 public:
  using Reply = std::function<std::pair<int, std::string>(const json& request)>;

  explicit StubServer(Reply reply) : reply_(std::move(reply)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const int now = ++in_flight_;
      int peak = peak_.load();
      while (now > peak && !peak_.compare_exchange_weak(peak, now)) {
      }
      ++requests_;
      last_auth_ = req.get_header_value("Authorization");
      std::this_thread::sleep_for(std::chrono::milliseconds(15));
      const auto [status, content] = reply_(json::parse(req.body));
      res.status = status;
      if (status == 200) {
        res.set_content(json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump(),
                        "application/json");
      }
      --in_flight_;
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  int peak() const { return peak_.load(); }
  int requests() const { return requests_.load(); }
  std::string last_auth() const { return last_auth_; }

 private:
  Reply reply_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> in_flight_{0};
  std::atomic<int> peak_{0};
  std::atomic<int> requests_{0};
  std::string last_auth_;
};

RemoteJudgeConfig config_for(const StubServer& s, const std::string& model) {
  RemoteJudgeConfig c;
  c.endpoint = s.url();
  c.model = model;
  c.timeout = std::chrono::milliseconds(5000);
  c.initial_backoff = std::chrono::milliseconds(1);
  return c;
}

TEST(HttpChatClient, SendsModelTemperatureAndToken) {
  json seen;
  StubServer server([&](const json& req) {
    seen = req;
    return std::pair{200, std::string("hello")};
  });
  ::setenv("REFLADDER_TEST_TOKEN", "s3cret", 1);
  auto cfg = config_for(server, "judge-x");
  cfg.auth_env = "REFLADDER_TEST_TOKEN";
  HttpChatClient client(cfg);
  EXPECT_EQ(client.complete("ping"), "hello");
  EXPECT_EQ(seen["model"], "judge-x");
  EXPECT_EQ(seen["temperature"], 0.1);
  EXPECT_EQ(seen["messages"][0]["content"], "ping");
  EXPECT_EQ(server.last_auth(), "Bearer s3cret");
}

TEST(HttpChatClient, ConfigErrors) {
  RemoteJudgeConfig c;
  c.endpoint = "ftp://nowhere";
  c.model = "m";
  EXPECT_THROW(HttpChatClient{c}, ConfigError);
  c.endpoint = "http://localhost:1/x";
  c.auth_env = "REFLADDER_SURELY_UNSET_VAR";
  EXPECT_THROW(HttpChatClient{c}, ConfigError);
  c.auth_env.clear();
  c.max_parallel = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(HttpChatClient, HttpErrorIsTransportError) {
  StubServer server([](const json&) { return std::pair{503, std::string()}; });
  HttpChatClient client(config_for(server, "m"));
  EXPECT_THROW(client.complete("x"), TransportError);
}

TEST(RemotePairwiseJudge, ConcurrencyNeverExceedsBound) {
  StubServer server([](const json&) { return std::pair{200, std::string("Reasoning... [[B]]")}; });
  HttpChatClient client(config_for(server, "judge"));
  RemotePairwiseJudge inner(client, PromptVariant::Default);
  CountingJudge judge(inner);
  const Instruction instr{"w", "Write", std::nullopt};
  const CandidateResponse ref{"m1", "ref", 7.0};
  std::vector<Verdict> verdicts(24);
  parallel_for_bounded(verdicts.size(), 3, [&](std::size_t i) {
    verdicts[i] = adjudicate_rollout(judge, instr, ref, Rollout{"out", std::nullopt}).verdict;
  });
  for (auto v : verdicts) EXPECT_EQ(v, Verdict::Win);
  EXPECT_EQ(judge.calls(), 24u);
  EXPECT_EQ(server.requests(), 24);
  EXPECT_LE(server.peak(), 3);
  EXPECT_GE(server.peak(), 2);
}

TEST(RemotePairwiseJudge, UnparseableReplyRetriesThenSkips) {
  StubServer server([](const json&) { return std::pair{200, std::string("I cannot decide")}; });
  HttpChatClient client(config_for(server, "judge"));
  RemotePairwiseJudge judge(client, PromptVariant::Default);
  const RetryPolicy retry{2, std::chrono::milliseconds(1), 2.0};
  const auto out = adjudicate_with_retry(judge, {"w", "p", std::nullopt}, {"m", "r", 7.0}, Rollout{"x", std::nullopt},
                                         {}, retry, [](auto) {});
  EXPECT_FALSE(out.adjudication);
  EXPECT_EQ(server.requests(), 3);
  EXPECT_NE(out.last_error.find("unparseable verdict"), std::string::npos);
}

TEST(RemotePointwiseGrader, AveragesOneCallPerCriterion) {
  std::atomic<int> n{0};
  StubServer server([&](const json&) {
    const int score = 4 + 2 * (n++ % 2);
    return std::pair{200, "```json\n{\"score\": " + std::to_string(score) + ", \"reason\": \"r\"}\n```"};
  });
  HttpChatClient client(config_for(server, "grader"));
  RemotePointwiseGrader grader(client, {1, std::chrono::milliseconds(1), 2.0}, 2);
  const Instruction instr{"w", "p", std::vector<std::string>{"a", "b", "c", "d"}};
  EXPECT_DOUBLE_EQ(grader.grade(instr, "text"), 5.0);
  EXPECT_EQ(server.requests(), 4);
  const Instruction plain{"v", "p", std::nullopt};
  grader.grade(plain, "text");
  EXPECT_EQ(server.requests(), 5);
}

// Full training loop against stub policy and judge endpoints.
TEST(RunExperiment, RemoteBackendsRespectBoundAndRecordSkips) {
  std::atomic<int> judge_calls{0};
  StubServer server([&](const json& req) {
    if (req["model"] == "policy") return std::pair{200, std::string("a policy answer")};
    // Every fifth judge call fails outright (HTTP 500).
    if (judge_calls++ % 5 == 4) return std::pair{500, std::string()};
    return std::pair{200, std::string("[[B]]")};
  });
  ExperimentConfig cfg;
  SyntheticDatasetParams syn;
  syn.instructions = 12;
  cfg.synthetic = syn;
  cfg.remote_judge = config_for(server, "judge");
  cfg.remote_judge->max_parallel = 4;
  cfg.remote_judge->max_retries = 0;
  cfg.remote_policy = config_for(server, "policy");
  cfg.steps = 3;
  cfg.batch_size = 8;
  cfg.max_failure_ratio = 0.5;
  const auto result = run_experiment(cfg);
  EXPECT_EQ(result.summary.rollouts, 24u);
  EXPECT_GT(result.summary.skipped, 0u);
  EXPECT_EQ(result.summary.wins + result.summary.skipped, 24u);
  EXPECT_EQ(result.summary.judge_calls, 24u);
  EXPECT_LE(server.peak(), 4);
  EXPECT_NE(result.trace.find("\"type\":\"skip\""), std::string::npos);

  cfg.max_failure_ratio = 0.0;
  EXPECT_THROW(run_experiment(cfg), JudgeExhaustedError);
}

}  // namespace
