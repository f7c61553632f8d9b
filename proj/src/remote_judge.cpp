#include "refladder/remote_judge.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <regex>
#include <thread>
#include <vector>

#include <httplib.h>
#include <json.hpp>

namespace refladder {

void RemoteJudgeConfig::validate() const {
  if (endpoint.empty()) throw ConfigError("remote judge: endpoint is required");
  if (model.empty()) throw ConfigError("remote judge: model is required");
  if (timeout.count() <= 0) throw ConfigError("remote judge: timeout must be > 0");
  if (max_retries < 0) throw ConfigError("remote judge: max_retries must be >= 0");
  if (max_parallel == 0) throw ConfigError("remote judge: max_parallel must be >= 1");
}

HttpChatClient::HttpChatClient(RemoteJudgeConfig config) : config_(std::move(config)) {
  config_.validate();
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, kUrl)) {
    throw ConfigError("remote judge: endpoint '" + config_.endpoint + "' is not an http(s) URL");
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/v1/chat/completions";
  if (!config_.auth_env.empty()) {
    const char* token = std::getenv(config_.auth_env.c_str());
    if (token == nullptr || *token == '\0') {
      throw ConfigError("remote judge: environment variable " + config_.auth_env + " is not set");
    }
    token_ = token;
  }
}

std::string HttpChatClient::complete(const std::string& prompt) {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  if (!token_.empty()) client.set_bearer_token_auth(token_);

  const nlohmann::json body = {
      {"model", config_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
      {"temperature", config_.temperature},
  };
  auto res = client.Post(path_, body.dump(), "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status));
  const auto reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw TransportError("response is not JSON");
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError("response has no choices[0].message.content");
  }
}

RemotePairwiseJudge::RemotePairwiseJudge(ChatTransport& transport, PromptVariant variant)
    : transport_(transport), variant_(variant) {
  if (variant_ == PromptVariant::Pointwise) throw ConfigError("pairwise judge cannot use the pointwise prompt");
}

Verdict RemotePairwiseJudge::adjudicate(const ComparisonRequest& request) {
  const auto prompt = render_pairwise_prompt(variant_, request.instruction().prompt_text, request.first_text(),
                                             request.second_text(), request.criteria());
  try {
    return parse_pairwise_verdict(transport_.complete(prompt));
  } catch (const TransportError& e) {
    throw JudgeTransportError(request.instruction().id, e.what());
  } catch (const VerdictParseError& e) {
    throw JudgeTransportError(request.instruction().id, e.what());
  }
}

RemotePointwiseGrader::RemotePointwiseGrader(ChatTransport& transport, RetryPolicy retry, std::size_t max_parallel)
    : transport_(transport), retry_(retry), max_parallel_(max_parallel) {}

double RemotePointwiseGrader::grade(const Instruction& instruction, const std::string& response) {
  std::vector<std::string> dims;
  if (instruction.criteria && !instruction.criteria->empty()) {
    dims = *instruction.criteria;
  } else {
    dims.emplace_back(kGenericCriterion);
  }
  std::vector<int> scores(dims.size());
  parallel_for_bounded(dims.size(), max_parallel_, [&](std::size_t i) {
    const auto prompt = render_pointwise_prompt(dims[i], instruction.prompt_text, response);
    auto backoff = retry_.initial_backoff;
    std::string last_error;
    for (int attempt = 0; attempt <= retry_.max_retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(backoff);
        backoff = std::chrono::milliseconds(static_cast<std::chrono::milliseconds::rep>(
            static_cast<double>(backoff.count()) * retry_.backoff_multiplier));
      }
      try {
        scores[i] = parse_pointwise_score(transport_.complete(prompt));
        return;
      } catch (const TransportError& e) {
        last_error = e.what();
      } catch (const VerdictParseError& e) {
        last_error = e.what();
      }
    }
    throw JudgeTransportError(instruction.id, "pointwise grading failed: " + last_error);
  });
  double sum = 0.0;
  for (int s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

Rollout RemotePolicy::generate(const Instruction& instruction) {
  return Rollout{transport_.complete(instruction.prompt_text), std::nullopt};
}

void parallel_for_bounded(std::size_t n, std::size_t max_parallel, const std::function<void(std::size_t)>& task) {
  if (n == 0) return;
  const std::size_t workers = std::max<std::size_t>(1, std::min(n, max_parallel));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace refladder
