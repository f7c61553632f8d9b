// Adapters for chat-completion HTTP endpoints: a pairwise judge, a pointwise
// grader for dataset scoring, and a generation-only policy.

#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>

#include "refladder/core.hpp"
#include "refladder/prompts.hpp"
#include "refladder/reward.hpp"
#include "refladder/scheduler.hpp"

namespace refladder {

/// Network failure or unusable response from an endpoint.
class TransportError : public Error {
 public:
  using Error::Error;
};

struct RemoteJudgeConfig {
  std::string endpoint;          // full URL of the chat-completions route
  std::string model;
  std::string auth_env;          // environment variable holding the bearer token; empty for none
  std::chrono::milliseconds timeout{60000};
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  PromptVariant variant = PromptVariant::Default;
  double temperature = 0.1;
  std::size_t max_parallel = 8;

  void validate() const;
  RetryPolicy retry_policy() const { return {max_retries, initial_backoff, 2.0}; }
};

/// Sends one user message, returns the assistant's reply text.
class ChatTransport {
 public:
  virtual ~ChatTransport() = default;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// POST {"model", "messages": [{"role": "user", ...}], "temperature"} and read
/// choices[0].message.content. Safe to call from several threads.
class HttpChatClient : public ChatTransport {
 public:
  explicit HttpChatClient(RemoteJudgeConfig config);
  std::string complete(const std::string& prompt) override;

 private:
  RemoteJudgeConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::string token_;
};

/// Pairwise judge over a chat transport. Transport and parse failures become
/// JudgeTransportError so the retry policy applies.
class RemotePairwiseJudge : public Judge {
 public:
  RemotePairwiseJudge(ChatTransport& transport, PromptVariant variant);
  Verdict adjudicate(const ComparisonRequest& request) override;

 private:
  ChatTransport& transport_;
  PromptVariant variant_;
};

/// Multi-dimensional pointwise grading: one call per criterion, scores
/// averaged. Instructions without criteria are graded on a single generic
/// dimension.
class RemotePointwiseGrader {
 public:
  RemotePointwiseGrader(ChatTransport& transport, RetryPolicy retry, std::size_t max_parallel);
  double grade(const Instruction& instruction, const std::string& response);

 private:
  ChatTransport& transport_;
  RetryPolicy retry_;
  std::size_t max_parallel_;
};

inline constexpr std::string_view kGenericCriterion =
    "Overall quality: how well the response fulfils the user's request.";

/// Generates rollouts from a chat endpoint. update() is a no-op: weight
/// updates belong to an external trainer.
class RemotePolicy : public Policy {
 public:
  explicit RemotePolicy(ChatTransport& transport) : transport_(transport) {}
  Rollout generate(const Instruction& instruction) override;
  void update(std::span<const PolicyFeedback>) override {}

 private:
  ChatTransport& transport_;
};

/// Runs task(0..n-1) on at most max_parallel threads. The first exception
/// thrown by any task is rethrown after all threads finish.
void parallel_for_bounded(std::size_t n, std::size_t max_parallel, const std::function<void(std::size_t)>& task);

}  // namespace refladder
