#include "refladder/reward.hpp"

#include <algorithm>
#include <thread>

#include <spdlog/spdlog.h>

namespace refladder {

ComparisonRequest ComparisonRequest::make(const Instruction& instruction, const CandidateResponse& reference,
                                          const Rollout& rollout) {
  ComparisonRequest r;
  r.instruction_ = instruction;
  r.reference_text_ = reference.text;
  r.policy_text_ = rollout.text;
  r.reference_quality_ = reference.score;
  r.policy_quality_ = rollout.latent_quality;
  return r;
}

Reward verdict_to_reward(Verdict v) { return Reward::from_verdict(v); }

bool is_degenerate(std::string_view policy_text, const RewardConfig& cfg) {
  return policy_text.empty() || policy_text.size() > cfg.max_response_chars;
}

Adjudication adjudicate_rollout(Judge& judge, const Instruction& instruction, const CandidateResponse& reference,
                                const Rollout& rollout, const RewardConfig& cfg) {
  if (is_degenerate(rollout.text, cfg)) return Adjudication{};
  const auto request = ComparisonRequest::make(instruction, reference, rollout);
  const Verdict v = judge.adjudicate(request);
  return Adjudication{v, verdict_to_reward(v), true};
}

RetryOutcome adjudicate_with_retry(Judge& judge, const Instruction& instruction, const CandidateResponse& reference,
                                   const Rollout& rollout, const RewardConfig& cfg, const RetryPolicy& retry,
                                   const Sleeper& sleep) {
  RetryOutcome outcome;
  auto backoff = retry.initial_backoff;
  for (int attempt = 0; attempt <= std::max(0, retry.max_retries); ++attempt) {
    if (attempt > 0) {
      if (sleep) {
        sleep(backoff);
      } else {
        std::this_thread::sleep_for(backoff);
      }
      backoff = std::chrono::milliseconds(
          static_cast<std::chrono::milliseconds::rep>(static_cast<double>(backoff.count()) * retry.backoff_multiplier));
    }
    ++outcome.attempts;
    try {
      outcome.adjudication = adjudicate_rollout(judge, instruction, reference, rollout, cfg);
      return outcome;
    } catch (const JudgeTransportError& e) {
      outcome.last_error = e.what();
      spdlog::debug("attempt {} for '{}' failed: {}", outcome.attempts, instruction.id, e.what());
    }
  }
  spdlog::warn("skipping '{}' after {} attempts: {}", instruction.id, outcome.attempts, outcome.last_error);
  return outcome;
}

}  // namespace refladder
