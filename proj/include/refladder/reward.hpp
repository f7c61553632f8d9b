// Pairwise comparison rewards.
//
// Each rollout is compared once against the instruction's current reference.
// The reference always occupies the first position and the policy output the
// second, so the policy competes from the position judges tend to disfavour.
// There is no position-swapped second call.

#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "refladder/core.hpp"

namespace refladder {

class ComparisonRequest {
 public:
  /// The only way to build a request: reference first, policy second.
  static ComparisonRequest make(const Instruction& instruction, const CandidateResponse& reference,
                                const Rollout& rollout);

  const Instruction& instruction() const { return instruction_; }
  const std::string& reference_text() const { return reference_text_; }
  const std::string& policy_text() const { return policy_text_; }
  const std::optional<std::vector<std::string>>& criteria() const { return instruction_.criteria; }

  /// Text in position one (Assistant A) and position two (Assistant B).
  const std::string& first_text() const { return reference_text_; }
  const std::string& second_text() const { return policy_text_; }

  // Scalar qualities, available when the rollout came from a simulated policy.
  double reference_quality() const { return reference_quality_; }
  const std::optional<double>& policy_quality() const { return policy_quality_; }

 private:
  ComparisonRequest() = default;

  Instruction instruction_;
  std::string reference_text_;
  std::string policy_text_;
  double reference_quality_ = 0.0;
  std::optional<double> policy_quality_;
};

/// Thrown by judges when a call fails in a way that may succeed on retry
/// (network failure, unparseable reply).
class JudgeTransportError : public Error {
 public:
  JudgeTransportError(std::string instruction_id, const std::string& what)
      : Error("judge call for '" + instruction_id + "' failed: " + what), instruction_id_(std::move(instruction_id)) {}
  const std::string& instruction_id() const { return instruction_id_; }

 private:
  std::string instruction_id_;
};

/// Three-way comparison of the second response against the first, reported
/// from the policy's (second position's) perspective. Implementations used
/// with parallel fan-out must be safe to call concurrently.
class Judge {
 public:
  virtual ~Judge() = default;
  virtual Verdict adjudicate(const ComparisonRequest& request) = 0;
};

/// Forwards to another judge and counts invocations.
class CountingJudge : public Judge {
 public:
  explicit CountingJudge(Judge& inner) : inner_(inner) {}
  Verdict adjudicate(const ComparisonRequest& request) override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.adjudicate(request);
  }
  std::uint64_t calls() const { return calls_.load(std::memory_order_relaxed); }

 private:
  Judge& inner_;
  std::atomic<std::uint64_t> calls_{0};
};

Reward verdict_to_reward(Verdict v);

struct RewardConfig {
  // Character-count proxy for the 10,000-token response cap.
  std::size_t max_response_chars = 10000;
};

struct Adjudication {
  Verdict verdict = Verdict::Loss;
  Reward reward = Reward::from_verdict(Verdict::Loss);
  // False when the rollout was degenerate and no judge call was made.
  bool judged = false;
};

bool is_degenerate(std::string_view policy_text, const RewardConfig& cfg);

/// One judge call per non-degenerate rollout. Empty or over-length outputs
/// are a Loss without calling the judge. Judge failures propagate as
/// JudgeTransportError.
Adjudication adjudicate_rollout(Judge& judge, const Instruction& instruction, const CandidateResponse& reference,
                                const Rollout& rollout, const RewardConfig& cfg = {});

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_multiplier = 2.0;
};

struct RetryOutcome {
  std::optional<Adjudication> adjudication;  // empty when retries were exhausted
  int attempts = 0;
  std::string last_error;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;

/// adjudicate_rollout with up to max_retries extra attempts and exponential
/// backoff between them. Exhaustion is reported, not thrown.
RetryOutcome adjudicate_with_retry(Judge& judge, const Instruction& instruction, const CandidateResponse& reference,
                                   const Rollout& rollout, const RewardConfig& cfg, const RetryPolicy& retry,
                                   const Sleeper& sleep = {});

}  // namespace refladder
