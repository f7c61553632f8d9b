// Deterministic simulation of the judge and the policy.
//
// The simulated judge is a Rao-Kupper paired-comparison model over scalar
// qualities, with an extra log-strength penalty on whichever response sits in
// the second position. The simulated learner has a latent skill that grows
// only when it earns reward, and grows fastest when the reference it beat was
// moderately (not vastly) stronger than itself.
//
// None of the default magnitudes are measured quantities; they are synthetic
// settings for exercising the scheduling logic.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "refladder/core.hpp"
#include "refladder/dataset.hpp"
#include "refladder/random.hpp"
#include "refladder/reward.hpp"
#include "refladder/scheduler.hpp"

namespace refladder {

struct SimJudgeParams {
  double tie = 1.25;            // nu >= 1; 1 disables ties
  double position_bias = 0.3;   // beta >= 0, subtracted from the second response's log-strength
  std::uint64_t seed = 0;

  void validate() const;
};

struct VerdictProbabilities {
  double win = 0.0;
  double tie = 0.0;
  double loss = 0.0;
};

/// With a = exp(policy - beta) and b = exp(reference):
///   win = a / (a + nu b), loss = b / (nu a + b), tie = 1 - win - loss.
VerdictProbabilities judge_probabilities(double policy_quality, double reference_quality,
                                         const SimJudgeParams& params);

/// Categorical draw. Throws ConfigError unless the probabilities are
/// non-negative and sum to 1 within 1e-12.
Verdict sample_verdict(const VerdictProbabilities& p, Rng& rng);

/// Judge backed by judge_probabilities. Requests must carry a policy quality.
/// Not thread-safe: draws come from one sequential stream.
class SimulatedJudge : public Judge {
 public:
  explicit SimulatedJudge(SimJudgeParams params);
  SimulatedJudge(SimJudgeParams params, Rng rng);
  Verdict adjudicate(const ComparisonRequest& request) override;

 private:
  SimJudgeParams params_;
  Rng rng_;
};

struct LearnerParams {
  // Mean starting skill. Unset means the mean policy score of the dataset.
  std::optional<double> initial_skill;
  double learning_rate = 0.01;
  double gap_peak = 0.5;
  double gap_width = 0.75;
  bool per_instruction_skill = false;
  // Share of each gain that goes to the shared component in per-instruction mode.
  double shared_fraction = 0.5;

  void validate() const;
};

/// exp(-(gap - peak)^2 / (2 width^2)).
double gap_kernel(double gap, const LearnerParams& params);

/// skill + learning_rate * reward * gap_kernel(reference_quality - skill).
double learner_update(double skill, Reward reward, double reference_quality, const LearnerParams& params);

/// A latent-skill policy. The quality of a rollout for instruction w is the
/// learner's skill plus w's offset, where offsets are the instruction's policy
/// score minus the dataset mean, so mean quality equals skill at the start.
///
/// In per-instruction mode each instruction also has its own component; a
/// gain is split between the shared component and the instruction's own.
class SimulatedLearner : public Policy {
 public:
  SimulatedLearner(LearnerParams params, const std::map<std::string, double>& policy_scores);

  Rollout generate(const Instruction& instruction) override;
  void update(std::span<const PolicyFeedback> batch) override;

  double quality(const std::string& instruction_id) const;
  /// Mean quality over all instructions.
  double skill() const;
  double initial_skill() const { return initial_skill_; }

 private:
  LearnerParams params_;
  double initial_skill_ = 0.0;
  double shared_ = 0.0;
  std::map<std::string, double> own_;
};

/// Parameters for generating a synthetic scored dataset. Each candidate has a
/// latent quality; each of its dimension scores is that quality plus Gaussian
/// noise, rounded and clamped to [1, 10], and its score is their mean.
struct SyntheticDatasetParams {
  std::size_t instructions = 500;
  std::size_t competitors = 4;
  std::size_t dimensions = 5;
  double policy_quality_min = 4.5;
  double policy_quality_max = 7.0;
  // Per-instruction headroom h ~ U(min, max); competitor j sits h * U(0.2, 1) above the policy.
  double headroom_min = -1.0;
  double headroom_max = 4.0;
  double dimension_noise = 0.7;
  std::string policy_source_id{kDefaultPolicySource};

  void validate() const;
};

std::vector<DatasetRecord> generate_synthetic_dataset(const SyntheticDatasetParams& params, Rng& rng);

}  // namespace refladder
