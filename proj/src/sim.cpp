#include "refladder/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "refladder/selection.hpp"

namespace refladder {

void SimJudgeParams::validate() const {
  if (!(tie >= 1.0) || !std::isfinite(tie)) throw ConfigError("sim judge: tie parameter must be >= 1");
  if (!(position_bias >= 0.0) || !std::isfinite(position_bias)) {
    throw ConfigError("sim judge: position_bias must be >= 0");
  }
}

VerdictProbabilities judge_probabilities(double policy_quality, double reference_quality,
                                         const SimJudgeParams& params) {
  // Written as 1 / (1 + nu * ratio) so large quality gaps cannot overflow.
  const double log_ratio = (policy_quality - params.position_bias) - reference_quality;  // log(a / b)
  VerdictProbabilities p;
  p.win = 1.0 / (1.0 + params.tie * std::exp(-log_ratio));
  p.loss = 1.0 / (1.0 + params.tie * std::exp(log_ratio));
  p.tie = std::max(0.0, 1.0 - p.win - p.loss);
  return p;
}

Verdict sample_verdict(const VerdictProbabilities& p, Rng& rng) {
  const bool finite = std::isfinite(p.win) && std::isfinite(p.tie) && std::isfinite(p.loss);
  if (!finite || p.win < 0.0 || p.tie < 0.0 || p.loss < 0.0 || std::fabs(p.win + p.tie + p.loss - 1.0) > 1e-12) {
    throw ConfigError("malformed verdict probabilities");
  }
  const double u = rng.uniform();
  if (u < p.win) return Verdict::Win;
  if (u < p.win + p.tie) return Verdict::Tie;
  return Verdict::Loss;
}

SimulatedJudge::SimulatedJudge(SimJudgeParams params) : SimulatedJudge(params, Rng(params.seed)) {}

SimulatedJudge::SimulatedJudge(SimJudgeParams params, Rng rng) : params_(params), rng_(rng) { params_.validate(); }

Verdict SimulatedJudge::adjudicate(const ComparisonRequest& request) {
  if (!request.policy_quality()) {
    throw ConfigError("simulated judge needs a rollout with a latent quality ('" + request.instruction().id + "')");
  }
  return sample_verdict(judge_probabilities(*request.policy_quality(), request.reference_quality(), params_), rng_);
}

void LearnerParams::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learner: learning_rate must be > 0");
  if (!(gap_width > 0.0)) throw ConfigError("learner: gap_width must be > 0");
  if (!std::isfinite(gap_peak)) throw ConfigError("learner: gap_peak must be finite");
  if (!(shared_fraction >= 0.0 && shared_fraction <= 1.0)) {
    throw ConfigError("learner: shared_fraction must lie in [0, 1]");
  }
  if (initial_skill && !std::isfinite(*initial_skill)) throw ConfigError("learner: initial_skill must be finite");
}

double gap_kernel(double gap, const LearnerParams& params) {
  const double d = gap - params.gap_peak;
  return std::exp(-(d * d) / (2.0 * params.gap_width * params.gap_width));
}

double learner_update(double skill, Reward reward, double reference_quality, const LearnerParams& params) {
  return skill + params.learning_rate * reward.value() * gap_kernel(reference_quality - skill, params);
}

SimulatedLearner::SimulatedLearner(LearnerParams params, const std::map<std::string, double>& policy_scores)
    : params_(std::move(params)) {
  params_.validate();
  if (policy_scores.empty()) throw ConfigError("learner: no instructions");
  double mean = 0.0;
  for (const auto& [id, s] : policy_scores) mean += s;
  mean /= static_cast<double>(policy_scores.size());
  initial_skill_ = params_.initial_skill.value_or(mean);
  // own_ holds skill + offset; shared_ starts at zero in both modes.
  for (const auto& [id, s] : policy_scores) own_[id] = initial_skill_ + (s - mean);
}

double SimulatedLearner::quality(const std::string& instruction_id) const {
  auto it = own_.find(instruction_id);
  if (it == own_.end()) throw ConfigError("learner: unknown instruction '" + instruction_id + "'");
  return shared_ + it->second;
}

double SimulatedLearner::skill() const {
  double sum = 0.0;
  for (const auto& [id, q] : own_) sum += q;
  return shared_ + sum / static_cast<double>(own_.size());
}

Rollout SimulatedLearner::generate(const Instruction& instruction) {
  const double q = quality(instruction.id);
  char text[96];
  std::snprintf(text, sizeof text, "simulated rollout (quality %.6f)", q);
  return Rollout{text, q};
}

void SimulatedLearner::update(std::span<const PolicyFeedback> batch) {
  for (const auto& f : batch) {
    const double q = f.rollout.latent_quality.value_or(quality(f.instruction_id));
    const double gain = learner_update(q, f.reward, f.reference_score, params_) - q;
    if (params_.per_instruction_skill) {
      shared_ += params_.shared_fraction * gain;
      own_.at(f.instruction_id) += (1.0 - params_.shared_fraction) * gain;
    } else {
      shared_ += gain;
    }
  }
}

void SyntheticDatasetParams::validate() const {
  if (instructions == 0) throw ConfigError("synthetic: instructions must be positive");
  if (competitors == 0) throw ConfigError("synthetic: competitors must be positive");
  if (dimensions == 0) throw ConfigError("synthetic: dimensions must be positive");
  if (!(policy_quality_min <= policy_quality_max)) throw ConfigError("synthetic: empty policy quality range");
  if (!(headroom_min <= headroom_max)) throw ConfigError("synthetic: empty headroom range");
  if (!(dimension_noise >= 0.0)) throw ConfigError("synthetic: dimension_noise must be >= 0");
}

std::vector<DatasetRecord> generate_synthetic_dataset(const SyntheticDatasetParams& params, Rng& rng) {
  params.validate();
  const auto grade = [&](double latent) {
    std::vector<int> dims(params.dimensions);
    for (auto& d : dims) {
      const double raw = std::round(latent + params.dimension_noise * rng.normal());
      d = static_cast<int>(std::clamp(raw, kMinScore, kMaxScore));
    }
    return aggregate_scores(dims);
  };

  std::vector<DatasetRecord> records;
  records.reserve(params.instructions);
  const int width = static_cast<int>(std::to_string(params.instructions - 1).size());
  for (std::size_t i = 0; i < params.instructions; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "syn-%0*zu", width, i);
    DatasetRecord r;
    r.instruction.id = id;
    r.instruction.prompt_text = std::string("Synthetic writing task ") + id;
    const double policy = rng.uniform(params.policy_quality_min, params.policy_quality_max);
    const double headroom = rng.uniform(params.headroom_min, params.headroom_max);
    r.candidates.push_back({params.policy_source_id, std::string("policy response to ") + id, grade(policy)});
    for (std::size_t j = 0; j < params.competitors; ++j) {
      const double latent = policy + headroom * rng.uniform(0.2, 1.0);
      r.candidates.push_back({"model-" + std::to_string(j + 1),
                              "model-" + std::to_string(j + 1) + " response to " + id, grade(latent)});
    }
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace refladder
