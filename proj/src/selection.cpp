#include "refladder/selection.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

namespace refladder {
namespace {

bool potential_order(const ScoredInstruction& a, const ScoredInstruction& b) {
  if (!scores_equal(a.potential, b.potential)) return a.potential > b.potential;
  return a.instruction.id < b.instruction.id;
}

}  // namespace

void SelectionConfig::validate() const {
  if (k < 1) throw ConfigError("selection: k must be at least 1");
  if (!(underperform_threshold >= kMinScore && underperform_threshold <= kMaxScore)) {
    throw ConfigError("selection: underperform_threshold must lie in [1, 10]");
  }
  if (policy_source_id.empty()) throw ConfigError("selection: policy_source_id must not be empty");
}

double ScoredInstruction::policy_score(std::string_view policy_source_id) const {
  for (const auto& c : candidates) {
    if (c.source_id == policy_source_id) return c.score;
  }
  throw ConfigError("instruction '" + instruction.id + "' has no policy candidate");
}

double aggregate_scores(std::span<const int> dimension_scores) {
  if (dimension_scores.empty()) throw ConfigError("no dimensions");
  long long sum = 0;
  for (int s : dimension_scores) {
    if (s < 1 || s > 10) throw ConfigError("dimension score " + std::to_string(s) + " outside [1, 10]");
    sum += s;
  }
  return static_cast<double>(sum) / static_cast<double>(dimension_scores.size());
}

double learning_potential(double policy_score, std::span<const double> competitor_scores) {
  if (competitor_scores.empty()) throw ConfigError("no competitors");
  return *std::max_element(competitor_scores.begin(), competitor_scores.end()) - policy_score;
}

ScoredInstruction score_instruction(Instruction instruction, std::vector<CandidateResponse> candidates,
                                    std::string_view policy_source_id) {
  std::optional<double> policy;
  std::vector<double> competitors;
  for (const auto& c : candidates) {
    if (c.source_id == policy_source_id) {
      if (policy) throw ConfigError("instruction '" + instruction.id + "' has more than one policy candidate");
      policy = c.score;
    } else {
      competitors.push_back(c.score);
    }
  }
  if (!policy) throw ConfigError("instruction '" + instruction.id + "' has no policy candidate");
  if (competitors.empty()) throw ConfigError("instruction '" + instruction.id + "': no competitors");
  ScoredInstruction out{std::move(instruction), std::move(candidates), 0.0};
  out.potential = learning_potential(*policy, competitors);
  return out;
}

ScoredInstruction score_record(const DatasetRecord& record, std::string_view policy_source_id) {
  return score_instruction(record.instruction, record.scored_candidates(), policy_source_id);
}

std::vector<ScoredInstruction> filter_instructions(std::span<const ScoredInstruction> scored,
                                                   const SelectionConfig& cfg) {
  std::vector<ScoredInstruction> kept;
  for (const auto& s : scored) {
    const bool usable = std::any_of(s.candidates.begin(), s.candidates.end(), [&](const CandidateResponse& c) {
      return c.source_id != cfg.policy_source_id &&
             (c.score >= cfg.underperform_threshold || scores_equal(c.score, cfg.underperform_threshold));
    });
    if (usable) kept.push_back(s);
  }
  return kept;
}

std::vector<ScoredInstruction> select_top_k(std::span<const ScoredInstruction> scored, std::size_t k) {
  std::vector<ScoredInstruction> ranked(scored.begin(), scored.end());
  const std::size_t n = std::min(k, ranked.size());
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(n), ranked.end(), potential_order);
  ranked.resize(n);
  return ranked;
}

ReferenceList build_reference_list(const ScoredInstruction& scored, std::string_view policy_source_id) {
  const auto policy_count = std::count_if(scored.candidates.begin(), scored.candidates.end(),
                                          [&](const CandidateResponse& c) { return c.source_id == policy_source_id; });
  if (policy_count == 0) {
    throw ConfigError("instruction '" + scored.instruction.id + "': missing policy reference");
  }
  if (policy_count > 1) {
    throw ConfigError("instruction '" + scored.instruction.id + "': duplicate policy reference");
  }
  ReferenceList list{scored.candidates, std::string(policy_source_id)};
  std::stable_sort(list.entries.begin(), list.entries.end(), reference_order);
  return list;
}

SelectionReport summarize(std::span<const ScoredInstruction> selected, std::string_view policy_source_id) {
  SelectionReport report;
  report.count = selected.size();
  if (selected.empty()) return report;
  double potential = 0.0;
  double policy = 0.0;
  for (const auto& s : selected) {
    potential += s.potential;
    policy += s.policy_score(policy_source_id);
  }
  report.mean_potential = potential / static_cast<double>(selected.size());
  report.mean_policy_score = policy / static_cast<double>(selected.size());
  return report;
}

std::string format_report(const SelectionReport& report) {
  nlohmann::ordered_json j;
  j["count"] = report.count;
  j["mean_potential"] = report.mean_potential;
  j["mean_policy_score"] = report.mean_policy_score;
  return j.dump(2) + "\n";
}

SelectionResult select_margin_aware(std::span<const DatasetRecord> records, const SelectionConfig& cfg) {
  cfg.validate();
  std::vector<ScoredInstruction> scored;
  scored.reserve(records.size());
  for (const auto& r : records) scored.push_back(score_record(r, cfg.policy_source_id));
  auto kept = filter_instructions(scored, cfg);
  SelectionResult result;
  result.selected = select_top_k(kept, cfg.k);
  result.report = summarize(result.selected, cfg.policy_source_id);
  return result;
}

std::vector<ScoredInstruction> select_difficulty_prioritized(std::span<const ScoredInstruction> scored,
                                                             std::size_t k, std::string_view policy_source_id) {
  std::vector<std::pair<double, const ScoredInstruction*>> keyed;
  keyed.reserve(scored.size());
  for (const auto& s : scored) keyed.emplace_back(s.policy_score(policy_source_id), &s);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    if (!scores_equal(a.first, b.first)) return a.first < b.first;
    return a.second->instruction.id < b.second->instruction.id;
  });
  std::vector<ScoredInstruction> out;
  for (std::size_t i = 0; i < std::min(k, keyed.size()); ++i) out.push_back(*keyed[i].second);
  return out;
}

std::vector<ScoredInstruction> select_random(std::span<const ScoredInstruction> scored, std::size_t k, Rng& rng) {
  const std::size_t n = scored.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  const std::size_t take = std::min(k, n);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  std::vector<ScoredInstruction> out;
  out.reserve(take);
  for (std::size_t i : idx) out.push_back(scored[i]);
  return out;
}

DatasetRecord to_dataset_record(const ScoredInstruction& scored) {
  DatasetRecord record;
  record.instruction = scored.instruction;
  for (const auto& c : scored.candidates) record.candidates.push_back({c.source_id, c.text, c.score});
  record.potential = scored.potential;
  return record;
}

}  // namespace refladder
