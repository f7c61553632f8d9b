// Margin-aware data selection.
//
// Every instruction carries pre-generated responses from the policy and from a
// set of competitor models, each graded on the 1-10 scale. The learning
// potential of an instruction is how far the best competitor scores above the
// policy. Selection drops instructions where no competitor reaches the
// under-performance threshold, then keeps the k instructions with the largest
// potential. The surviving candidates become the instruction's ascending
// reference list.

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refladder/core.hpp"
#include "refladder/dataset.hpp"
#include "refladder/random.hpp"

namespace refladder {

struct SelectionConfig {
  std::size_t k = 1500;
  double underperform_threshold = 7.0;
  std::string policy_source_id{kDefaultPolicySource};

  void validate() const;
};

struct ScoredInstruction {
  Instruction instruction;
  std::vector<CandidateResponse> candidates;
  double potential = 0.0;

  /// Score of the single policy-sourced candidate.
  double policy_score(std::string_view policy_source_id) const;
  bool operator==(const ScoredInstruction&) const = default;
};

/// Arithmetic mean of integer dimension scores in [1, 10].
double aggregate_scores(std::span<const int> dimension_scores);

/// max(competitor_scores) - policy_score. May be negative.
double learning_potential(double policy_score, std::span<const double> competitor_scores);

/// Splits candidates into the policy entry and competitors and computes the
/// potential. Requires exactly one policy entry and at least one competitor.
ScoredInstruction score_instruction(Instruction instruction,
                                    std::vector<CandidateResponse> candidates,
                                    std::string_view policy_source_id);

ScoredInstruction score_record(const DatasetRecord& record, std::string_view policy_source_id);

/// Keeps instructions where some competitor scores at least the threshold.
/// Order is preserved.
std::vector<ScoredInstruction> filter_instructions(std::span<const ScoredInstruction> scored,
                                                   const SelectionConfig& cfg);

/// The k largest potentials, descending, ties broken by ascending id.
std::vector<ScoredInstruction> select_top_k(std::span<const ScoredInstruction> scored, std::size_t k);

ReferenceList build_reference_list(const ScoredInstruction& scored, std::string_view policy_source_id);

struct SelectionReport {
  std::size_t count = 0;
  double mean_potential = 0.0;
  double mean_policy_score = 0.0;
};

SelectionReport summarize(std::span<const ScoredInstruction> selected, std::string_view policy_source_id);
std::string format_report(const SelectionReport& report);

struct SelectionResult {
  std::vector<ScoredInstruction> selected;
  SelectionReport report;
};

/// filter -> top-k over a fully scored dataset.
SelectionResult select_margin_aware(std::span<const DatasetRecord> records, const SelectionConfig& cfg);

// Baselines used to compare selection strategies. Neither applies the filter.

/// The k instructions where the policy scores lowest (ties by id).
std::vector<ScoredInstruction> select_difficulty_prioritized(std::span<const ScoredInstruction> scored,
                                                             std::size_t k, std::string_view policy_source_id);
/// k instructions drawn uniformly without replacement, in input order.
std::vector<ScoredInstruction> select_random(std::span<const ScoredInstruction> scored, std::size_t k,
                                             Rng& rng);

/// Back to dataset form, with the potential field filled in.
DatasetRecord to_dataset_record(const ScoredInstruction& scored);

}  // namespace refladder
