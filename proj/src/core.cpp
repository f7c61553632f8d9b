#include "refladder/core.hpp"

#include <cmath>

namespace refladder {

bool scores_equal(double a, double b) { return std::fabs(a - b) <= kScoreTolerance; }

bool reference_order(const CandidateResponse& a, const CandidateResponse& b) {
  if (!scores_equal(a.score, b.score)) return a.score < b.score;
  return a.source_id < b.source_id;
}

std::optional<std::string> validate_reference_list(const ReferenceList& list) {
  if (list.entries.empty()) return "empty reference list";
  int policy_entries = 0;
  for (std::size_t i = 0; i < list.entries.size(); ++i) {
    const auto& entry = list.entries[i];
    if (!(entry.score >= kMinScore - kScoreTolerance && entry.score <= kMaxScore + kScoreTolerance)) {
      return "score out of range at index " + std::to_string(i + 1);
    }
    if (i > 0) {
      const double prev = list.entries[i - 1].score;
      if (entry.score < prev && !scores_equal(entry.score, prev)) {
        return "not ascending at index " + std::to_string(i + 1);
      }
    }
    if (entry.source_id == list.policy_source_id) ++policy_entries;
  }
  if (policy_entries == 0) return "missing policy reference";
  if (policy_entries > 1) return "duplicate policy reference";
  return std::nullopt;
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Win:
      return "win";
    case Verdict::Tie:
      return "tie";
    case Verdict::Loss:
      return "loss";
  }
  return "loss";
}

Verdict parse_verdict_name(std::string_view name) {
  if (name == "win") return Verdict::Win;
  if (name == "tie") return Verdict::Tie;
  if (name == "loss") return Verdict::Loss;
  throw ConfigError("unknown verdict '" + std::string(name) + "'");
}

}  // namespace refladder
