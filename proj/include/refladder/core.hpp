// Domain types shared by every refladder module.
//
// Scores live on the judge's 1-10 scale and are stored as doubles; they are
// usually means of integer dimension scores, so two scores closer than
// kScoreTolerance are treated as equal and ordered by source id instead.

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace refladder {

inline constexpr double kMinScore = 1.0;
inline constexpr double kMaxScore = 10.0;
inline constexpr double kScoreTolerance = 1e-9;
inline constexpr std::string_view kDefaultPolicySource = "policy";

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or violated precondition on user-supplied input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Unreadable, unwritable or malformed files.
class IoError : public Error {
 public:
  using Error::Error;
};

struct Instruction {
  std::string id;
  std::string prompt_text;
  // One grading-dimension description per entry.
  std::optional<std::vector<std::string>> criteria;

  bool operator==(const Instruction&) const = default;
};

struct CandidateResponse {
  std::string source_id;
  std::string text;
  double score = kMinScore;

  bool operator==(const CandidateResponse&) const = default;
};

bool scores_equal(double a, double b);

/// Ascending by score; near-equal scores fall back to source_id.
bool reference_order(const CandidateResponse& a, const CandidateResponse& b);

/// A stage-wise reference list: every candidate for one instruction, weakest
/// first, including exactly one response from the initial policy.
struct ReferenceList {
  std::vector<CandidateResponse> entries;
  std::string policy_source_id{kDefaultPolicySource};

  std::size_t size() const { return entries.size(); }
  bool operator==(const ReferenceList&) const = default;
};

/// Returns std::nullopt when the list is well formed, otherwise a description
/// of the first violated invariant.
std::optional<std::string> validate_reference_list(const ReferenceList& list);

enum class Verdict { Win, Tie, Loss };

std::string_view to_string(Verdict v);
Verdict parse_verdict_name(std::string_view name);

/// Scalar reward for one comparison. Only three values exist.
class Reward {
 public:
  static constexpr Reward from_verdict(Verdict v) {
    switch (v) {
      case Verdict::Win:
        return Reward(1.0);
      case Verdict::Tie:
        return Reward(0.5);
      case Verdict::Loss:
        break;
    }
    return Reward(0.0);
  }

  constexpr double value() const { return value_; }
  constexpr bool is_win() const { return value_ == 1.0; }
  constexpr bool operator==(const Reward&) const = default;

 private:
  constexpr explicit Reward(double value) : value_(value) {}
  double value_;
};

/// A policy generation. Simulated policies attach their latent quality so a
/// simulated judge can adjudicate without looking at text.
struct Rollout {
  std::string text;
  std::optional<double> latent_quality;
};

/// Per-instruction reference pointers (1-based) and reference list lengths.
struct SchedulerState {
  std::map<std::string, int> pointers;
  std::map<std::string, int> list_lengths;

  bool operator==(const SchedulerState&) const = default;
};

}  // namespace refladder
