// Reference scheduling: which reference each instruction's rollouts are
// compared against, and how that changes during training.
//
// Dynamic mode keeps a 1-based pointer per instruction into its ascending
// reference list. Every pointer starts at 1; an instruction whose rollout
// beats the current reference (reward exactly 1) moves to the next stronger
// reference unless it is already at the top. Ties and losses keep the
// reference. Instructions therefore climb their lists asynchronously.
//
// Static mode moves every instruction together at fixed step boundaries.
// None mode assigns each instruction a random fixed reference up front.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "refladder/core.hpp"
#include "refladder/random.hpp"

namespace refladder {

struct CurriculumMode {
  enum class Kind { Dynamic, Static, None };

  Kind kind = Kind::Dynamic;
  // Static only: steps at which the next stage begins, strictly increasing.
  std::vector<std::int64_t> stage_boundaries;

  static CurriculumMode dynamic() { return {Kind::Dynamic, {}}; }
  static CurriculumMode fixed_stages(std::vector<std::int64_t> boundaries);
  static CurriculumMode none() { return {Kind::None, {}}; }

  std::string name() const;
  static CurriculumMode parse(const std::string& name, std::vector<std::int64_t> boundaries = {});
  bool operator==(const CurriculumMode&) const = default;
};

struct BatchOutcome {
  std::string instruction_id;
  Reward reward = Reward::from_verdict(Verdict::Loss);
  std::int64_t step = 0;
};

struct CurriculumEntry {
  Instruction instruction;
  ReferenceList references;
};

using ReferenceBook = std::map<std::string, ReferenceList>;

ReferenceBook make_reference_book(std::span<const CurriculumEntry> dataset);

/// All pointers at 1. Throws ConfigError naming the first instruction whose
/// reference list is invalid.
SchedulerState init_state(std::span<const CurriculumEntry> dataset);

/// Mode-specific starting assignment applied once before the first step:
/// None draws a fixed pointer per instruction, Static moves to stage 0,
/// Dynamic leaves the state untouched.
SchedulerState prepare_state(SchedulerState state, const CurriculumMode& mode, Rng& rng);

struct SamplingOptions {
  // Drop instructions whose pointer sits at the top of their list.
  bool retire_saturated = false;
};

/// batch_size distinct ids, uniform without replacement. Throws ConfigError
/// if batch_size exceeds the number of instructions. With retire_saturated the
/// batch shrinks when fewer unsaturated instructions remain.
std::vector<std::string> sample_batch(const SchedulerState& state, std::size_t batch_size, Rng& rng,
                                      const SamplingOptions& options = {});

const CandidateResponse& current_reference(const SchedulerState& state, const ReferenceBook& lists,
                                           const std::string& id);

/// Pointer a Static schedule uses at `step` for a list of `length` entries.
/// Stage s of S covers the s-th contiguous slice of the list; the pointer is
/// the upper median of that slice.
int static_stage_pointer(const CurriculumMode& mode, std::int64_t step, int length);

/// Applies one batch of outcomes. Dynamic promotes on wins below the top;
/// Static ignores rewards and moves to the stage of the step after the
/// batch; None never changes pointers. Throws ConfigError on unknown ids.
SchedulerState apply_outcomes(const SchedulerState& state, std::span<const BatchOutcome> outcomes,
                              const CurriculumMode& mode);
/// Same, with the batch step given explicitly (needed when every outcome of a
/// Static-mode batch was skipped).
SchedulerState apply_outcomes(const SchedulerState& state, std::span<const BatchOutcome> outcomes,
                              const CurriculumMode& mode, std::int64_t step);

bool is_saturated(const SchedulerState& state, const std::string& id);

struct StateSnapshot {
  std::int64_t step = 0;
  SchedulerState state;
};

struct SchedulePoint {
  std::int64_t step = 0;
  int pointer = 1;
  bool operator==(const SchedulePoint&) const = default;
};

using ScheduleTrace = std::map<std::string, std::vector<SchedulePoint>>;

/// Per-instruction staircase: the first snapshot's pointer, then one point
/// for every snapshot where the pointer changed.
ScheduleTrace schedule_trace(std::span<const StateSnapshot> history);

/// CSV with header "instruction_id,step,pointer".
std::string format_schedule_csv(const ScheduleTrace& trace);

struct Checkpoint {
  SchedulerState state;
  std::int64_t step = 0;
  std::uint64_t seed = 0;
  CurriculumMode mode;

  bool operator==(const Checkpoint&) const = default;
};

std::string format_checkpoint(const Checkpoint& checkpoint);
Checkpoint parse_checkpoint(std::string_view text);
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// The policy being trained. generate() produces a rollout; update() is the
/// RL updater, called once per batch with that batch's feedback in order.
struct PolicyFeedback {
  std::string instruction_id;
  Rollout rollout;
  Reward reward = Reward::from_verdict(Verdict::Loss);
  double reference_score = 0.0;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Rollout generate(const Instruction& instruction) = 0;
  virtual void update(std::span<const PolicyFeedback> batch) = 0;
};

}  // namespace refladder
