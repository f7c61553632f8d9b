// End-to-end runs: configuration files, the training loop, sweeps, data
// selection and trace export. These back the `refladder` subcommands.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "refladder/core.hpp"
#include "refladder/remote_judge.hpp"
#include "refladder/reward.hpp"
#include "refladder/scheduler.hpp"
#include "refladder/selection.hpp"
#include "refladder/sim.hpp"

namespace refladder {

/// Remote judge retries ran out for more than the allowed share of rollouts.
class JudgeExhaustedError : public Error {
 public:
  using Error::Error;
};

/// Hyperparameters used by the reference PPO training setup. Nothing here
/// trains a model; they are carried in run summaries so an external trainer
/// plugged in behind Policy can be configured to match.
struct TrainerDefaults {
  std::size_t batch_size = 32;
  std::size_t max_prompt_tokens = 4096;
  std::size_t max_response_tokens = 10000;
  double actor_learning_rate = 1e-6;
  double actor_warmup_ratio = 0.4;
  double critic_learning_rate = 1e-5;
  double critic_warmup_ratio = 0.05;
  double kl_coefficient = 0.001;
  std::size_t total_steps = 400;
  std::size_t eval_interval = 50;
};

enum class SelectionStrategy { All, MarginAware, DifficultyPrioritized, Random };

std::string_view to_string(SelectionStrategy s);
SelectionStrategy parse_selection_strategy(std::string_view name);

struct ExperimentConfig {
  std::optional<std::filesystem::path> dataset_path;
  std::optional<SyntheticDatasetParams> synthetic;

  SelectionStrategy selection_strategy = SelectionStrategy::All;
  SelectionConfig selection;

  CurriculumMode mode = CurriculumMode::dynamic();
  SamplingOptions sampling;

  // Exactly one judge backend. The simulated judge pairs with the simulated
  // learner; the remote judge pairs with a remote policy endpoint.
  std::optional<SimJudgeParams> sim_judge;
  std::optional<RemoteJudgeConfig> remote_judge;
  LearnerParams learner;
  std::optional<RemoteJudgeConfig> remote_policy;

  RewardConfig reward;
  std::int64_t steps = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  double max_failure_ratio = 0.1;
  std::optional<std::filesystem::path> output_dir;

  void validate() const;
};

/// Parses a JSON experiment config. Relative paths resolve against base_dir.
ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct RunSummary {
  std::uint64_t seed = 0;
  std::string mode;
  std::int64_t steps = 0;
  std::size_t batch_size = 0;
  std::size_t instructions = 0;
  std::uint64_t rollouts = 0;
  std::uint64_t judge_calls = 0;
  std::uint64_t wins = 0;
  std::uint64_t ties = 0;
  std::uint64_t losses = 0;
  std::uint64_t degenerate = 0;
  std::uint64_t skipped = 0;
  std::uint64_t promotions = 0;
  std::size_t saturated = 0;
  std::optional<double> initial_skill;
  std::optional<double> final_skill;
  SelectionReport selection;
  bool synthetic_judge = true;
  SimJudgeParams judge_params;
};

std::string format_summary(const RunSummary& summary);

struct RunResult {
  RunSummary summary;
  std::string trace;         // JSONL
  std::string schedule_csv;
  Checkpoint checkpoint;
};

/// Test seams: substitute the chat transport for the remote judge/policy.
struct RunOverrides {
  ChatTransport* judge_transport = nullptr;
  ChatTransport* policy_transport = nullptr;
};

/// Runs the training loop. When output_dir is set, writes trace.jsonl,
/// schedule.csv, summary.json and checkpoint.json there. Throws
/// JudgeExhaustedError (after writing outputs) when the share of skipped
/// rollouts exceeds max_failure_ratio.
RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides = {});

/// Dataset after the configured selection strategy, as scored instructions.
std::vector<ScoredInstruction> prepare_training_set(const ExperimentConfig& config);

struct SweepConfig {
  ExperimentConfig base;
  std::vector<std::uint64_t> seeds;
  std::vector<CurriculumMode> modes;
  std::size_t parallelism = 1;
};

SweepConfig parse_sweep_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
SweepConfig load_sweep_config(const std::filesystem::path& path);

struct SweepResult {
  std::vector<RunSummary> runs;  // modes outer, seeds inner
  std::string summary_json;
};

/// One run per (mode, seed). Runs are independent and may execute in
/// parallel; results do not depend on the parallelism. Per-run outputs go to
/// output_dir/<mode>/seed-<seed>/ when output_dir is set.
SweepResult run_sweep(const SweepConfig& config);

struct SelectDataConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  std::optional<std::filesystem::path> report;
  SelectionStrategy strategy = SelectionStrategy::MarginAware;
  SelectionConfig selection;
  std::optional<RemoteJudgeConfig> grader;
  std::uint64_t seed = 0;
};

SelectDataConfig parse_select_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
SelectDataConfig load_select_config(const std::filesystem::path& path);

struct SelectDataResult {
  std::vector<DatasetRecord> selected;
  SelectionReport report;
};

/// Grades unscored candidates (remote pointwise grader required), selects,
/// writes the selected JSONL and the report.
SelectDataResult select_data(const SelectDataConfig& config, ChatTransport* grader_transport = nullptr);

/// Rebuilds the per-instruction schedule from a trace written by
/// run_experiment.
ScheduleTrace schedule_from_trace(std::string_view trace_jsonl);

struct TraceExportConfig {
  std::filesystem::path trace;
  std::filesystem::path output;
};

TraceExportConfig parse_trace_export_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
TraceExportConfig load_trace_export_config(const std::filesystem::path& path);
void export_schedule(const TraceExportConfig& config);

}  // namespace refladder
