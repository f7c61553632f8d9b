#include "refladder/experiment.hpp"

#include <algorithm>
#include <memory>
#include <set>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "refladder/dataset.hpp"

namespace refladder {
namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
  if (!obj.is_object()) throw ConfigError(std::string(where) + ": expected a JSON object");
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(std::string(where) + ": unknown key '" + key + "'");
    }
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string(where) + ": bad value for '" + key + "'");
  }
}

json parse_json(std::string_view text, std::string_view what) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(std::string(what) + " is not valid JSON");
  return j;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) return base / path;
  return path;
}

std::filesystem::path config_dir(const std::filesystem::path& path) {
  return path.has_parent_path() ? path.parent_path() : std::filesystem::path{};
}

RemoteJudgeConfig parse_remote(const json& j, std::string_view where) {
  check_keys(j,
             {"endpoint", "model", "auth_env", "timeout_ms", "max_retries", "initial_backoff_ms", "variant",
              "temperature", "max_parallel"},
             where);
  RemoteJudgeConfig c;
  c.endpoint = get_or<std::string>(j, "endpoint", "", where);
  c.model = get_or<std::string>(j, "model", "", where);
  c.auth_env = get_or<std::string>(j, "auth_env", "", where);
  c.timeout = std::chrono::milliseconds(get_or<std::int64_t>(j, "timeout_ms", c.timeout.count(), where));
  c.max_retries = get_or<int>(j, "max_retries", c.max_retries, where);
  c.initial_backoff =
      std::chrono::milliseconds(get_or<std::int64_t>(j, "initial_backoff_ms", c.initial_backoff.count(), where));
  c.variant = parse_prompt_variant(get_or<std::string>(j, "variant", "default", where));
  c.temperature = get_or<double>(j, "temperature", c.temperature, where);
  c.max_parallel = get_or<std::size_t>(j, "max_parallel", c.max_parallel, where);
  c.validate();
  return c;
}

SyntheticDatasetParams parse_synthetic(const json& j) {
  constexpr std::string_view where = "synthetic";
  check_keys(j,
             {"instructions", "competitors", "dimensions", "policy_quality_min", "policy_quality_max",
              "headroom_min", "headroom_max", "dimension_noise", "policy_source"},
             where);
  SyntheticDatasetParams p;
  p.instructions = get_or<std::size_t>(j, "instructions", p.instructions, where);
  p.competitors = get_or<std::size_t>(j, "competitors", p.competitors, where);
  p.dimensions = get_or<std::size_t>(j, "dimensions", p.dimensions, where);
  p.policy_quality_min = get_or<double>(j, "policy_quality_min", p.policy_quality_min, where);
  p.policy_quality_max = get_or<double>(j, "policy_quality_max", p.policy_quality_max, where);
  p.headroom_min = get_or<double>(j, "headroom_min", p.headroom_min, where);
  p.headroom_max = get_or<double>(j, "headroom_max", p.headroom_max, where);
  p.dimension_noise = get_or<double>(j, "dimension_noise", p.dimension_noise, where);
  p.policy_source_id = get_or<std::string>(j, "policy_source", p.policy_source_id, where);
  p.validate();
  return p;
}

void parse_selection_block(const json& j, SelectionStrategy& strategy, SelectionConfig& cfg) {
  constexpr std::string_view where = "selection";
  check_keys(j, {"strategy", "k", "underperform_threshold", "policy_source"}, where);
  strategy = parse_selection_strategy(get_or<std::string>(j, "strategy", std::string(to_string(strategy)), where));
  const auto k = get_or<std::int64_t>(j, "k", static_cast<std::int64_t>(cfg.k), where);
  if (k < 1) throw ConfigError("selection: k must be at least 1");
  cfg.k = static_cast<std::size_t>(k);
  cfg.underperform_threshold = get_or<double>(j, "underperform_threshold", cfg.underperform_threshold, where);
  cfg.policy_source_id = get_or<std::string>(j, "policy_source", cfg.policy_source_id, where);
  cfg.validate();
}

ExperimentConfig parse_experiment_json(const json& j, const std::filesystem::path& base_dir,
                                       std::initializer_list<std::string_view> extra_keys = {}) {
  std::vector<std::string_view> allowed = {"dataset",    "synthetic",     "selection",    "curriculum",
                                           "steps",      "batch_size",    "seed",         "sim_judge",
                                           "remote_judge", "learner",     "remote_policy", "reward",
                                           "max_failure_ratio", "output_dir"};
  allowed.insert(allowed.end(), extra_keys.begin(), extra_keys.end());
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  constexpr std::string_view where = "config";

  ExperimentConfig c;
  if (j.contains("dataset")) c.dataset_path = resolve(base_dir, get_or<std::string>(j, "dataset", "", where));
  if (j.contains("synthetic")) c.synthetic = parse_synthetic(j.at("synthetic"));
  if (j.contains("selection")) parse_selection_block(j.at("selection"), c.selection_strategy, c.selection);

  if (j.contains("curriculum")) {
    const auto& cur = j.at("curriculum");
    check_keys(cur, {"mode", "stage_boundaries", "retire_saturated"}, "curriculum");
    c.mode = CurriculumMode::parse(get_or<std::string>(cur, "mode", "dynamic", "curriculum"),
                                   get_or<std::vector<std::int64_t>>(cur, "stage_boundaries", {}, "curriculum"));
    c.sampling.retire_saturated = get_or<bool>(cur, "retire_saturated", false, "curriculum");
  }

  c.steps = get_or<std::int64_t>(j, "steps", c.steps, where);
  c.batch_size = get_or<std::size_t>(j, "batch_size", c.batch_size, where);
  c.seed = get_or<std::uint64_t>(j, "seed", c.seed, where);
  c.max_failure_ratio = get_or<double>(j, "max_failure_ratio", c.max_failure_ratio, where);

  if (j.contains("sim_judge")) {
    const auto& s = j.at("sim_judge");
    check_keys(s, {"tie", "position_bias"}, "sim_judge");
    SimJudgeParams p;
    p.tie = get_or<double>(s, "tie", p.tie, "sim_judge");
    p.position_bias = get_or<double>(s, "position_bias", p.position_bias, "sim_judge");
    c.sim_judge = p;
  }
  if (j.contains("remote_judge")) c.remote_judge = parse_remote(j.at("remote_judge"), "remote_judge");
  if (j.contains("remote_policy")) c.remote_policy = parse_remote(j.at("remote_policy"), "remote_policy");

  if (j.contains("learner")) {
    const auto& l = j.at("learner");
    check_keys(l,
               {"initial_skill", "learning_rate", "gap_peak", "gap_width", "per_instruction_skill",
                "shared_fraction"},
               "learner");
    if (l.contains("initial_skill") && !l.at("initial_skill").is_null()) {
      c.learner.initial_skill = get_or<double>(l, "initial_skill", 0.0, "learner");
    }
    c.learner.learning_rate = get_or<double>(l, "learning_rate", c.learner.learning_rate, "learner");
    c.learner.gap_peak = get_or<double>(l, "gap_peak", c.learner.gap_peak, "learner");
    c.learner.gap_width = get_or<double>(l, "gap_width", c.learner.gap_width, "learner");
    c.learner.per_instruction_skill =
        get_or<bool>(l, "per_instruction_skill", c.learner.per_instruction_skill, "learner");
    c.learner.shared_fraction = get_or<double>(l, "shared_fraction", c.learner.shared_fraction, "learner");
  }
  if (j.contains("reward")) {
    const auto& r = j.at("reward");
    check_keys(r, {"max_response_chars"}, "reward");
    c.reward.max_response_chars = get_or<std::size_t>(r, "max_response_chars", c.reward.max_response_chars, "reward");
  }
  if (j.contains("output_dir")) c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "", where));
  c.validate();
  return c;
}

ojson judge_json(const ExperimentConfig& config) {
  ojson j;
  if (config.sim_judge) {
    j["backend"] = "sim";
    j["tie"] = config.sim_judge->tie;
    j["position_bias"] = config.sim_judge->position_bias;
    j["synthetic"] = true;
  } else {
    j["backend"] = "remote";
    j["model"] = config.remote_judge->model;
    j["variant"] = to_string(config.remote_judge->variant);
    j["temperature"] = config.remote_judge->temperature;
    j["synthetic"] = false;
  }
  return j;
}

ojson pointers_json(const SchedulerState& state) {
  ojson p = ojson::object();
  for (const auto& [id, ptr] : state.pointers) p[id] = ptr;
  return p;
}

CurriculumMode effective_mode(const ExperimentConfig& config) {
  if (config.mode.kind == CurriculumMode::Kind::Static && config.mode.stage_boundaries.empty()) {
    return CurriculumMode::fixed_stages({config.steps / 2 + 1});
  }
  return config.mode;
}

template <typename Fn>
auto with_retry(const RetryPolicy& retry, Fn&& fn) {
  auto backoff = retry.initial_backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      return fn();
    } catch (const TransportError&) {
      if (attempt >= retry.max_retries) throw;
    }
    std::this_thread::sleep_for(backoff);
    backoff = std::chrono::milliseconds(
        static_cast<std::chrono::milliseconds::rep>(static_cast<double>(backoff.count()) * retry.backoff_multiplier));
  }
}

}  // namespace

std::string_view to_string(SelectionStrategy s) {
  switch (s) {
    case SelectionStrategy::All:
      return "all";
    case SelectionStrategy::MarginAware:
      return "margin";
    case SelectionStrategy::DifficultyPrioritized:
      return "difficulty";
    case SelectionStrategy::Random:
      return "random";
  }
  return "all";
}

SelectionStrategy parse_selection_strategy(std::string_view name) {
  if (name == "all") return SelectionStrategy::All;
  if (name == "margin") return SelectionStrategy::MarginAware;
  if (name == "difficulty") return SelectionStrategy::DifficultyPrioritized;
  if (name == "random") return SelectionStrategy::Random;
  throw ConfigError("unknown selection strategy '" + std::string(name) + "' (expected all, margin, difficulty or random)");
}

void ExperimentConfig::validate() const {
  if (dataset_path.has_value() == synthetic.has_value()) {
    throw ConfigError("config: exactly one of 'dataset' and 'synthetic' is required");
  }
  if (sim_judge.has_value() == remote_judge.has_value()) {
    throw ConfigError("config: exactly one of 'sim_judge' and 'remote_judge' is required");
  }
  if (sim_judge) {
    sim_judge->validate();
    learner.validate();
    if (remote_policy) throw ConfigError("config: 'remote_policy' cannot be combined with the simulated judge");
  } else {
    remote_judge->validate();
    if (!remote_policy) throw ConfigError("config: 'remote_judge' needs a 'remote_policy' to generate rollouts");
    remote_policy->validate();
  }
  if (steps < 0) throw ConfigError("config: steps must be >= 0");
  if (batch_size < 1) throw ConfigError("config: batch_size must be >= 1");
  if (!(max_failure_ratio >= 0.0 && max_failure_ratio <= 1.0)) {
    throw ConfigError("config: max_failure_ratio must lie in [0, 1]");
  }
  if (selection_strategy != SelectionStrategy::All) selection.validate();
}

ExperimentConfig parse_experiment_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  return parse_experiment_json(parse_json(json_text, "experiment config"), base_dir);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  return parse_experiment_config(read_text_file(path), config_dir(path));
}

std::string format_summary(const RunSummary& s) {
  ojson j;
  j["seed"] = s.seed;
  j["mode"] = s.mode;
  j["steps"] = s.steps;
  j["batch_size"] = s.batch_size;
  j["instructions"] = s.instructions;
  j["rollouts"] = s.rollouts;
  j["judge_calls"] = s.judge_calls;
  j["wins"] = s.wins;
  j["ties"] = s.ties;
  j["losses"] = s.losses;
  j["degenerate"] = s.degenerate;
  j["skipped"] = s.skipped;
  j["promotions"] = s.promotions;
  j["saturated"] = s.saturated;
  j["initial_skill"] = s.initial_skill ? ojson(*s.initial_skill) : ojson(nullptr);
  j["final_skill"] = s.final_skill ? ojson(*s.final_skill) : ojson(nullptr);
  j["selection"] = {{"count", s.selection.count},
                    {"mean_potential", s.selection.mean_potential},
                    {"mean_policy_score", s.selection.mean_policy_score}};
  if (s.synthetic_judge) {
    j["judge"] = {{"backend", "sim"},
                  {"tie", s.judge_params.tie},
                  {"position_bias", s.judge_params.position_bias},
                  {"synthetic", true}};
  } else {
    j["judge"] = {{"backend", "remote"}, {"synthetic", false}};
  }
  const TrainerDefaults t;
  j["trainer_defaults"] = {{"batch_size", t.batch_size},
                           {"max_prompt_tokens", t.max_prompt_tokens},
                           {"max_response_tokens", t.max_response_tokens},
                           {"actor_learning_rate", t.actor_learning_rate},
                           {"actor_warmup_ratio", t.actor_warmup_ratio},
                           {"critic_learning_rate", t.critic_learning_rate},
                           {"critic_warmup_ratio", t.critic_warmup_ratio},
                           {"kl_coefficient", t.kl_coefficient},
                           {"total_steps", t.total_steps},
                           {"eval_interval", t.eval_interval}};
  j["rng"] = kRngAlgorithm;
  return j.dump(2) + "\n";
}

std::vector<ScoredInstruction> prepare_training_set(const ExperimentConfig& config) {
  const Rng master(config.seed);
  std::vector<DatasetRecord> records;
  if (config.dataset_path) {
    records = read_dataset(*config.dataset_path);
  } else {
    auto params = *config.synthetic;
    params.policy_source_id = config.selection.policy_source_id;
    Rng rng = master.split(Stream::Dataset);
    records = generate_synthetic_dataset(params, rng);
  }
  const auto& policy_source = config.selection.policy_source_id;
  std::vector<ScoredInstruction> scored;
  scored.reserve(records.size());
  for (const auto& r : records) scored.push_back(score_record(r, policy_source));

  switch (config.selection_strategy) {
    case SelectionStrategy::All:
      return scored;
    case SelectionStrategy::MarginAware:
      return select_top_k(filter_instructions(scored, config.selection), config.selection.k);
    case SelectionStrategy::DifficultyPrioritized:
      return select_difficulty_prioritized(scored, config.selection.k, policy_source);
    case SelectionStrategy::Random: {
      Rng rng = master.split(Stream::Selection);
      return select_random(scored, config.selection.k, rng);
    }
  }
  return scored;
}

RunResult run_experiment(const ExperimentConfig& config, const RunOverrides& overrides) {
  config.validate();
  const Rng master(config.seed);
  const CurriculumMode mode = effective_mode(config);
  const auto& policy_source = config.selection.policy_source_id;

  const auto training = prepare_training_set(config);
  std::vector<CurriculumEntry> entries;
  std::map<std::string, double> policy_scores;
  entries.reserve(training.size());
  for (const auto& s : training) {
    entries.push_back({s.instruction, build_reference_list(s, policy_source)});
    policy_scores[s.instruction.id] = s.policy_score(policy_source);
  }
  if (entries.empty()) throw ConfigError("training set is empty after selection");
  if (config.batch_size > entries.size()) {
    throw ConfigError("batch_size " + std::to_string(config.batch_size) + " exceeds training set size " +
                      std::to_string(entries.size()));
  }
  std::map<std::string, const Instruction*> instructions;
  for (const auto& e : entries) instructions[e.instruction.id] = &e.instruction;
  const ReferenceBook book = make_reference_book(entries);

  SchedulerState state = init_state(entries);
  Rng assignment = master.split(Stream::Assignment);
  state = prepare_state(std::move(state), mode, assignment);
  Rng sampler = master.split(Stream::Sampler);

  std::unique_ptr<Judge> judge_impl;
  std::unique_ptr<Policy> policy_impl;
  std::unique_ptr<ChatTransport> owned_judge_transport;
  std::unique_ptr<ChatTransport> owned_policy_transport;
  SimulatedLearner* learner = nullptr;
  std::size_t parallelism = 1;
  RetryPolicy retry{0, std::chrono::milliseconds(0), 1.0};
  if (config.sim_judge) {
    judge_impl = std::make_unique<SimulatedJudge>(*config.sim_judge, master.split(Stream::Judge));
    auto sim_learner = std::make_unique<SimulatedLearner>(config.learner, policy_scores);
    learner = sim_learner.get();
    policy_impl = std::move(sim_learner);
  } else {
    ChatTransport* judge_transport = overrides.judge_transport;
    if (judge_transport == nullptr) {
      owned_judge_transport = std::make_unique<HttpChatClient>(*config.remote_judge);
      judge_transport = owned_judge_transport.get();
    }
    ChatTransport* policy_transport = overrides.policy_transport;
    if (policy_transport == nullptr) {
      owned_policy_transport = std::make_unique<HttpChatClient>(*config.remote_policy);
      policy_transport = owned_policy_transport.get();
    }
    judge_impl = std::make_unique<RemotePairwiseJudge>(*judge_transport, config.remote_judge->variant);
    policy_impl = std::make_unique<RemotePolicy>(*policy_transport);
    parallelism = config.remote_judge->max_parallel;
    retry = config.remote_judge->retry_policy();
  }
  CountingJudge judge(*judge_impl);

  RunSummary summary;
  summary.seed = config.seed;
  summary.mode = mode.name();
  summary.batch_size = config.batch_size;
  summary.instructions = entries.size();
  summary.selection = summarize(training, policy_source);
  summary.synthetic_judge = config.sim_judge.has_value();
  if (config.sim_judge) summary.judge_params = *config.sim_judge;
  if (learner) summary.initial_skill = learner->skill();

  std::string trace;
  const auto emit = [&trace](const ojson& j) {
    trace += j.dump();
    trace += '\n';
  };
  {
    ojson header;
    header["type"] = "header";
    header["format"] = "refladder-trace/1";
    header["rng"] = kRngAlgorithm;
    header["seed"] = config.seed;
    header["mode"] = mode.name();
    header["stage_boundaries"] = mode.stage_boundaries;
    header["steps"] = config.steps;
    header["batch_size"] = config.batch_size;
    header["judge"] = judge_json(config);
    emit(header);
    emit(ojson{{"type", "init"}, {"step", 0}, {"pointers", pointers_json(state)}});
  }

  std::vector<StateSnapshot> history{{0, state}};

  struct Slot {
    std::string id;
    const CandidateResponse* reference = nullptr;
    Rollout rollout;
    RetryOutcome outcome;
  };

  std::int64_t steps_done = 0;
  for (std::int64_t step = 1; step <= config.steps; ++step) {
    const auto batch = sample_batch(state, config.batch_size, sampler, config.sampling);
    if (batch.empty()) break;
    std::vector<Slot> slots(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      slots[i].id = batch[i];
      slots[i].reference = &current_reference(state, book, batch[i]);
    }

    parallel_for_bounded(slots.size(), parallelism, [&](std::size_t i) {
      Slot& slot = slots[i];
      const Instruction& instruction = *instructions.at(slot.id);
      try {
        slot.rollout = with_retry(retry, [&] { return policy_impl->generate(instruction); });
      } catch (const TransportError& e) {
        slot.outcome.last_error = std::string("generation failed: ") + e.what();
        spdlog::warn("skipping '{}': {}", slot.id, slot.outcome.last_error);
        return;
      }
      slot.outcome = adjudicate_with_retry(judge, instruction, *slot.reference, slot.rollout, config.reward, retry);
    });

    std::vector<BatchOutcome> outcomes;
    std::vector<PolicyFeedback> feedback;
    std::vector<ojson> records;
    for (const auto& slot : slots) {
      ++summary.rollouts;
      if (!slot.outcome.adjudication) {
        ++summary.skipped;
        records.push_back(
            ojson{{"type", "skip"}, {"step", step}, {"instruction_id", slot.id}, {"error", slot.outcome.last_error}});
        continue;
      }
      const auto& adj = *slot.outcome.adjudication;
      switch (adj.verdict) {
        case Verdict::Win:
          ++summary.wins;
          break;
        case Verdict::Tie:
          ++summary.ties;
          break;
        case Verdict::Loss:
          ++summary.losses;
          break;
      }
      if (!adj.judged) ++summary.degenerate;
      const int before = state.pointers.at(slot.id);
      const bool promoted = mode.kind == CurriculumMode::Kind::Dynamic && adj.reward.is_win() &&
                            before < state.list_lengths.at(slot.id);
      if (promoted) ++summary.promotions;
      outcomes.push_back({slot.id, adj.reward, step});
      feedback.push_back({slot.id, slot.rollout, adj.reward, slot.reference->score});

      ojson r;
      r["type"] = "rollout";
      r["step"] = step;
      r["instruction_id"] = slot.id;
      r["reference_source"] = slot.reference->source_id;
      r["reference_score"] = slot.reference->score;
      r["pointer_before"] = before;
      if (slot.rollout.latent_quality) r["policy_quality"] = *slot.rollout.latent_quality;
      r["judged"] = adj.judged;
      r["verdict"] = to_string(adj.verdict);
      r["reward"] = adj.reward.value();
      r["pointer_after"] = before + (promoted ? 1 : 0);
      records.push_back(std::move(r));
    }

    policy_impl->update(feedback);
    SchedulerState next = apply_outcomes(state, outcomes, mode, step);

    for (const auto& r : records) emit(r);
    if (mode.kind == CurriculumMode::Kind::Static && next.pointers != state.pointers) {
      emit(ojson{{"type", "stage"}, {"step", step}, {"pointers", pointers_json(next)}});
    }
    ojson step_record{{"type", "step"}, {"step", step}};
    if (learner) step_record["skill"] = learner->skill();
    emit(step_record);

    state = std::move(next);
    history.push_back({step, state});
    steps_done = step;
  }

  summary.steps = steps_done;
  summary.judge_calls = judge.calls();
  for (const auto& [id, ptr] : state.pointers) {
    if (ptr >= state.list_lengths.at(id)) ++summary.saturated;
  }
  if (learner) summary.final_skill = learner->skill();

  RunResult result;
  result.summary = summary;
  result.trace = std::move(trace);
  result.schedule_csv = format_schedule_csv(schedule_trace(history));
  result.checkpoint = Checkpoint{state, steps_done, config.seed, mode};

  if (config.output_dir) {
    const auto& dir = *config.output_dir;
    write_text_file(dir / "trace.jsonl", result.trace);
    write_text_file(dir / "schedule.csv", result.schedule_csv);
    write_text_file(dir / "summary.json", format_summary(summary));
    save_checkpoint(dir / "checkpoint.json", result.checkpoint);
  }

  if (summary.rollouts > 0) {
    const double ratio = static_cast<double>(summary.skipped) / static_cast<double>(summary.rollouts);
    if (ratio > config.max_failure_ratio) {
      throw JudgeExhaustedError(std::to_string(summary.skipped) + " of " + std::to_string(summary.rollouts) +
                                " rollouts skipped after judge retries, above max_failure_ratio " +
                                std::to_string(config.max_failure_ratio));
    }
  }
  return result;
}

SweepConfig parse_sweep_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const auto j = parse_json(json_text, "sweep config");
  SweepConfig s;
  s.base = parse_experiment_json(j, base_dir, {"seeds", "modes", "parallelism"});
  s.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {s.base.seed}, "sweep");
  if (s.seeds.empty()) throw ConfigError("sweep: seeds must not be empty");
  if (j.contains("modes")) {
    for (const auto& m : j.at("modes")) {
      if (!m.is_string()) throw ConfigError("sweep: modes must be strings");
      s.modes.push_back(CurriculumMode::parse(m.get<std::string>(), s.base.mode.stage_boundaries));
    }
  } else {
    s.modes.push_back(s.base.mode);
  }
  s.parallelism = get_or<std::size_t>(j, "parallelism", std::max(1u, std::thread::hardware_concurrency()), "sweep");
  if (s.parallelism == 0) throw ConfigError("sweep: parallelism must be >= 1");
  return s;
}

SweepConfig load_sweep_config(const std::filesystem::path& path) {
  return parse_sweep_config(read_text_file(path), config_dir(path));
}

SweepResult run_sweep(const SweepConfig& config) {
  std::vector<ExperimentConfig> runs;
  for (const auto& mode : config.modes) {
    for (auto seed : config.seeds) {
      ExperimentConfig c = config.base;
      c.mode = mode;
      c.seed = seed;
      if (config.base.output_dir) {
        c.output_dir = *config.base.output_dir / mode.name() / ("seed-" + std::to_string(seed));
      }
      runs.push_back(std::move(c));
    }
  }
  SweepResult result;
  result.runs.resize(runs.size());
  parallel_for_bounded(runs.size(), config.parallelism,
                       [&](std::size_t i) { result.runs[i] = run_experiment(runs[i]).summary; });

  ojson j;
  ojson by_mode = ojson::object();
  for (const auto& mode : config.modes) {
    double total = 0.0;
    std::size_t n = 0;
    for (const auto& r : result.runs) {
      if (r.mode == mode.name() && r.final_skill) {
        total += *r.final_skill;
        ++n;
      }
    }
    by_mode[mode.name()] = {{"runs", n}, {"mean_final_skill", n ? ojson(total / static_cast<double>(n)) : ojson(nullptr)}};
  }
  j["modes"] = std::move(by_mode);
  ojson all = ojson::array();
  for (const auto& r : result.runs) all.push_back(ojson::parse(format_summary(r)));
  j["runs"] = std::move(all);
  result.summary_json = j.dump(2) + "\n";
  if (config.base.output_dir) write_text_file(*config.base.output_dir / "sweep_summary.json", result.summary_json);
  return result;
}

SelectDataConfig parse_select_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const auto j = parse_json(json_text, "select config");
  check_keys(j, {"input", "output", "report", "selection", "grader", "seed"}, "select config");
  SelectDataConfig c;
  const auto input = get_or<std::string>(j, "input", "", "select config");
  const auto output = get_or<std::string>(j, "output", "", "select config");
  if (input.empty() || output.empty()) throw ConfigError("select config: 'input' and 'output' are required");
  c.input = resolve(base_dir, input);
  c.output = resolve(base_dir, output);
  if (j.contains("report")) c.report = resolve(base_dir, get_or<std::string>(j, "report", "", "select config"));
  if (j.contains("selection")) parse_selection_block(j.at("selection"), c.strategy, c.selection);
  if (j.contains("grader")) c.grader = parse_remote(j.at("grader"), "grader");
  c.seed = get_or<std::uint64_t>(j, "seed", 0, "select config");
  return c;
}

SelectDataConfig load_select_config(const std::filesystem::path& path) {
  return parse_select_config(read_text_file(path), config_dir(path));
}

SelectDataResult select_data(const SelectDataConfig& config, ChatTransport* grader_transport) {
  config.selection.validate();
  auto records = read_dataset(config.input);

  const bool needs_grading =
      std::any_of(records.begin(), records.end(), [](const DatasetRecord& r) { return !r.fully_scored(); });
  if (needs_grading) {
    if (!config.grader) throw ConfigError("dataset has unscored candidates and no grader is configured");
    std::unique_ptr<ChatTransport> owned;
    if (grader_transport == nullptr) {
      owned = std::make_unique<HttpChatClient>(*config.grader);
      grader_transport = owned.get();
    }
    RemotePointwiseGrader grader(*grader_transport, config.grader->retry_policy(), config.grader->max_parallel);
    for (auto& r : records) {
      for (auto& c : r.candidates) {
        if (!c.score) c.score = grader.grade(r.instruction, c.text);
      }
    }
  }

  const auto& policy_source = config.selection.policy_source_id;
  std::vector<ScoredInstruction> scored;
  for (const auto& r : records) scored.push_back(score_record(r, policy_source));
  std::vector<ScoredInstruction> chosen;
  switch (config.strategy) {
    case SelectionStrategy::All:
      chosen = scored;
      break;
    case SelectionStrategy::MarginAware:
      chosen = select_top_k(filter_instructions(scored, config.selection), config.selection.k);
      break;
    case SelectionStrategy::DifficultyPrioritized:
      chosen = select_difficulty_prioritized(scored, config.selection.k, policy_source);
      break;
    case SelectionStrategy::Random: {
      Rng rng = Rng(config.seed).split(Stream::Selection);
      chosen = select_random(scored, config.selection.k, rng);
      break;
    }
  }

  SelectDataResult result;
  result.report = summarize(chosen, policy_source);
  for (const auto& s : chosen) result.selected.push_back(to_dataset_record(s));
  write_dataset(config.output, result.selected);
  if (config.report) write_text_file(*config.report, format_report(result.report));
  return result;
}

ScheduleTrace schedule_from_trace(std::string_view trace_jsonl) {
  std::vector<StateSnapshot> history;
  SchedulerState current;
  std::size_t line_no = 0;
  while (!trace_jsonl.empty()) {
    ++line_no;
    const auto nl = trace_jsonl.find('\n');
    const auto line = trace_jsonl.substr(0, nl);
    trace_jsonl = nl == std::string_view::npos ? std::string_view{} : trace_jsonl.substr(nl + 1);
    if (line.empty()) continue;
    const auto j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw IoError("trace line " + std::to_string(line_no) + " is not JSON");
    try {
      const auto type = j.at("type").get<std::string>();
      if (type == "init" || type == "stage") {
        for (const auto& [id, p] : j.at("pointers").items()) current.pointers[id] = p.get<int>();
        if (type == "init") history.push_back({0, current});
      } else if (type == "rollout") {
        current.pointers[j.at("instruction_id").get<std::string>()] = j.at("pointer_after").get<int>();
      } else if (type == "step") {
        history.push_back({j.at("step").get<std::int64_t>(), current});
      }
    } catch (const json::exception& e) {
      throw IoError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (history.empty()) throw IoError("trace has no init record");
  return schedule_trace(history);
}

TraceExportConfig parse_trace_export_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  const auto j = parse_json(json_text, "trace config");
  check_keys(j, {"trace", "output"}, "trace config");
  const auto trace = get_or<std::string>(j, "trace", "", "trace config");
  const auto output = get_or<std::string>(j, "output", "", "trace config");
  if (trace.empty() || output.empty()) throw ConfigError("trace config: 'trace' and 'output' are required");
  return {resolve(base_dir, trace), resolve(base_dir, output)};
}

TraceExportConfig load_trace_export_config(const std::filesystem::path& path) {
  return parse_trace_export_config(read_text_file(path), config_dir(path));
}

void export_schedule(const TraceExportConfig& config) {
  write_text_file(config.output, format_schedule_csv(schedule_from_trace(read_text_file(config.trace))));
}

}  // namespace refladder
