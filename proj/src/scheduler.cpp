#include "refladder/scheduler.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "refladder/dataset.hpp"

namespace refladder {
namespace {

using ojson = nlohmann::ordered_json;

int& pointer_of(SchedulerState& state, const std::string& id) {
  auto it = state.pointers.find(id);
  if (it == state.pointers.end()) throw ConfigError("unknown instruction id '" + id + "'");
  return it->second;
}

int length_of(const SchedulerState& state, const std::string& id) {
  auto it = state.list_lengths.find(id);
  if (it == state.list_lengths.end()) throw ConfigError("unknown instruction id '" + id + "'");
  return it->second;
}

}  // namespace

CurriculumMode CurriculumMode::fixed_stages(std::vector<std::int64_t> boundaries) {
  for (std::size_t i = 1; i < boundaries.size(); ++i) {
    if (boundaries[i] <= boundaries[i - 1]) {
      throw ConfigError("static stage boundaries must be strictly increasing");
    }
  }
  return {Kind::Static, std::move(boundaries)};
}

std::string CurriculumMode::name() const {
  switch (kind) {
    case Kind::Dynamic:
      return "dynamic";
    case Kind::Static:
      return "static";
    case Kind::None:
      return "none";
  }
  return "dynamic";
}

CurriculumMode CurriculumMode::parse(const std::string& name, std::vector<std::int64_t> boundaries) {
  if (name == "dynamic") return dynamic();
  if (name == "static") return fixed_stages(std::move(boundaries));
  if (name == "none") return none();
  throw ConfigError("unknown curriculum mode '" + name + "' (expected dynamic, static or none)");
}

ReferenceBook make_reference_book(std::span<const CurriculumEntry> dataset) {
  ReferenceBook book;
  for (const auto& e : dataset) book.emplace(e.instruction.id, e.references);
  return book;
}

SchedulerState init_state(std::span<const CurriculumEntry> dataset) {
  SchedulerState state;
  for (const auto& entry : dataset) {
    const auto& id = entry.instruction.id;
    if (auto violation = validate_reference_list(entry.references)) {
      throw ConfigError("instruction '" + id + "': invalid reference list: " + *violation);
    }
    if (!state.pointers.emplace(id, 1).second) throw ConfigError("duplicate instruction id '" + id + "'");
    state.list_lengths[id] = static_cast<int>(entry.references.size());
  }
  return state;
}

SchedulerState prepare_state(SchedulerState state, const CurriculumMode& mode, Rng& rng) {
  switch (mode.kind) {
    case CurriculumMode::Kind::Dynamic:
      break;
    case CurriculumMode::Kind::Static:
      for (auto& [id, ptr] : state.pointers) ptr = static_stage_pointer(mode, 0, state.list_lengths.at(id));
      break;
    case CurriculumMode::Kind::None:
      for (auto& [id, ptr] : state.pointers) {
        ptr = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(state.list_lengths.at(id))));
      }
      break;
  }
  return state;
}

std::vector<std::string> sample_batch(const SchedulerState& state, std::size_t batch_size, Rng& rng,
                                      const SamplingOptions& options) {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (state.pointers.empty()) throw ConfigError("cannot sample from an empty dataset");
  if (batch_size > state.pointers.size()) {
    throw ConfigError("batch size " + std::to_string(batch_size) + " exceeds dataset size " +
                      std::to_string(state.pointers.size()));
  }
  std::vector<const std::string*> pool;
  pool.reserve(state.pointers.size());
  for (const auto& [id, ptr] : state.pointers) {
    if (options.retire_saturated && ptr >= state.list_lengths.at(id)) continue;
    pool.push_back(&id);
  }
  const std::size_t take = std::min(batch_size, pool.size());
  std::vector<std::string> batch;
  batch.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
    std::swap(pool[i], pool[j]);
    batch.push_back(*pool[i]);
  }
  return batch;
}

const CandidateResponse& current_reference(const SchedulerState& state, const ReferenceBook& lists,
                                           const std::string& id) {
  auto p = state.pointers.find(id);
  auto l = lists.find(id);
  if (p == state.pointers.end() || l == lists.end()) throw ConfigError("unknown instruction id '" + id + "'");
  const auto& entries = l->second.entries;
  if (p->second < 1 || static_cast<std::size_t>(p->second) > entries.size()) {
    throw ConfigError("pointer out of range for '" + id + "'");
  }
  return entries[static_cast<std::size_t>(p->second - 1)];
}

int static_stage_pointer(const CurriculumMode& mode, std::int64_t step, int length) {
  if (length < 1) throw ConfigError("reference list length must be positive");
  const auto stages = static_cast<std::int64_t>(mode.stage_boundaries.size()) + 1;
  const auto stage = static_cast<std::int64_t>(
      std::upper_bound(mode.stage_boundaries.begin(), mode.stage_boundaries.end(), step) -
      mode.stage_boundaries.begin());
  const std::int64_t lo = stage * length / stages + 1;
  const std::int64_t hi = std::max(lo, (stage + 1) * length / stages);
  return static_cast<int>(std::clamp<std::int64_t>((lo + hi + 1) / 2, 1, length));
}

SchedulerState apply_outcomes(const SchedulerState& state, std::span<const BatchOutcome> outcomes,
                              const CurriculumMode& mode) {
  if (outcomes.empty()) return state;
  std::int64_t step = outcomes.front().step;
  for (const auto& o : outcomes) step = std::max(step, o.step);
  return apply_outcomes(state, outcomes, mode, step);
}

SchedulerState apply_outcomes(const SchedulerState& state, std::span<const BatchOutcome> outcomes,
                              const CurriculumMode& mode, std::int64_t step) {
  SchedulerState next = state;
  for (const auto& o : outcomes) {
    int& ptr = pointer_of(next, o.instruction_id);
    if (mode.kind == CurriculumMode::Kind::Dynamic && o.reward.is_win() && ptr < length_of(next, o.instruction_id)) {
      ++ptr;
    }
  }
  if (mode.kind == CurriculumMode::Kind::Static) {
    for (auto& [id, ptr] : next.pointers) {
      ptr = std::max(ptr, static_stage_pointer(mode, step + 1, next.list_lengths.at(id)));
    }
  }
  return next;
}

bool is_saturated(const SchedulerState& state, const std::string& id) {
  return state.pointers.at(id) >= state.list_lengths.at(id);
}

ScheduleTrace schedule_trace(std::span<const StateSnapshot> history) {
  ScheduleTrace trace;
  for (const auto& snap : history) {
    for (const auto& [id, ptr] : snap.state.pointers) {
      auto& series = trace[id];
      if (series.empty() || series.back().pointer != ptr) series.push_back({snap.step, ptr});
    }
  }
  return trace;
}

std::string format_schedule_csv(const ScheduleTrace& trace) {
  std::string out = "instruction_id,step,pointer\n";
  for (const auto& [id, series] : trace) {
    for (const auto& p : series) {
      out += id;
      out += ',';
      out += std::to_string(p.step);
      out += ',';
      out += std::to_string(p.pointer);
      out += '\n';
    }
  }
  return out;
}

std::string format_checkpoint(const Checkpoint& checkpoint) {
  ojson j;
  j["step"] = checkpoint.step;
  j["seed"] = checkpoint.seed;
  j["rng"] = kRngAlgorithm;
  j["mode"] = {{"name", checkpoint.mode.name()}, {"stage_boundaries", checkpoint.mode.stage_boundaries}};
  ojson pointers = ojson::object();
  for (const auto& [id, p] : checkpoint.state.pointers) pointers[id] = p;
  ojson lengths = ojson::object();
  for (const auto& [id, n] : checkpoint.state.list_lengths) lengths[id] = n;
  j["pointers"] = std::move(pointers);
  j["list_lengths"] = std::move(lengths);
  return j.dump(2) + "\n";
}

Checkpoint parse_checkpoint(std::string_view text) {
  try {
    const auto j = ojson::parse(text);
    Checkpoint c;
    c.step = j.at("step").get<std::int64_t>();
    c.seed = j.at("seed").get<std::uint64_t>();
    const auto& mode = j.at("mode");
    c.mode = CurriculumMode::parse(mode.at("name").get<std::string>(),
                                   mode.value("stage_boundaries", std::vector<std::int64_t>{}));
    for (const auto& [id, p] : j.at("pointers").items()) c.state.pointers[id] = p.get<int>();
    for (const auto& [id, n] : j.at("list_lengths").items()) c.state.list_lengths[id] = n.get<int>();
    if (c.state.pointers.size() != c.state.list_lengths.size()) {
      throw IoError("checkpoint pointers and list_lengths disagree");
    }
    for (const auto& [id, p] : c.state.pointers) {
      auto it = c.state.list_lengths.find(id);
      if (it == c.state.list_lengths.end() || p < 1 || p > it->second) {
        throw IoError("checkpoint pointer for '" + id + "' out of range");
      }
    }
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  write_text_file(path, format_checkpoint(checkpoint));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) { return parse_checkpoint(read_text_file(path)); }

}  // namespace refladder
