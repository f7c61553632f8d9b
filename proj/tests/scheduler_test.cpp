#include <random>
#include <set>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "refladder/reward.hpp"
#include "refladder/scheduler.hpp"

using namespace refladder;

namespace {

CurriculumEntry entry(const std::string& id, int length) {
  CurriculumEntry e;
  e.instruction = {id, "prompt " + id, std::nullopt};
  e.references.entries.push_back({"policy", "own", 5.0});
  for (int i = 1; i < length; ++i) {
    e.references.entries.push_back({"m" + std::to_string(i), "ref " + std::to_string(i), 5.0 + i * 0.5});
  }
  return e;
}

BatchOutcome outcome(const std::string& id, Verdict v, std::int64_t step = 1) {
  return {id, verdict_to_reward(v), step};
}

TEST(InitState, AllPointersStartAtOne) {
  const std::vector data{entry("a", 3), entry("b", 2), entry("c", 5)};
  const auto s = init_state(data);
  EXPECT_EQ(s.pointers, (std::map<std::string, int>{{"a", 1}, {"b", 1}, {"c", 1}}));
  EXPECT_EQ(s.list_lengths, (std::map<std::string, int>{{"a", 3}, {"b", 2}, {"c", 5}}));
  EXPECT_TRUE(init_state(std::vector<CurriculumEntry>{}).pointers.empty());
}

TEST(InitState, InvalidListNamesInstruction) {
  auto bad = entry("bad-one", 3);
  std::swap(bad.references.entries[0], bad.references.entries[2]);
  try {
    init_state(std::vector{bad});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("bad-one"), std::string::npos);
  }
}

TEST(Checkpoint, RoundTrip) {
  const std::vector data{entry("a", 3), entry("b", 2)};
  Checkpoint c{init_state(data), 0, 17, CurriculumMode::fixed_stages({5, 9})};
  c.state.pointers["a"] = 3;
  EXPECT_EQ(parse_checkpoint(format_checkpoint(c)), c);
  EXPECT_THROW(parse_checkpoint("{}"), IoError);
}

TEST(SampleBatch, FullBatchIsPermutation) {
  const auto s = init_state(std::vector{entry("a", 2), entry("b", 2), entry("c", 2)});
  Rng rng(3);
  auto batch = sample_batch(s, 3, rng);
  std::sort(batch.begin(), batch.end());
  EXPECT_EQ(batch, (std::vector<std::string>{"a", "b", "c"}));
}

TEST(SampleBatch, DeterministicAndNoDuplicates) {
  std::vector<CurriculumEntry> data;
  for (int i = 0; i < 100; ++i) data.push_back(entry("w" + std::to_string(i), 3));
  const auto s = init_state(data);
  Rng r1(9), r2(9);
  for (int i = 0; i < 50; ++i) {
    const auto a = sample_batch(s, 32, r1);
    EXPECT_EQ(a, sample_batch(s, 32, r2));
    EXPECT_EQ(std::set<std::string>(a.begin(), a.end()).size(), 32u);
  }
}

TEST(SampleBatch, Errors) {
  const auto s = init_state(std::vector{entry("a", 2)});
  Rng rng(1);
  EXPECT_THROW(sample_batch(s, 2, rng), ConfigError);
  EXPECT_THROW(sample_batch(s, 0, rng), ConfigError);
  EXPECT_THROW(sample_batch(SchedulerState{}, 1, rng), ConfigError);
}

TEST(SampleBatch, RetireSaturated) {
  auto s = init_state(std::vector{entry("a", 2), entry("b", 2)});
  s.pointers["a"] = 2;
  Rng rng(1);
  EXPECT_EQ(sample_batch(s, 2, rng, {true}), (std::vector<std::string>{"b"}));
  EXPECT_EQ(sample_batch(s, 2, rng).size(), 2u);
}

TEST(CurrentReference, FollowsPointer) {
  const std::vector data{entry("a", 3)};
  const auto book = make_reference_book(data);
  auto s = init_state(data);
  EXPECT_EQ(current_reference(s, book, "a").source_id, "policy");
  s = apply_outcomes(s, std::vector{outcome("a", Verdict::Win)}, CurriculumMode::dynamic());
  EXPECT_EQ(current_reference(s, book, "a").source_id, "m1");
  s.pointers["a"] = 3;
  EXPECT_EQ(current_reference(s, book, "a").source_id, "m2");
  EXPECT_THROW(current_reference(s, book, "zz"), ConfigError);
}

TEST(ApplyOutcomes, DynamicExamples) {
  const auto mode = CurriculumMode::dynamic();
  auto s = init_state(std::vector{entry("a", 3)});
  s = apply_outcomes(s, std::vector{outcome("a", Verdict::Win)}, mode);
  EXPECT_EQ(s.pointers["a"], 2);
  s = apply_outcomes(s, std::vector{outcome("a", Verdict::Tie)}, mode);
  EXPECT_EQ(s.pointers["a"], 2);
  s = apply_outcomes(s, std::vector{outcome("a", Verdict::Loss)}, mode);
  EXPECT_EQ(s.pointers["a"], 2);
  s = apply_outcomes(s, std::vector{outcome("a", Verdict::Win)}, mode);
  EXPECT_EQ(s.pointers["a"], 3);
  const auto top = apply_outcomes(s, std::vector{outcome("a", Verdict::Win)}, mode);
  EXPECT_EQ(top, s);
  EXPECT_THROW(apply_outcomes(s, std::vector{outcome("zz", Verdict::Win)}, mode), ConfigError);
}

// Random reward streams against the one-line promotion oracle.
TEST(ApplyOutcomes, DynamicPropertyStreams) {
  std::mt19937_64 gen(123);
  const auto mode = CurriculumMode::dynamic();
  for (int stream = 0; stream < 10000; ++stream) {
    const int length = 1 + static_cast<int>(gen() % 6);
    auto s = init_state(std::vector{entry("w", length)});
    ASSERT_EQ(s.pointers["w"], 1);
    int expected = 1;
    int increments = 0;
    int wins_below_top = 0;
    const int steps = 1 + static_cast<int>(gen() % 20);
    for (int t = 1; t <= steps; ++t) {
      const Verdict v = static_cast<Verdict>(gen() % 3);
      const int before = s.pointers["w"];
      if (v == Verdict::Win && before < length) ++wins_below_top;
      s = apply_outcomes(s, std::vector{outcome("w", v, t)}, mode);
      const int after = s.pointers["w"];
      expected = oracle::next_pointer(expected, verdict_to_reward(v).value(), length);
      ASSERT_EQ(after, expected);
      ASSERT_GE(after, before);
      ASSERT_LE(after, length);
      if (v != Verdict::Win) {
        ASSERT_EQ(after, before);
      }
      increments += after - before;
    }
    ASSERT_EQ(increments, wins_below_top);
  }
}

TEST(ApplyOutcomes, NoneModeNeverMutates) {
  std::vector<CurriculumEntry> data;
  for (int i = 0; i < 20; ++i) data.push_back(entry("w" + std::to_string(i), 4));
  Rng rng(5);
  const auto s = prepare_state(init_state(data), CurriculumMode::none(), rng);
  std::set<int> seen;
  for (const auto& [id, p] : s.pointers) seen.insert(p);
  EXPECT_GT(seen.size(), 1u);
  std::vector<BatchOutcome> wins;
  for (const auto& e : data) wins.push_back(outcome(e.instruction.id, Verdict::Win));
  EXPECT_EQ(apply_outcomes(s, wins, CurriculumMode::none()), s);
}

TEST(StaticStagePointer, UpperMedianOfSlice) {
  const auto two = CurriculumMode::fixed_stages({51});
  EXPECT_EQ(static_stage_pointer(two, 0, 5), 2);
  EXPECT_EQ(static_stage_pointer(two, 50, 5), 2);
  EXPECT_EQ(static_stage_pointer(two, 51, 5), 4);
  EXPECT_EQ(static_stage_pointer(two, 0, 1), 1);
  EXPECT_EQ(static_stage_pointer(two, 51, 1), 1);
  EXPECT_EQ(static_stage_pointer(two, 0, 2), 1);
  EXPECT_EQ(static_stage_pointer(two, 51, 2), 2);
}

TEST(ApplyOutcomes, StaticMovesAllPointersOnlyAtBoundaries) {
  std::vector<CurriculumEntry> data;
  for (int i = 0; i < 10; ++i) data.push_back(entry("w" + std::to_string(i), 5));
  const auto mode = CurriculumMode::fixed_stages({4});
  Rng rng(1);
  auto s = prepare_state(init_state(data), mode, rng);
  for (const auto& [id, p] : s.pointers) EXPECT_EQ(p, 2);
  for (std::int64_t step = 1; step <= 6; ++step) {
    std::vector<BatchOutcome> wins{outcome("w0", Verdict::Win, step)};
    const auto next = apply_outcomes(s, wins, mode, step);
    const bool boundary = step == 3;  // after step 3 completes, step 4 uses stage 1
    for (const auto& [id, p] : next.pointers) {
      EXPECT_EQ(p, boundary || step > 3 ? 4 : 2) << id << " step " << step;
    }
    s = next;
  }
}

TEST(ScheduleTrace, StaircaseExample) {
  auto s = init_state(std::vector{entry("a", 3), entry("b", 3)});
  std::vector<StateSnapshot> history{{0, s}};
  for (std::int64_t step = 1; step <= 8; ++step) {
    std::vector<BatchOutcome> outs;
    if (step == 3 || step == 7) outs.push_back(outcome("a", Verdict::Win, step));
    s = apply_outcomes(s, outs, CurriculumMode::dynamic(), step);
    history.push_back({step, s});
  }
  const auto trace = schedule_trace(history);
  EXPECT_EQ(trace.at("a"), (std::vector<SchedulePoint>{{0, 1}, {3, 2}, {7, 3}}));
  EXPECT_EQ(trace.at("b"), (std::vector<SchedulePoint>{{0, 1}}));
  EXPECT_EQ(format_schedule_csv(trace), "instruction_id,step,pointer\na,0,1\na,3,2\na,7,3\nb,0,1\n");
}

TEST(CurriculumMode, ParseAndValidate) {
  EXPECT_EQ(CurriculumMode::parse("dynamic"), CurriculumMode::dynamic());
  EXPECT_EQ(CurriculumMode::parse("static", {3, 7}).stage_boundaries, (std::vector<std::int64_t>{3, 7}));
  EXPECT_THROW(CurriculumMode::fixed_stages({5, 5}), ConfigError);
  EXPECT_THROW(CurriculumMode::parse("adaptive"), ConfigError);
}

}  // namespace
