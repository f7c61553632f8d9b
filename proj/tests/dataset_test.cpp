#include <filesystem>
#include <random>

#include <gtest/gtest.h>

#include "refladder/dataset.hpp"

using namespace refladder;

namespace {

TEST(Dataset, ParsesAllFields) {
  const auto r = parse_dataset_line(
      R"({"id":"w1","prompt":"Write a poem","criteria":["clarity","style"],)"
      R"("candidates":[{"source":"policy","text":"p","score":6.5},{"source":"m1","text":"q","score":null}]})");
  EXPECT_EQ(r.instruction.id, "w1");
  EXPECT_EQ(r.instruction.prompt_text, "Write a poem");
  ASSERT_TRUE(r.instruction.criteria);
  EXPECT_EQ(r.instruction.criteria->size(), 2u);
  ASSERT_EQ(r.candidates.size(), 2u);
  EXPECT_EQ(r.candidates[0].score, 6.5);
  EXPECT_FALSE(r.candidates[1].score);
  EXPECT_FALSE(r.fully_scored());
}

TEST(Dataset, CanonicalLineRoundTripsByteExact) {
  const std::string line =
      R"({"id":"w1","prompt":"Say \"hi\"\n","criteria":["a"],"candidates":[{"source":"policy","text":"x","score":6.2},)"
      R"({"source":"m1","text":"y","score":8.0}],"potential":1.8000000000000007})";
  EXPECT_EQ(format_dataset_line(parse_dataset_line(line)), line);
}

TEST(Dataset, RandomRecordsRoundTrip) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> score(1.0, 10.0);
  std::vector<DatasetRecord> records;
  for (int i = 0; i < 200; ++i) {
    DatasetRecord r;
    r.instruction.id = "id-" + std::to_string(i);
    r.instruction.prompt_text = "prompt \té " + std::to_string(gen());
    if (i % 3 == 0) r.instruction.criteria = std::vector<std::string>{"c1", "c2 {x}"};
    const int n = 1 + static_cast<int>(gen() % 5);
    for (int c = 0; c < n; ++c) {
      std::optional<double> s;
      if (gen() % 4 != 0) s = score(gen);
      r.candidates.push_back({c == 0 ? "policy" : "m" + std::to_string(c), "text " + std::to_string(c), s});
    }
    if (i % 2 == 0) r.potential = score(gen) - 5.0;
    records.push_back(r);
  }
  const auto text = format_dataset(records);
  const auto back = parse_dataset(text);
  EXPECT_EQ(back, records);
  EXPECT_EQ(format_dataset(back), text);
}

TEST(Dataset, RejectsDuplicatesAndBadScores) {
  const std::string a = R"({"id":"a","prompt":"p","candidates":[]})";
  EXPECT_THROW(parse_dataset(a + "\n" + a + "\n"), IoError);
  EXPECT_THROW(parse_dataset_line(R"({"id":"a","prompt":"p","candidates":[{"source":"s","text":"t","score":11}]})"),
               IoError);
  EXPECT_THROW(parse_dataset_line("not json"), IoError);
}

TEST(Dataset, SkipsBlankLines) {
  const auto rs = parse_dataset("\n" + std::string(R"({"id":"a","prompt":"p","candidates":[]})") + "\n\n");
  EXPECT_EQ(rs.size(), 1u);
}

TEST(Dataset, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "refladder_dataset_test";
  std::filesystem::remove_all(dir);
  DatasetRecord r;
  r.instruction = {"a", "p", std::nullopt};
  r.candidates = {{"policy", "t", 5.0}};
  write_dataset(dir / "sub" / "d.jsonl", std::vector{r});
  EXPECT_EQ(read_dataset(dir / "sub" / "d.jsonl"), std::vector{r});
  EXPECT_THROW(read_dataset(dir / "missing.jsonl"), IoError);
  std::filesystem::remove_all(dir);
}

}  // namespace
