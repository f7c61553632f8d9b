// JSONL dataset files: one instruction per line with its candidate responses.
//
//   {"id": "...", "prompt": "...", "criteria": ["..."],
//    "candidates": [{"source": "...", "text": "...", "score": 7.2}],
//    "potential": 1.4}
//
// `criteria` and `potential` are optional; `score` may be absent or null for
// candidates that still need grading. Lines written by format_dataset_line are
// canonical: parsing and re-formatting them reproduces the same bytes.

#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "refladder/core.hpp"

namespace refladder {

struct DatasetCandidate {
  std::string source;
  std::string text;
  std::optional<double> score;

  bool operator==(const DatasetCandidate&) const = default;
};

struct DatasetRecord {
  Instruction instruction;
  std::vector<DatasetCandidate> candidates;
  std::optional<double> potential;

  bool fully_scored() const;
  /// Throws IoError naming the first unscored candidate.
  std::vector<CandidateResponse> scored_candidates() const;

  bool operator==(const DatasetRecord&) const = default;
};

DatasetRecord parse_dataset_line(std::string_view line);
std::string format_dataset_line(const DatasetRecord& record);

/// Parses a whole JSONL document. Blank lines are skipped; ids must be unique.
std::vector<DatasetRecord> parse_dataset(std::string_view text);
std::string format_dataset(std::span<const DatasetRecord> records);

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path);
void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace refladder
