#include "refladder/dataset.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace refladder {
namespace {

using ojson = nlohmann::ordered_json;

std::string require_string(const ojson& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw IoError(std::string(where) + ": missing string field '" + key + "'");
  }
  return it->get<std::string>();
}

void check_score(double score, std::string_view where) {
  if (!(score >= kMinScore && score <= kMaxScore)) {
    throw IoError(std::string(where) + ": score " + std::to_string(score) + " outside [1, 10]");
  }
}

}  // namespace

bool DatasetRecord::fully_scored() const {
  for (const auto& c : candidates) {
    if (!c.score) return false;
  }
  return true;
}

std::vector<CandidateResponse> DatasetRecord::scored_candidates() const {
  std::vector<CandidateResponse> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    if (!c.score) {
      throw IoError("instruction '" + instruction.id + "': candidate '" + c.source + "' is unscored");
    }
    out.push_back({c.source, c.text, *c.score});
  }
  return out;
}

DatasetRecord parse_dataset_line(std::string_view line) {
  ojson obj;
  try {
    obj = ojson::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(std::string("malformed dataset line: ") + e.what());
  }
  if (!obj.is_object()) throw IoError("dataset line is not a JSON object");

  DatasetRecord record;
  record.instruction.id = require_string(obj, "id", "dataset line");
  const std::string where = "instruction '" + record.instruction.id + "'";
  if (record.instruction.id.empty()) throw IoError("dataset line: empty id");
  record.instruction.prompt_text = require_string(obj, "prompt", where);
  if (record.instruction.prompt_text.empty()) throw IoError(where + ": empty prompt");

  if (auto it = obj.find("criteria"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) throw IoError(where + ": criteria must be an array of strings");
    std::vector<std::string> criteria;
    for (const auto& c : *it) {
      if (!c.is_string()) throw IoError(where + ": criteria must be an array of strings");
      criteria.push_back(c.get<std::string>());
    }
    record.instruction.criteria = std::move(criteria);
  }

  auto cands = obj.find("candidates");
  if (cands == obj.end() || !cands->is_array()) throw IoError(where + ": missing candidates array");
  for (const auto& c : *cands) {
    if (!c.is_object()) throw IoError(where + ": candidate is not an object");
    DatasetCandidate candidate;
    candidate.source = require_string(c, "source", where);
    candidate.text = require_string(c, "text", where);
    if (auto s = c.find("score"); s != c.end() && !s->is_null()) {
      if (!s->is_number()) throw IoError(where + ": score must be a number");
      candidate.score = s->get<double>();
      check_score(*candidate.score, where);
    }
    record.candidates.push_back(std::move(candidate));
  }

  if (auto p = obj.find("potential"); p != obj.end() && !p->is_null()) {
    if (!p->is_number()) throw IoError(where + ": potential must be a number");
    record.potential = p->get<double>();
  }
  return record;
}

std::string format_dataset_line(const DatasetRecord& record) {
  ojson obj;
  obj["id"] = record.instruction.id;
  obj["prompt"] = record.instruction.prompt_text;
  if (record.instruction.criteria) obj["criteria"] = *record.instruction.criteria;
  ojson cands = ojson::array();
  for (const auto& c : record.candidates) {
    ojson entry;
    entry["source"] = c.source;
    entry["text"] = c.text;
    entry["score"] = c.score ? ojson(*c.score) : ojson(nullptr);
    cands.push_back(std::move(entry));
  }
  obj["candidates"] = std::move(cands);
  if (record.potential) obj["potential"] = *record.potential;
  return obj.dump();
}

std::vector<DatasetRecord> parse_dataset(std::string_view text) {
  std::vector<DatasetRecord> records;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    try {
      records.push_back(parse_dataset_line(line));
    } catch (const IoError& e) {
      throw IoError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!seen.insert(records.back().instruction.id).second) {
      throw IoError("line " + std::to_string(line_no) + ": duplicate instruction id '" +
                    records.back().instruction.id + "'");
    }
  }
  return records;
}

std::string format_dataset(std::span<const DatasetRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += format_dataset_line(r);
    out += '\n';
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::vector<DatasetRecord> read_dataset(const std::filesystem::path& path) {
  try {
    return parse_dataset(read_text_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_dataset(const std::filesystem::path& path, std::span<const DatasetRecord> records) {
  write_text_file(path, format_dataset(records));
}

}  // namespace refladder
