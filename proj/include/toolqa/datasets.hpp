#pragma once

#include "toolqa/templates.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace toolqa {

/// Where a dataset lives. Companion files default to the published
/// layouts: Wiki-SQL `<name>.tables.jsonl` next to `<name>.jsonl`;
/// OTT-QA `traindev_tables.json` (required) and
/// `traindev_request_tok.json` (optional passages) next to the
/// questions file.
struct DatasetSource {
  DatasetTag tag = DatasetTag::TatQa;
  std::filesystem::path path;
  std::optional<std::filesystem::path> tables;
  std::optional<std::filesystem::path> passages;
};

inline constexpr std::string_view kSentimentInstruction = "Determine the sentiment of the following.";

/// Throws Error{UnreadableFile|SchemaMismatch}.
std::vector<Record> load_dataset(const DatasetSource& source);
std::vector<Record> load_dataset(DatasetTag tag, const std::filesystem::path& path);

struct SplitSpec {
  std::uint64_t seed = 13;
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct Splits {
  std::vector<Record> train;
  std::vector<Record> dev;
  std::vector<Record> test;
};

/// Seeded random partition. Dev and test take floor(n * fraction), train
/// takes the remainder; records keep their input order within a split.
/// Throws Error{EmptyInput} on an empty list.
Splits split_80_10_10(const std::vector<Record>& records, const SplitSpec& spec = {});

struct BudgetSpec {
  // Characters standing in for tokens: 4 x 1,204.
  std::size_t max_units = 4 * 1204;
};

/// Prompt size in budget units (UTF-8 code points of the gold-template
/// prompt).
std::size_t prompt_units(const Record& record);

/// Keeps records whose gold-template prompt fits the budget (inclusive).
/// Records that cannot be labelled are dropped.
std::vector<Record> filter_by_budget(const std::vector<Record>& records, const BudgetSpec& budget);

// Record (de)serialization in the line-delimited record file format.
nlohmann::json record_to_json(const Record& record);
Record record_from_json(const nlohmann::json& j);

void write_jsonl(const std::filesystem::path& path, const std::vector<nlohmann::json>& lines);
std::vector<nlohmann::json> read_jsonl(const std::filesystem::path& path);

void write_records(const std::filesystem::path& path, const std::vector<Record>& records);
std::vector<Record> read_records(const std::filesystem::path& path);

}  // namespace toolqa
