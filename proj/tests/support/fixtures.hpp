#pragma once

#include "toolqa/datasets.hpp"
#include "toolqa/lm_backend.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace toolqa::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

struct FixtureFiles {
  std::filesystem::path tatqa;    // tatqa_dataset_test.json
  std::filesystem::path wikisql;  // test.jsonl (+ test.tables.jsonl)
  std::filesystem::path fpb;      // Sentences_AllAgree.txt
  std::filesystem::path ottqa;    // dev.json (+ traindev_tables.json, traindev_request_tok.json)
};

/// Writes all four source formats with `per_dataset` questions each.
FixtureFiles write_dataset_fixtures(const std::filesystem::path& dir, std::size_t per_dataset = 60,
                                    std::uint64_t seed = 7);

/// Wiki-SQL question and table files `<stem>.jsonl` / `<stem>.tables.jsonl`
/// with exactly `questions` lines. Every query returns at least one row.
std::filesystem::path write_wikisql(const std::filesystem::path& dir, const std::string& stem, std::size_t questions,
                                    std::uint64_t seed);

std::vector<Record> load_fixture_dataset(const FixtureFiles& files, DatasetTag tag);

/// Echo-gold fixture that also answers every direct-answer prompt with the
/// gold answer, and whose tool completion for each index in `broken` is
/// "1/0" (arithmetic) or "SELEKT" (script).
ReplayFixture fixture_with_broken_tools(const std::vector<Record>& records, const std::vector<std::size_t>& broken);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// Football crowd table and the venue query shipped with the Wiki-SQL
// template example.
extern const std::string kCrowdTableJson;
extern const std::string kCrowdQuery;

// Router examples: a hedging-gains percent change (input and data) and a
// population density lookup (data only, numeric JSON cells).
Record hedge_gains_record();
Record density_record();
extern const std::string kHedgeGainsTableJson;
extern const std::string kDensityTableJson;

}  // namespace toolqa::testing
