#pragma once

#include "toolqa/templates.hpp"

#include <chrono>
#include <condition_variable>
#include <filesystem>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace toolqa {

struct GenerationRequest {
  std::string prompt;
  int max_new_units = 256;
  double temperature = 0.0;
};

/// Text generation behind the router and solver. Implementations must be
/// safe for concurrent generate() calls.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string generate(const GenerationRequest& request) const = 0;
};

/// Hex SHA-256 of the exact prompt bytes.
std::string prompt_digest(std::string_view prompt);

struct ReplayFixture {
  std::unordered_map<std::string, std::string> entries;  // digest -> completion

  void add(std::string_view prompt, std::string completion);
  const std::string* find(std::string_view prompt) const;
  std::size_t size() const { return entries.size(); }
};

/// Reads line-delimited {"prompt", "completion"} objects; a later line
/// for the same prompt replaces an earlier one. Throws
/// Error{UnreadableFile|SchemaMismatch} (the latter names the line).
ReplayFixture load_fixture(const std::filesystem::path& path);

void save_fixture(const std::filesystem::path& path, const std::vector<CorpusExample>& examples);

/// Looks completions up by prompt digest; temperature is ignored.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(ReplayFixture fixture) : fixture_(std::move(fixture)) {}
  std::string generate(const GenerationRequest& request) const override;
  const ReplayFixture& fixture() const noexcept { return fixture_; }

 private:
  ReplayFixture fixture_;
};

/// Fixture answering every record perfectly: the router prompt maps to
/// the gold template name, the gold-template prompt to the gold
/// completion and the direct-answer prompt to the response.
ReplayFixture echo_gold_fixture(const std::vector<Record>& records);

class EchoGoldBackend : public ReplayBackend {
 public:
  explicit EchoGoldBackend(const std::vector<Record>& records) : ReplayBackend(echo_gold_fixture(records)) {}
};

struct RemoteConfig {
  std::string base_url = "http://127.0.0.1:8000";
  std::string model_name = "default";
  std::string api_key_env = "TOOLQA_API_KEY";
  int max_in_flight = 4;
  int timeout_s = 60;
  int retries = 2;
};

/// Chat-completions client: POST {base_url}/v1/chat/completions with the
/// prompt as one user message; returns choices[0].message.content.
/// Transport failures are retried `retries` times before
/// Error{TransportError}. Concurrent calls beyond max_in_flight block.
class RemoteBackend : public Backend {
 public:
  explicit RemoteBackend(RemoteConfig config);
  std::string generate(const GenerationRequest& request) const override;

 private:
  std::string post_once(const std::string& body) const;

  RemoteConfig config_;
  std::string api_key_;
  mutable std::mutex mutex_;
  mutable std::condition_variable slot_free_;
  mutable int in_flight_ = 0;
};

}  // namespace toolqa
