#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace toolqa::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kTransport = 3 };

/// Merged settings from a key=value config file and command-line flags.
/// Dataset keys are the tag names ("tatqa", ...) for a file to re-split,
/// or "<tag>.train" / "<tag>.dev" / "<tag>.test" for published splits.
struct RunConfig {
  std::map<std::string, std::string> values;

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  void set(const std::string& key, std::string value) { values[key] = std::move(value); }
};

/// Lines of `key = value`; blank lines and lines starting with '#' are
/// skipped. Throws toolqa::Error{MalformedInput} on any other line.
RunConfig read_config(const std::filesystem::path& path);

int run_cli(int argc, char** argv);

}  // namespace toolqa::cli
