#include "toolqa/lm_backend.hpp"

#include "toolqa/datasets.hpp"
#include "toolqa/error.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include <array>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace toolqa {

namespace fs = std::filesystem;
using nlohmann::json;

std::string prompt_digest(std::string_view prompt) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(prompt.data(), prompt.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xF];
  }
  return out;
}

void ReplayFixture::add(std::string_view prompt, std::string completion) {
  entries[prompt_digest(prompt)] = std::move(completion);
}

const std::string* ReplayFixture::find(std::string_view prompt) const {
  auto it = entries.find(prompt_digest(prompt));
  return it == entries.end() ? nullptr : &it->second;
}

ReplayFixture load_fixture(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::UnreadableFile, "cannot open " + path.string(), "fixture");
  ReplayFixture fixture;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      throw Error(ErrorKind::SchemaMismatch, path.string() + " line " + std::to_string(lineno) + ": not JSON",
                  "fixture");
    }
    if (!j.is_object() || !j.contains("prompt") || !j["prompt"].is_string() || !j.contains("completion") ||
        !j["completion"].is_string()) {
      throw Error(ErrorKind::SchemaMismatch,
                  path.string() + " line " + std::to_string(lineno) + ": expected {\"prompt\", \"completion\"} strings",
                  "fixture");
    }
    fixture.add(j["prompt"].get<std::string>(), j["completion"].get<std::string>());
  }
  return fixture;
}

void save_fixture(const fs::path& path, const std::vector<CorpusExample>& examples) {
  std::vector<json> lines;
  lines.reserve(examples.size());
  for (const auto& e : examples) lines.push_back(json{{"prompt", e.prompt}, {"completion", e.completion}});
  write_jsonl(path, lines);
}

std::string ReplayBackend::generate(const GenerationRequest& request) const {
  if (const std::string* hit = fixture_.find(request.prompt)) return *hit;
  throw Error(ErrorKind::MissingFixtureEntry, "no completion for prompt digest " + prompt_digest(request.prompt),
              "generate");
}

ReplayFixture echo_gold_fixture(const std::vector<Record>& records) {
  ReplayFixture fixture;
  for (const auto& r : records) {
    const TemplateKind gold = gold_template(r);
    fixture.add(render_prompt(TemplateKind::TemplateChoice, r), std::string(template_name(gold)));
    fixture.add(render_prompt(gold, r), gold_completion(gold, r));
    const TemplateKind direct = direct_template(r);
    if (direct != gold && r.response) fixture.add(render_prompt(direct, r), *r.response);
  }
  return fixture;
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint split_url(const std::string& base_url) {
  const std::size_t scheme = base_url.find("://");
  const std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  const std::size_t slash = base_url.find('/', host_start);
  Endpoint e;
  e.origin = slash == std::string::npos ? base_url : base_url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : base_url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  const bool has_version = prefix.size() >= 3 && prefix.compare(prefix.size() - 3, 3, "/v1") == 0;
  e.path = prefix + (has_version ? "/chat/completions" : "/v1/chat/completions");
  return e;
}

struct Retryable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace

RemoteBackend::RemoteBackend(RemoteConfig config) : config_(std::move(config)) {
  if (config_.max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
  if (const char* key = std::getenv(config_.api_key_env.c_str())) api_key_ = key;
}

std::string RemoteBackend::post_once(const std::string& body) const {
  const Endpoint ep = split_url(config_.base_url);
  httplib::Client client(ep.origin);
  client.set_connection_timeout(config_.timeout_s, 0);
  client.set_read_timeout(config_.timeout_s, 0);
  client.set_write_timeout(config_.timeout_s, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
  auto res = client.Post(ep.path, headers, body, "application/json");
  if (!res) throw Retryable("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500) {
    throw Retryable("HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    throw Error(ErrorKind::TransportError, "HTTP " + std::to_string(res->status) + ": " + res->body, "generate");
  }
  json reply;
  try {
    reply = json::parse(res->body);
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::TransportError, std::string("malformed completion response: ") + e.what(), "generate");
  }
}

std::string RemoteBackend::generate(const GenerationRequest& request) const {
  const json body{{"model", config_.model_name},
                  {"messages", json::array({json{{"role", "user"}, {"content", request.prompt}}})},
                  {"max_tokens", request.max_new_units},
                  {"temperature", request.temperature}};
  const std::string payload = body.dump();

  std::unique_lock lock(mutex_);
  slot_free_.wait(lock, [&] { return in_flight_ < config_.max_in_flight; });
  ++in_flight_;
  lock.unlock();
  struct Release {
    const RemoteBackend* self;
    ~Release() {
      {
        std::lock_guard guard(self->mutex_);
        --self->in_flight_;
      }
      self->slot_free_.notify_one();
    }
  } release{this};

  std::string last_error;
  for (int attempt = 0; attempt <= config_.retries; ++attempt) {
    try {
      return post_once(payload);
    } catch (const Retryable& e) {
      last_error = e.what();
      if (attempt < config_.retries) std::this_thread::sleep_for(std::chrono::milliseconds(100 << attempt));
    }
  }
  throw Error(ErrorKind::TransportError,
              last_error + " after " + std::to_string(config_.retries + 1) + " attempts", "generate");
}

}  // namespace toolqa
