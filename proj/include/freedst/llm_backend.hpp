#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <semaphore>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "freedst/dialogue_model.hpp"

namespace freedst {

struct GenerationParams {
  double temperature = 0.0;
  int max_tokens = 512;
  std::string model_name = "llama3-8b-dst";
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
  std::chrono::milliseconds backoff_base{500};
};

enum class BackendKind { Http, Replay, RuleMock };

std::string_view backend_kind_name(BackendKind k);  // "http", "replay", "mock"
BackendKind parse_backend_kind(std::string_view name);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendKind kind() const = 0;

 protected:
  friend std::string complete(Backend& backend, std::string_view prompt, const GenerationParams& params);
  virtual std::string do_complete(std::string_view prompt, const GenerationParams& params) = 0;
};

/// Raw completion text for `prompt`. Throws Errc::EmptyInput for an empty prompt and
/// the backend's own errors (Errc::ReplayMiss, Errc::NetworkTimeout, ...).
std::string complete(Backend& backend, std::string_view prompt, const GenerationParams& params);

/// Lowercase hex SHA-256 of the prompt bytes; the replay-store key.
std::string prompt_hash(std::string_view prompt);

/// Completions recorded as JSONL {"prompt_hash", "completion"} records.
///
/// Reads take a shared lock, stores an exclusive one. When bound to a file,
/// every store rewrites it sorted by hash.
class ReplayBackend final : public Backend {
 public:
  /// In-memory store.
  ReplayBackend() = default;
  /// Loads `path` if it exists; later records win on duplicate hashes.
  explicit ReplayBackend(std::filesystem::path path);

  BackendKind kind() const override { return BackendKind::Replay; }

  void store(std::string_view prompt, std::string completion);
  std::size_t size() const;
  void save() const;

 protected:
  std::string do_complete(std::string_view prompt, const GenerationParams& params) override;

 private:
  void save_locked() const;

  std::filesystem::path path_;
  std::map<std::string, std::string> by_hash_;
  mutable std::shared_mutex mutex_;
};

/// Records a completion so later complete() calls on the same prompt return it.
void replay_store(ReplayBackend& backend, std::string_view prompt, std::string completion);

struct KeywordRule {
  std::string keyword;
  StateTriple triple;
};

/// JSONL records {"keyword", "domain", "slot", "value"}.
std::vector<KeywordRule> load_keyword_table(const std::filesystem::path& path);

/// Offline backend that answers with keyword-table matches found in the user
/// lines of the prompt's live input section, formatted like model output.
class RuleMockBackend final : public Backend {
 public:
  explicit RuleMockBackend(std::vector<KeywordRule> rules);

  BackendKind kind() const override { return BackendKind::RuleMock; }

  /// Matches in `text`: case-insensitive whole-word keyword hits, latest mention wins per key.
  DialogueState match(std::string_view text) const;

  /// The text the mock reads: user lines of the last "Input: ... Response:" section.
  static std::string input_section(std::string_view prompt);

 protected:
  std::string do_complete(std::string_view prompt, const GenerationParams& params) override;

 private:
  std::vector<KeywordRule> rules_;
};

struct HttpConfig {
  /// Base URL up to the API version, e.g. "https://api.openai.com/v1"; "/chat/completions" is appended.
  std::string base_url;
  /// Name of the environment variable holding the bearer token. Unset variable: no auth header.
  std::string token_env = "FREEDST_API_KEY";
  std::ptrdiff_t max_in_flight = 4;
};

/// Chat-completions client with retry and exponential backoff.
///
/// Each attempt is bounded by params.timeout (split across connect, write and read).
/// 429 and 5xx responses and transport failures are retried; exhausted retries raise
/// Errc::RateLimited (last failure was 429) or Errc::NetworkTimeout.
class HttpBackend final : public Backend {
 public:
  explicit HttpBackend(HttpConfig config);

  BackendKind kind() const override { return BackendKind::Http; }

 protected:
  std::string do_complete(std::string_view prompt, const GenerationParams& params) override;

 private:
  HttpConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  std::counting_semaphore<1024> in_flight_;
};

}  // namespace freedst
