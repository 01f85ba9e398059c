#include "freedst/llm_backend.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include <httplib.h>
#include <json.hpp>

#include "freedst/error.hpp"
#include "freedst/state_parser.hpp"

namespace freedst {

std::string_view backend_kind_name(BackendKind k) {
  switch (k) {
    case BackendKind::Http: return "http";
    case BackendKind::Replay: return "replay";
    case BackendKind::RuleMock: return "mock";
  }
  return "mock";
}

BackendKind parse_backend_kind(std::string_view name) {
  for (auto k : {BackendKind::Http, BackendKind::Replay, BackendKind::RuleMock}) {
    if (backend_kind_name(k) == name) return k;
  }
  throw Error(Errc::Config, "unknown backend '" + std::string(name) + "' (expected http, replay or mock)");
}

std::string complete(Backend& backend, std::string_view prompt, const GenerationParams& params) {
  if (prompt.empty()) throw Error(Errc::EmptyInput, "cannot complete an empty prompt");
  return backend.do_complete(prompt, params);
}

std::string prompt_hash(std::string_view prompt) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(prompt.data(), prompt.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::StorageIo, "SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Replay

ReplayBackend::ReplayBackend(std::filesystem::path path) : path_(std::move(path)) {
  std::error_code ec;
  if (!std::filesystem::exists(path_, ec)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw Error(Errc::StorageIo, "cannot read replay store " + path_.string());
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      by_hash_[j.at("prompt_hash").get<std::string>()] = j.at("completion").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::StorageIo, path_.string() + ":" + std::to_string(lineno) + ": bad replay record: " + e.what());
    }
  }
}

void ReplayBackend::store(std::string_view prompt, std::string completion) {
  std::unique_lock lock(mutex_);
  by_hash_[prompt_hash(prompt)] = std::move(completion);
  if (!path_.empty()) save_locked();
}

std::size_t ReplayBackend::size() const {
  std::shared_lock lock(mutex_);
  return by_hash_.size();
}

void ReplayBackend::save() const {
  std::shared_lock lock(mutex_);
  save_locked();
}

void ReplayBackend::save_locked() const {
  if (path_.empty()) return;
  const auto tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::StorageIo, "cannot write replay store " + tmp);
    for (const auto& [hash, completion] : by_hash_) {
      out << nlohmann::json{{"prompt_hash", hash}, {"completion", completion}}.dump() << '\n';
    }
    if (!out) throw Error(Errc::StorageIo, "write failed for replay store " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) throw Error(Errc::StorageIo, "cannot replace replay store " + path_.string() + ": " + ec.message());
}

std::string ReplayBackend::do_complete(std::string_view prompt, const GenerationParams&) {
  const std::string hash = prompt_hash(prompt);
  std::shared_lock lock(mutex_);
  auto it = by_hash_.find(hash);
  if (it == by_hash_.end()) throw Error(Errc::ReplayMiss, "no recorded completion for prompt " + hash);
  return it->second;
}

void replay_store(ReplayBackend& backend, std::string_view prompt, std::string completion) {
  backend.store(prompt, std::move(completion));
}

// ---------------------------------------------------------------------------
// Rule mock

std::vector<KeywordRule> load_keyword_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::UnreadableFile, "cannot read keyword table " + path.string());
  std::vector<KeywordRule> rules;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      rules.push_back({normalize_text(j.at("keyword").get<std::string>()),
                       StateTriple(j.at("domain").get<std::string>(), j.at("slot").get<std::string>(),
                                   j.at("value").get<std::string>())});
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::Config, path.string() + ":" + std::to_string(lineno) + ": bad keyword rule: " + e.what());
    }
  }
  if (rules.empty()) throw Error(Errc::BackendConfig, "keyword table " + path.string() + " is empty");
  return rules;
}

RuleMockBackend::RuleMockBackend(std::vector<KeywordRule> rules) : rules_(std::move(rules)) {
  if (rules_.empty()) throw Error(Errc::BackendConfig, "rule mock needs a non-empty keyword table");
  for (auto& r : rules_) {
    r.keyword = normalize_text(r.keyword);
    if (r.keyword.empty()) throw Error(Errc::BackendConfig, "keyword table contains an empty keyword");
  }
}

namespace {

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

}  // namespace

DialogueState RuleMockBackend::match(std::string_view text) const {
  const std::string hay = normalize_text(text);
  struct Hit {
    std::size_t pos;
    std::size_t rule;
  };
  std::vector<Hit> hits;
  for (std::size_t r = 0; r < rules_.size(); ++r) {
    const std::string& kw = rules_[r].keyword;
    std::size_t last = std::string::npos;
    for (std::size_t p = hay.find(kw); p != std::string::npos; p = hay.find(kw, p + 1)) {
      const bool left_ok = p == 0 || !word_char(hay[p - 1]);
      const bool right_ok = p + kw.size() >= hay.size() || !word_char(hay[p + kw.size()]);
      if (left_ok && right_ok) last = p;
    }
    if (last != std::string::npos) hits.push_back({last, r});
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.pos < b.pos; });
  DialogueState state;
  for (const auto& h : hits) state.set(rules_[h.rule].triple);
  return state;
}

std::string RuleMockBackend::input_section(std::string_view prompt) {
  std::string_view body = prompt;
  const auto resp = body.rfind("Response:");
  if (resp != std::string_view::npos) body = body.substr(0, resp);
  const auto input = body.rfind("Input:");
  if (input != std::string_view::npos) body = body.substr(input + 6);

  std::string user_lines;
  bool any_prefixed = false;
  std::size_t start = 0;
  while (start <= body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string_view::npos) end = body.size();
    std::string_view line = body.substr(start, end - start);
    const auto first = line.find_first_not_of(' ');
    if (first != std::string_view::npos) line = line.substr(first);
    if (line.starts_with("USER:")) {
      any_prefixed = true;
      if (!user_lines.empty()) user_lines.push_back('\n');
      user_lines += line.substr(5);
    } else if (line.starts_with("SYSTEM:")) {
      any_prefixed = true;
    }
    start = end + 1;
  }
  return any_prefixed ? user_lines : std::string(body);
}

std::string RuleMockBackend::do_complete(std::string_view prompt, const GenerationParams&) {
  return format_state(match(input_section(prompt)));
}

// ---------------------------------------------------------------------------
// HTTP

HttpBackend::HttpBackend(HttpConfig config)
    : config_(std::move(config)), in_flight_(std::clamp<std::ptrdiff_t>(config_.max_in_flight, 1, 1024)) {
  std::string url = config_.base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(Errc::BackendConfig, "base URL '" + config_.base_url + "' needs an http:// or https:// scheme");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_ = (path_start == std::string::npos ? std::string() : url.substr(path_start)) + "/chat/completions";
}

std::string HttpBackend::do_complete(std::string_view prompt, const GenerationParams& params) {
  const nlohmann::json body = {
      {"model", params.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", std::string(prompt)}}})},
      {"temperature", params.temperature},
      {"max_tokens", params.max_tokens},
  };
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (const char* token = std::getenv(config_.token_env.c_str()); token && *token) {
    headers.emplace("Authorization", std::string("Bearer ") + token);
  }

  const auto budget = params.timeout;
  const auto connect_budget = std::max(budget / 4, std::chrono::milliseconds(1));
  const auto read_budget = std::max(budget / 2, std::chrono::milliseconds(1));

  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};

  bool last_was_rate_limit = false;
  std::string last_failure;
  const int attempts = std::max(params.retries, 0) + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(params.backoff_base * (1 << std::min(attempt - 1, 16)));

    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(connect_budget);
    client.set_write_timeout(connect_budget);
    client.set_read_timeout(read_budget);
    auto res = client.Post(path_, headers, payload, "application/json");
    if (!res) {
      last_was_rate_limit = false;
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_was_rate_limit = res->status == 429;
      last_failure = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw Error(Errc::BackendConfig, "completion endpoint returned HTTP " + std::to_string(res->status) + ": " +
                                           res->body.substr(0, 200));
    }
    try {
      const auto j = nlohmann::json::parse(res->body);
      return j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::MalformedResponse, std::string("completion response lacks choices[0].message.content: ") +
                                               e.what());
    }
  }
  throw Error(last_was_rate_limit ? Errc::RateLimited : Errc::NetworkTimeout,
              "completion failed after " + std::to_string(attempts) + " attempt(s); last: " + last_failure);
}

}  // namespace freedst
