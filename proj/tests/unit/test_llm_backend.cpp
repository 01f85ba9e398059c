#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "freedst/error.hpp"
#include "freedst/llm_backend.hpp"
#include "freedst/state_parser.hpp"

using namespace freedst;
namespace fs = std::filesystem;

namespace {

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return Errc::Config;
}

fs::path temp_file(const std::string& name) {
  auto p = fs::temp_directory_path() / ("freedst_" + name);
  fs::remove(p);
  return p;
}

std::vector<KeywordRule> rules() {
  return {{"asian", {"restaurant", "food", "asian"}},
          {"cheap", {"restaurant", "pricerange", "cheap"}},
          {"east", {"hotel", "area", "east"}},
          {"west", {"hotel", "area", "west"}},
          {"free parking", {"hotel", "parking", "yes"}}};
}

}  // namespace

TEST(Hash, KnownSha256) {
  EXPECT_EQ(prompt_hash("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(prompt_hash(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Complete, EmptyPromptRejected) {
  RuleMockBackend mock(rules());
  EXPECT_EQ(code_of([&] { complete(mock, "", {}); }), Errc::EmptyInput);
}

TEST(Replay, StoreThenComplete) {
  ReplayBackend r;
  replay_store(r, "prompt one", "Domain : ['a'] , Slot : ['b'] , Value : ['c']");
  EXPECT_EQ(complete(r, "prompt one", {}), "Domain : ['a'] , Slot : ['b'] , Value : ['c']");
  EXPECT_EQ(code_of([&] { complete(r, "prompt two", {}); }), Errc::ReplayMiss);
}

TEST(Replay, PersistsSortedAndReloads) {
  const auto path = temp_file("replay.jsonl");
  {
    ReplayBackend r(path);
    replay_store(r, "zzz", "last");
    replay_store(r, "aaa", "first");
    replay_store(r, "aaa", "first again");
  }
  ReplayBackend back(path);
  EXPECT_EQ(back.size(), 2u);
  EXPECT_EQ(complete(back, "aaa", {}), "first again");
  std::ifstream in(path);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  EXPECT_LT(nlohmann::json::parse(l1)["prompt_hash"].get<std::string>(),
            nlohmann::json::parse(l2)["prompt_hash"].get<std::string>());
  EXPECT_FALSE(fs::exists(path.string() + ".tmp"));
  fs::remove(path);
}

TEST(Replay, CorruptStoreIsStorageError) {
  const auto path = temp_file("bad_replay.jsonl");
  std::ofstream(path) << "{not json\n";
  EXPECT_EQ(code_of([&] { ReplayBackend r(path); }), Errc::StorageIo);
  fs::remove(path);
}

TEST(Replay, ConcurrentReadsAndWrites) {
  ReplayBackend r;
  for (int i = 0; i < 50; ++i) replay_store(r, "p" + std::to_string(i), "c" + std::to_string(i));
  std::atomic<int> wrong{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      for (int i = 0; i < 200; ++i) {
        const int k = (i * 7 + t) % 50;
        if (complete(r, "p" + std::to_string(k), {}) != "c" + std::to_string(k)) ++wrong;
        if (i % 20 == 0) replay_store(r, "w" + std::to_string(t * 1000 + i), "x");
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(wrong.load(), 0);
  EXPECT_EQ(r.size(), 50u + 4u * 10u);
}

TEST(Mock, WholeWordCaseInsensitive) {
  RuleMockBackend mock(rules());
  EXPECT_EQ(mock.match("I want ASIAN food, cheap please"),
            (DialogueState{{"restaurant", "food", "asian"}, {"restaurant", "pricerange", "cheap"}}));
  EXPECT_TRUE(mock.match("caucasian cuisine in the northeast").empty());
  EXPECT_EQ(mock.match("with free  parking").value_of({"hotel", "parking"}), "yes");
}

TEST(Mock, LatestMentionWins) {
  RuleMockBackend mock(rules());
  EXPECT_EQ(mock.match("east, no wait, west").value_of({"hotel", "area"}), "west");
  EXPECT_EQ(mock.match("west, no wait, east").value_of({"hotel", "area"}), "east");
}

TEST(Mock, ReadsOnlyUserLinesOfLiveInput) {
  const std::string prompt =
      "Frame. Example 1: Input: USER: west Response: x Instruction: do it Input: USER: I want asian food\n"
      "SYSTEM: There is a cheap place in the east.\nUSER: fine Response:";
  EXPECT_EQ(RuleMockBackend::input_section(prompt), " I want asian food\n fine ");
  RuleMockBackend mock(rules());
  const auto parsed = parse_state(complete(mock, prompt, {}));
  EXPECT_EQ(parsed.state, (DialogueState{{"restaurant", "food", "asian"}}));
}

TEST(Mock, EmptyTableRejected) {
  EXPECT_EQ(code_of([] { RuleMockBackend m({}); }), Errc::BackendConfig);
}

TEST(Kinds, NamesRoundTrip) {
  for (auto k : {BackendKind::Http, BackendKind::Replay, BackendKind::RuleMock}) {
    EXPECT_EQ(parse_backend_kind(backend_kind_name(k)), k);
  }
  EXPECT_EQ(code_of([] { parse_backend_kind("grpc"); }), Errc::Config);
}

class HttpFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    port_ = server_.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port_, 0);
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      ++calls_;
      last_auth_ = req.get_header_value("Authorization");
      last_body_ = req.body;
      handler_(res);
    });
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  HttpBackend backend() { return HttpBackend({"http://127.0.0.1:" + std::to_string(port_) + "/v1", "FREEDST_TEST_TOKEN", 2}); }

  static GenerationParams fast() {
    GenerationParams p;
    p.timeout = std::chrono::milliseconds(2000);
    p.retries = 2;
    p.backoff_base = std::chrono::milliseconds(1);
    return p;
  }

  static void ok(httplib::Response& res, const std::string& content) {
    res.set_content(nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump(),
                    "application/json");
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  std::string last_auth_;
  std::string last_body_;
  std::function<void(httplib::Response&)> handler_;
};

TEST_F(HttpFixture, ReturnsContentAndSendsToken) {
  handler_ = [](httplib::Response& res) { ok(res, "Domain : ['a'] , Slot : ['b'] , Value : ['c']"); };
  setenv("FREEDST_TEST_TOKEN", "secret", 1);
  auto b = backend();
  EXPECT_EQ(complete(b, "hello", fast()), "Domain : ['a'] , Slot : ['b'] , Value : ['c']");
  EXPECT_EQ(last_auth_, "Bearer secret");
  const auto body = nlohmann::json::parse(last_body_);
  EXPECT_EQ(body["messages"][0]["content"], "hello");
  EXPECT_EQ(body["temperature"], 0.0);
  unsetenv("FREEDST_TEST_TOKEN");
}

TEST_F(HttpFixture, RetriesRateLimitThenSucceeds) {
  handler_ = [this](httplib::Response& res) {
    if (calls_ < 3) {
      res.status = 429;
    } else {
      ok(res, "done");
    }
  };
  auto b = backend();
  EXPECT_EQ(complete(b, "x", fast()), "done");
  EXPECT_EQ(calls_.load(), 3);
}

TEST_F(HttpFixture, ExhaustedRateLimit) {
  handler_ = [](httplib::Response& res) { res.status = 429; };
  auto b = backend();
  EXPECT_EQ(code_of([&] { complete(b, "x", fast()); }), Errc::RateLimited);
  EXPECT_EQ(calls_.load(), 3);
}

TEST_F(HttpFixture, ServerErrorsExhaustAsTimeout) {
  handler_ = [](httplib::Response& res) { res.status = 503; };
  auto b = backend();
  EXPECT_EQ(code_of([&] { complete(b, "x", fast()); }), Errc::NetworkTimeout);
}

TEST_F(HttpFixture, MalformedBody) {
  handler_ = [](httplib::Response& res) { res.set_content(R"({"choices": []})", "application/json"); };
  auto b = backend();
  EXPECT_EQ(code_of([&] { complete(b, "x", fast()); }), Errc::MalformedResponse);
}

TEST_F(HttpFixture, ClientErrorIsConfig) {
  handler_ = [](httplib::Response& res) { res.status = 401; };
  auto b = backend();
  EXPECT_EQ(code_of([&] { complete(b, "x", fast()); }), Errc::BackendConfig);
  EXPECT_EQ(calls_.load(), 1);
}

TEST_F(HttpFixture, SlowServerTimesOut) {
  handler_ = [](httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(400));
    ok(res, "late");
  };
  auto b = backend();
  auto p = fast();
  p.timeout = std::chrono::milliseconds(200);
  p.retries = 0;
  EXPECT_EQ(code_of([&] { complete(b, "x", p); }), Errc::NetworkTimeout);
}

TEST(Http, UnreachableHostIsTimeout) {
  HttpBackend b({"http://127.0.0.1:1/v1", "FREEDST_NO_SUCH_VAR", 1});
  GenerationParams p;
  p.timeout = std::chrono::milliseconds(200);
  p.retries = 1;
  p.backoff_base = std::chrono::milliseconds(1);
  EXPECT_EQ(code_of([&] { complete(b, "x", p); }), Errc::NetworkTimeout);
}

TEST(Http, BadUrlRejected) {
  EXPECT_EQ(code_of([] { HttpBackend b({"localhost:8080", "X", 1}); }), Errc::BackendConfig);
}
