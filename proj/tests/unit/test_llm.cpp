#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <atomic>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "httplib.h"
#include "k2sql/core/error.hpp"
#include "k2sql/core/knowledge.hpp"
#include "k2sql/llm/generator.hpp"
#include "k2sql/llm/prompt.hpp"
#include "k2sql/llm/remote.hpp"
#include "k2sql/llm/retry.hpp"

using namespace k2sql;
using namespace k2sql::llm;
using k2sql::testing::TempDir;

namespace {

class CountingGenerator final : public Generator {
 public:
  std::string name() const override { return "counting"; }
  std::string complete(const std::string& prompt, const GenerationConfig&) override {
    ++calls;
    return "re: " + prompt;
  }
  std::atomic<int> calls{0};
};

// Serves a scripted sequence of status codes on /chat, then 200s.
class FakeServer {
 public:
  explicit FakeServer(std::vector<int> failures) : failures_(std::move(failures)) {
    server_.Post("/chat", [this](const httplib::Request& req, httplib::Response& res) {
      const auto n = static_cast<std::size_t>(hits_++);
      last_body_ = req.body;
      last_auth_ = req.get_header_value("Authorization");
      if (n < failures_.size()) {
        res.status = failures_[n];
        res.set_content("{}", "application/json");
        return;
      }
      auto body = Json::parse(req.body);
      Json reply = {
          {"choices",
           {{{"message",
              {{"content", "echo:" + body["messages"][0]["content"].get<std::string>()}}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      ++embed_hits_;
      auto body = Json::parse(req.body);
      const double len = static_cast<double>(body["input"].get<std::string>().size());
      Json reply = {{"data", {{{"embedding", {len, 1.0, 0.0}}}}}};
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }
  std::string url(const std::string& path) const {
    return "http://127.0.0.1:" + std::to_string(port_) + path;
  }
  int hits() const { return hits_; }
  int embed_hits() const { return embed_hits_; }
  std::string last_body_;
  std::string last_auth_;

 private:
  std::vector<int> failures_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::atomic<int> embed_hits_{0};
};

RemoteConfig fast_config(const FakeServer& server, int attempts) {
  RemoteConfig c;
  c.endpoint_url = server.url("/chat");
  c.model_name = "m";
  c.embedding_url = server.url("/embed");
  c.embedding_model = "e";
  c.timeout = std::chrono::seconds(5);
  c.retry.max_attempts = attempts;
  c.retry.base_backoff = std::chrono::milliseconds(1);
  c.retry.max_backoff = std::chrono::milliseconds(2);
  return c;
}

}  // namespace

TEST_SUITE("llm") {
  TEST_CASE("generation config defaults") {
    GenerationConfig c;
    CHECK(c.temperature == 0.6);
    CHECK(c.top_p == 0.9);
    CHECK(c.max_tokens == 4096);
    CHECK_FALSE(to_json(c).contains("seed"));
    c.top_p = 1.5;
    CHECK_THROWS_AS(validate(c), ValidationError);
  }

  TEST_CASE("template rendering") {
    CHECK(render_template("a {{x}} b", {{"x", "1"}}) == "a 1 b");
    CHECK(render_template("{{#k}}K: {{k}}\n{{/k}}Q", {{"k", ""}}) == "Q");
    CHECK(render_template("{{#k}}K: {{k}}\n{{/k}}Q", {{"k", "v"}}) == "K: v\nQ");
    CHECK_THROWS_AS(render_template("{{nope}}", {}), ValidationError);
    CHECK_THROWS_AS(render_template("{{#k}}x", {{"k", "v"}}), ValidationError);
  }

  TEST_CASE("prompts") {
    auto templates = PromptTemplates::load(testing::prompts_dir());
    DatabaseSchema schema{"toy", {Table{"t", {Column{"a", "", {}}}}}, {}};
    Instance inst{"1",          "how many?",       "toy", "SELECT COUNT(*) FROM t",
                  std::nullopt, Difficulty::simple};
    auto without = text2sql_prompt(inst, schema, std::nullopt, templates);
    CHECK(without.find("External knowledge") == std::string::npos);
    CHECK(without.find("Question: how many?\n") != std::string::npos);
    auto with = text2sql_prompt(inst, schema, decompose_knowledge("a refers to t.a"), templates);
    CHECK(with.find("External knowledge:\na refers to t.a\n") != std::string::npos);
    CHECK(with == text2sql_prompt(inst, schema, decompose_knowledge("a refers to t.a"), templates));
    GenerationInput in{"q", "table t(a)", ""};
    CHECK(knowledge_prompt(in, templates).find("Relevant columns") == std::string::npos);
    in.subtables_text = "table t:\n  a: 1";
    CHECK(knowledge_prompt(in, templates).find("Relevant columns") != std::string::npos);
  }

  TEST_CASE("sql extraction") {
    CHECK(extract_sql("```sql\nSELECT 1\n```") == "SELECT 1");
    CHECK(extract_sql("Sure.\n```\nSELECT a FROM t;\nSELECT 2;\n```") == "SELECT a FROM t");
    CHECK(extract_sql("Here is the query:\nSELECT a FROM t\n\nIt counts rows.") ==
          "SELECT a FROM t");
    CHECK(extract_sql("with x as (select 1) select * from x;") ==
          "with x as (select 1) select * from x");
    CHECK(extract_sql("SELECT ';' FROM t; trailing") == "SELECT ';' FROM t");
    CHECK_FALSE(extract_sql("I cannot answer that.").has_value());
    CHECK_FALSE(extract_sql("").has_value());
  }

  TEST_CASE("fences") {
    CHECK(strip_code_fences("```text\nhello\n```") == "hello");
    CHECK(strip_code_fences("  plain \n") == "plain");
  }

  TEST_CASE("knowledge generation with stubs") {
    auto templates = PromptTemplates::load(testing::prompts_dir());
    EchoGenerator echo("fixed knowledge");
    auto k = generate_knowledge({"q", "s", ""}, echo, {}, templates);
    CHECK(k.knowledge.text == "fixed knowledge");
    EchoGenerator fenced("```\nx refers to y\n```");
    CHECK(generate_knowledge({"q", "s", ""}, fenced, {}, templates).knowledge.text ==
          "x refers to y");
    TableGenerator table({{{"Question: q\n"}, testing::kFreeRateContributing}}, std::nullopt, "t");
    auto t2 = generate_knowledge({"q", "s", ""}, table, {}, templates);
    CHECK(t2.knowledge.text == testing::kFreeRateContributing);
    CHECK(t2.knowledge == decompose_knowledge(testing::kFreeRateContributing));
    EchoGenerator empty("");
    CHECK(generate_knowledge({"q", "s", ""}, empty, {}, templates).knowledge.empty());
  }

  TEST_CASE("sql generation with stubs") {
    auto templates = PromptTemplates::load(testing::prompts_dir());
    DatabaseSchema schema{"toy", {Table{"t", {Column{"a", "", {}}}}}, {}};
    Instance inst{"1", "q", "toy", "SELECT 1", std::nullopt, Difficulty::simple};
    EchoGenerator fenced("```sql\nSELECT 1\n```");
    CHECK(generate_sql(inst, schema, std::nullopt, fenced, {}, templates).sql == "SELECT 1");
    EchoGenerator prose("no idea");
    auto none = generate_sql(inst, schema, std::nullopt, prose, {}, templates);
    CHECK_FALSE(none.sql.has_value());
    CHECK_FALSE(none.extraction_error.empty());
  }

  TEST_CASE("table generator") {
    TempDir dir;
    std::ofstream(dir / "t.json") << R"({"rules":[{"contains":["a","b"],"completion":"AB"},
                                                  {"contains":["a"],"completion":"A"}]})";
    auto table = TableGenerator::from_file(dir / "t.json");
    CHECK(table.complete("xaxbx", {}) == "AB");
    CHECK(table.complete("xa", {}) == "A");
    CHECK_THROWS_AS(table.complete("zzz", {}), GenerationError);
    CHECK(table.name().rfind("table@", 0) == 0);
  }

  TEST_CASE("record, replay and cache") {
    TempDir dir;
    auto inner = std::make_shared<CountingGenerator>();
    {
      RecordingGenerator rec(inner, dir / "session.jsonl");
      CHECK(rec.complete("p1", {}) == "re: p1");
      CHECK(rec.complete("p2", {}) == "re: p2");
    }
    auto replay = ReplayGenerator::from_file(dir / "session.jsonl");
    CHECK(replay.complete("p2", {}) == "re: p2");
    CHECK(replay.name() == "counting");
    CHECK_THROWS_AS(replay.complete("p3", {}), GenerationError);
    GenerationConfig other;
    other.temperature = 0.0;
    CHECK_THROWS_AS(replay.complete("p1", other), GenerationError);

    CachingGenerator cache(inner, dir / "cache");
    const int before = inner->calls;
    CHECK(cache.complete("p1", {}) == "re: p1");
    CHECK(cache.complete("p1", {}) == "re: p1");
    CHECK(inner->calls == before + 1);
    CHECK(cache.hits() == 1);
    CachingGenerator again(inner, dir / "cache");
    again.complete("p1", {});
    CHECK(inner->calls == before + 1);
    again.complete("p1", other);
    CHECK(inner->calls == before + 2);
  }

  TEST_CASE("retry policy") {
    RetryPolicy policy;
    policy.max_attempts = 3;
    std::vector<std::chrono::milliseconds> slept;
    auto sleeper = [&](std::chrono::milliseconds d) { slept.push_back(d); };
    int calls = 0;
    CHECK(call_with_retry([&] { return std::to_string(++calls); }, policy, sleeper) == "1");
    CHECK(calls == 1);

    calls = 0;
    auto flaky = [&]() -> std::string {
      if (++calls < 3) throw TransportError("busy", true, 503);
      return "ok";
    };
    CHECK(call_with_retry(flaky, policy, sleeper) == "ok");
    CHECK(calls == 3);
    REQUIRE(slept.size() == 2);
    CHECK(slept[0] >= std::chrono::milliseconds(250));
    CHECK(slept[0] < std::chrono::milliseconds(500));

    calls = 0;
    auto denied = [&]() -> std::string {
      ++calls;
      throw TransportError("bad request", false, 400);
    };
    CHECK_THROWS_AS(call_with_retry(denied, policy, sleeper), TransportError);
    CHECK(calls == 1);

    calls = 0;
    auto down = [&]() -> std::string {
      ++calls;
      throw TransportError("busy", true, 503);
    };
    try {
      call_with_retry(down, policy, sleeper);
      FAIL("expected RetryExhausted");
    } catch (const RetryExhausted& e) {
      CHECK(e.trace().size() == 3);
    }
    CHECK(calls == 3);
    CHECK(backoff_delay(policy, 10, 1) <= policy.max_backoff);
  }

  TEST_CASE("url splitting") {
    CHECK(split_url("http://host:8080/v1/chat") ==
          std::pair<std::string, std::string>{"http://host:8080", "/v1/chat"});
    CHECK(split_url("https://host").second == "/");
    CHECK_THROWS_AS(split_url("host/v1/chat"), ValidationError);
  }

  TEST_CASE("remote generator against a local server") {
    FakeServer server({429, 503});
    auto config = fast_config(server, 3);
    config.api_key = "secret";
    RemoteGenerator gen(config);
    GenerationConfig gc;
    gc.seed = 42;
    CHECK(gen.complete("hello", gc) == "echo:hello");
    CHECK(server.hits() == 3);
    auto body = Json::parse(server.last_body_);
    CHECK(body["model"] == "m");
    CHECK(body["temperature"] == 0.6);
    CHECK(body["max_tokens"] == 4096);
    CHECK(body["seed"] == 42);
    CHECK(server.last_auth_ == "Bearer secret");
  }

  TEST_CASE("remote generator gives up") {
    FakeServer server({500, 500, 500, 500});
    RemoteGenerator gen(fast_config(server, 2));
    CHECK_THROWS_AS(gen.complete("x", {}), RetryExhausted);
    FakeServer denied({401});
    RemoteGenerator gen2(fast_config(denied, 3));
    CHECK_THROWS_AS(gen2.complete("x", {}), TransportError);
    CHECK(denied.hits() == 1);
  }

  TEST_CASE("unreachable endpoint is transient") {
    RemoteConfig c;
    c.endpoint_url = "http://127.0.0.1:1/chat";
    c.model_name = "m";
    c.retry.max_attempts = 2;
    c.retry.base_backoff = std::chrono::milliseconds(1);
    c.timeout = std::chrono::seconds(1);
    RemoteGenerator gen(c);
    CHECK_THROWS_AS(gen.complete("x", {}), RetryExhausted);
  }

  TEST_CASE("remote embedder memoises") {
    FakeServer server({});
    RemoteEmbedder emb(fast_config(server, 1));
    auto a = emb.embed("abc");
    auto b = emb.embed("abc");
    CHECK(server.embed_hits() == 1);
    CHECK(a.entries.size() == 3);
    CHECK(a.entries[0].second == 3.0);
    CHECK(schema_link::cosine(a, b) == doctest::Approx(1.0));
    CHECK(emb.dimension() == 3);
    CHECK_FALSE(emb.concurrent_safe());
  }
}
