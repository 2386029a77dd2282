#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "k2sql/core/benchmark.hpp"
#include "k2sql/core/error.hpp"
#include "k2sql/core/hash.hpp"
#include "k2sql/core/io.hpp"
#include "k2sql/core/knowledge.hpp"
#include "k2sql/core/text_scan.hpp"

using namespace k2sql;
using k2sql::testing::TempDir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("empty instance file loads to nothing") {
    TempDir dir;
    write(dir / "i.jsonl", "");
    auto bench = load_benchmark(dir / "i.jsonl", dir.path());
    CHECK(bench.instances.empty());
    CHECK(bench.schemas.empty());
  }

  TEST_CASE("BIRD record maps evidence to gold knowledge") {
    Json rec = {{"question_id", 7},  {"question", "q?"}, {"evidence", "a refers to b = 1"},
                {"SQL", "SELECT 1"}, {"db_id", "toy"},   {"difficulty", "moderate"}};
    auto inst = parse_instance(rec, "x:1");
    CHECK(inst.id == "7");
    CHECK(inst.gold_sql == "SELECT 1");
    REQUIRE(inst.gold_knowledge.has_value());
    CHECK(inst.gold_knowledge->text == "a refers to b = 1");
    CHECK(inst.difficulty == Difficulty::moderate);
    rec.erase("difficulty");
    CHECK(parse_instance(rec, "x:1").difficulty == Difficulty::unknown);
  }

  TEST_CASE("load errors name the line") {
    TempDir dir;
    testing::make_db(dir / "toy.sqlite", "CREATE TABLE t(a);");
    write(dir / "i.jsonl",
          "{\"id\":\"1\",\"question\":\"q\",\"SQL\":\"SELECT 1\",\"db_id\":\"toy\"}\n"
          "{\"id\":\"2\",\"SQL\":\"SELECT 1\",\"db_id\":\"toy\"}\n");
    try {
      load_benchmark(dir / "i.jsonl", dir.path());
      FAIL("expected LoadError");
    } catch (const LoadError& e) {
      CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    write(dir / "j.jsonl",
          "{\"id\":\"1\",\"question\":\"q\",\"SQL\":\"SELECT 1\",\"db_id\":\"nope\"}\n");
    CHECK_THROWS_AS(load_benchmark(dir / "j.jsonl", dir.path()), LoadError);
    write(dir / "bad.sqlite", "not a database at all, just text");
    write(dir / "k.jsonl",
          "{\"id\":\"1\",\"question\":\"q\",\"SQL\":\"SELECT 1\",\"db_id\":\"bad\"}\n");
    CHECK_THROWS_AS(load_benchmark(dir / "k.jsonl", dir.path()), LoadError);
  }

  TEST_CASE("mini benchmark loads") {
    auto bench =
        load_benchmark(testing::mini_dir() / "instances.jsonl", testing::mini_dir() / "db");
    CHECK(bench.instances.size() == 20);
    CHECK(bench.schemas.size() == 2);
    const auto& schools = bench.schemas.at("schools");
    REQUIRE(schools.find_table("frpm") != nullptr);
    CHECK(schools.find_table("frpm")->find_column("Enrollment (Ages 5-17)") != nullptr);
  }

  TEST_CASE("schema text") {
    DatabaseSchema s{"x", {Table{"t", {Column{"a", "", {}}, Column{"b", "", {}}}}}, {}};
    CHECK(render_schema_text(s) == "table t(a, b)");
  }

  TEST_CASE("schema validation rejects duplicates") {
    DatabaseSchema s{"x", {Table{"t", {Column{"a", "", {}}, Column{"a", "", {}}}}}, {}};
    CHECK_THROWS_AS(validate(s), ValidationError);
  }

  TEST_CASE("decomposition of the free-rate knowledge") {
    auto good = decompose_knowledge(testing::kFreeRateContributing);
    CHECK(good.text == testing::kFreeRateContributing);
    CHECK(good.sub_knowledge.size() == 1);
    auto bad = decompose_knowledge(testing::kFreeRateNonContributing);
    REQUIRE(bad.sub_knowledge.size() == 2);
    CHECK(bad.sub_knowledge[0] == "Continuation schools refer to EdOpsCode = 'C'");
    CHECK(bad.sub_knowledge[1].rfind("lowest three", 0) == 0);
    CHECK(decompose_knowledge("").sub_knowledge.empty());
  }

  TEST_CASE("decomposition keeps commas inside calls and lists") {
    auto k = decompose_knowledge("percentage = DIVIDE(SUM(x), COUNT(y)); a, b and c refer to x");
    REQUIRE(k.sub_knowledge.size() == 2);
    CHECK(k.sub_knowledge[0] == "percentage = DIVIDE(SUM(x), COUNT(y))");
    auto semi = decompose_knowledge("a refers to x = 1; b refers to y = 2;");
    CHECK(semi.sub_knowledge.size() == 2);
  }

  TEST_CASE("quote-aware scanning") {
    auto mask = top_level_mask("f(a, 'b,c'), d");
    CHECK_FALSE(mask[3]);
    CHECK(mask[11]);
    CHECK(trim("  x y \n") == "x y");
    CHECK(find_word_icase("the SELECTED select", "select") == 13);
  }

  TEST_CASE("jsonl round trip and lenient reading") {
    TempDir dir;
    write(dir / "r.jsonl", "{\"a\":1}\n\n{broken\n{\"a\":2}\n");
    CHECK_THROWS_AS(read_json_records(dir / "r.jsonl"), LoadError);
    auto lenient = read_json_records_lenient(dir / "r.jsonl");
    REQUIRE(lenient.records.size() == 2);
    CHECK(lenient.records[1].line == 4);
    REQUIRE(lenient.malformed.size() == 1);
    CHECK(lenient.malformed[0].first == 3);
    write_file_atomic(dir / "out.txt", "hello");
    CHECK(read_file(dir / "out.txt") == "hello");
  }

  TEST_CASE("sha256") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  }
}
