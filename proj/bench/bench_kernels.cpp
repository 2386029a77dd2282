// Parallel kernels against their serial references.
//   ./build/bench/k2sql_bench --benchmark_counters_tabular=true

#include <benchmark/benchmark.h>
#include <omp.h>

#include <random>
#include <string>
#include <vector>

#include "k2sql/core/benchmark.hpp"
#include "k2sql/exec/executor.hpp"
#include "k2sql/objective/objective.hpp"
#include "k2sql/schema_link/table_reading.hpp"

using namespace k2sql;

namespace {

int max_workers() { return omp_get_max_threads(); }

const DatabaseSchema& wide_schema() {
  static const DatabaseSchema schema = [] {
    DatabaseSchema s{"wide", {}, {}};
    const char* words[] = {"school", "county", "free",    "meal", "count", "rate", "flight",
                           "origin", "delay",  "airport", "city", "state", "name", "code"};
    std::mt19937 rng(1);
    for (int t = 0; t < 60; ++t) {
      Table table{"table_" + std::to_string(t), {}};
      for (int c = 0; c < 80; ++c) {
        std::string name =
            std::string(words[rng() % 14]) + " " + words[rng() % 14] + " " + std::to_string(c);
        table.columns.push_back(Column{name, "", std::string(words[rng() % 14])});
      }
      s.tables.push_back(std::move(table));
    }
    return s;
  }();
  return schema;
}

void match_args(benchmark::State& state, bool parallel) {
  schema_link::TokenOverlapEmbedder embedder;
  const std::string q = "what is the free meal count rate of each school in the county";
  const schema_link::SimilarityConfig cfg{0.2, &embedder, parallel ? max_workers() : 1};
  for (auto _ : state) {
    auto m = parallel ? schema_link::match_columns(q, wide_schema(), cfg)
                      : schema_link::match_columns_serial(q, wide_schema(), cfg);
    benchmark::DoNotOptimize(m);
  }
  state.counters["columns"] = static_cast<double>(wide_schema().column_count());
}

void BM_MatchColumnsSerial(benchmark::State& state) { match_args(state, false); }
void BM_MatchColumnsParallel(benchmark::State& state) { match_args(state, true); }

std::vector<objective::LogprobRecord> random_records(std::size_t n) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lp(-6.0, -0.01);
  auto seq = [&](int len) {
    objective::LogprobSequence s;
    for (int i = 0; i < len; ++i) {
      s.token_ids.push_back(i);
      s.logprobs.push_back(lp(rng));
    }
    return s;
  };
  std::vector<objective::LogprobRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({std::to_string(i), {seq(64), seq(64), seq(48), seq(48), 0.1}});
  }
  return out;
}

void BM_VerifyRecordsSerial(benchmark::State& state) {
  const auto records = random_records(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(objective::verify_records_serial(records, {}));
}

void BM_VerifyRecordsParallel(benchmark::State& state) {
  const auto records = random_records(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(objective::verify_records(records, {}, max_workers()));
  }
}

struct MiniJobs {
  Benchmark bench;
  std::vector<exec::QueryJob> jobs;
  MiniJobs()
      : bench(load_benchmark(K2SQL_BENCH_DATA_DIR "/instances.jsonl", K2SQL_BENCH_DATA_DIR "/db")) {
    for (int rep = 0; rep < 10; ++rep) {
      for (const auto& inst : bench.instances)
        jobs.push_back({inst.gold_sql, &bench.schema_for(inst)});
    }
  }
};

const MiniJobs& mini_jobs() {
  static const MiniJobs jobs;
  return jobs;
}

void BM_ExecuteBatchSerial(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(exec::execute_batch_serial(mini_jobs().jobs, {}));
  }
}

void BM_ExecuteBatchParallel(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(exec::execute_batch(mini_jobs().jobs, {}, max_workers()));
  }
}

}  // namespace

BENCHMARK(BM_MatchColumnsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MatchColumnsParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_VerifyRecordsSerial)->Arg(2000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_VerifyRecordsParallel)->Arg(2000)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ExecuteBatchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ExecuteBatchParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
