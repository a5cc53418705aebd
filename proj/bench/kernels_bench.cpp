// SPDX-License-Identifier: Apache-2.0
// Serial reference vs OpenMP kernels: whole evaluation runs, judge scoring,
// and the 64-character containment scan.
#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "fcagent/eval.hpp"
#include "fcagent/kernels.hpp"

namespace fs = std::filesystem;
using namespace fcagent;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("fcagent-bench-" + name);
  fs::remove_all(p);
  return p;
}

void run_protocol(benchmark::State& state, bool parallel) {
  const auto root = scratch(parallel ? "par" : "ser");
  LitReviewConfig cfg;
  cfg.n_items = static_cast<std::size_t>(state.range(0));
  cfg.runs = 8;
  cfg.workspace_root = root;
  cfg.parallel = parallel;
  for (auto _ : state) {
    auto report = run_litreview(cfg);
    benchmark::DoNotOptimize(report.avg);
  }
  fs::remove_all(root);
}

void BM_RunsSerial(benchmark::State& s) { run_protocol(s, false); }
void BM_RunsParallel(benchmark::State& s) { run_protocol(s, true); }
BENCHMARK(BM_RunsSerial)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_RunsParallel)->Arg(20)->Unit(benchmark::kMillisecond)->UseRealTime();

struct JudgeData {
  std::vector<JudgeIndex> index;
  kernels::SummaryGrid grid;

  JudgeData() {
    const auto planted = synthesize_corpus(80, 42);
    for (const auto& p : planted) index.emplace_back(p.item);
    std::mt19937 rng(1);
    grid.assign(10, std::vector<std::string>(planted.size()));
    for (auto& row : grid) {
      for (std::size_t i = 0; i < row.size(); ++i) {
        // a planted fact padded with words that do not match
        row[i] = "the paper reports that " + planted[i].facts[rng() % planted[i].facts.size()] +
                 " which is interesting";
      }
    }
  }
};

const JudgeData& judge_data() {
  static const JudgeData d;
  return d;
}

void BM_JudgeSerial(benchmark::State& state) {
  const auto& d = judge_data();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::judge_serial(d.index, d.grid, 1));
}
void BM_JudgeParallel(benchmark::State& state) {
  const auto& d = judge_data();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::judge_parallel(d.index, d.grid, 1));
}
BENCHMARK(BM_JudgeSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_JudgeParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

struct ScanData {
  std::unique_ptr<kernels::ContainmentIndex> index;
  std::vector<std::string> texts;

  ScanData() {
    std::vector<std::string> bodies;
    for (const auto& p : synthesize_corpus(80, 42)) bodies.push_back(p.item.body);
    std::mt19937 rng(2);
    // context-sized texts built from corpus vocabulary, shuffled so windows rarely match
    for (int t = 0; t < 2000; ++t) {
      const auto& b = bodies[rng() % bodies.size()];
      std::string text;
      while (text.size() < 6000) {
        const auto at = rng() % (b.size() - 40);
        text += b.substr(at, 20 + rng() % 20);
        text += ' ';
      }
      texts.push_back(std::move(text));
    }
    index = std::make_unique<kernels::ContainmentIndex>(std::move(bodies));
  }
};

const ScanData& scan_data() {
  static const ScanData d;
  return d;
}

void BM_ScanSerial(benchmark::State& state) {
  const auto& d = scan_data();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::scan_serial(*d.index, d.texts));
}
void BM_ScanParallel(benchmark::State& state) {
  const auto& d = scan_data();
  for (auto _ : state) benchmark::DoNotOptimize(kernels::scan_parallel(*d.index, d.texts));
}
BENCHMARK(BM_ScanSerial)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_ScanParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace
BENCHMARK_MAIN();
