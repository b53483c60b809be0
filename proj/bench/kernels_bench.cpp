// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "refspect/diversity.hpp"
#include "refspect/disambiguation.hpp"
#include "refspect/kernels.hpp"
#include "refspect/spectroscopy.hpp"
#include "refspect/synth.hpp"

using namespace refspect;

namespace {

std::vector<std::int64_t> Counts(std::size_t n) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> d(0, 10000);
  std::vector<std::int64_t> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

struct Points {
  std::vector<double> p, x, y;
};

Points RandomPoints(std::size_t n) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Points pts;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    pts.p.push_back(u(rng));
    pts.x.push_back(u(rng));
    pts.y.push_back(u(rng));
    total += pts.p.back();
  }
  for (auto& v : pts.p) v /= total;
  return pts;
}

void BM_WindowStatsSerial(benchmark::State& state) {
  const auto counts = Counts(static_cast<std::size_t>(state.range(0)));
  std::vector<kernels::WindowStats> out(counts.size());
  for (auto _ : state) {
    kernels::WindowStatsSerial(counts, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

void BM_WindowStatsParallel(benchmark::State& state) {
  const auto counts = Counts(static_cast<std::size_t>(state.range(0)));
  std::vector<kernels::WindowStats> out(counts.size());
  for (auto _ : state) {
    kernels::WindowStatsParallel(counts, 0, out);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_QuadraticEntropy(benchmark::State& state) {
  const auto pts = RandomPoints(static_cast<std::size_t>(state.range(0)));
  auto d = [&](std::size_t i, std::size_t j) { return std::hypot(pts.x[i] - pts.x[j], pts.y[i] - pts.y[j]); };
  const std::span<const double> p(pts.p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(Parallel ? kernels::QuadraticEntropyParallel(p, d)
                                      : kernels::QuadraticEntropySerial(p, d));
  }
}

template <bool Parallel>
void BM_PairwiseSimilarity(benchmark::State& state) {
  std::mt19937_64 rng(13);
  std::vector<ReferenceFields> fields(static_cast<std::size_t>(state.range(0)));
  for (auto& f : fields) {
    f.author = std::string("BRODIE B") + (rng() % 2 ? " C" : "");
    f.rpy = 1859;
    f.volume = std::to_string(rng() % 30);
    f.page = std::to_string(rng() % 400);
    f.source = rng() % 2 ? "PHILOS T ROY SOC LONDON" : "PHIL TRANS R SOC";
  }
  auto s = [&](std::size_t i, std::size_t j) { return Similarity(fields[i], fields[j]); };
  for (auto _ : state) {
    auto out = Parallel ? kernels::PairwiseScoresParallel(fields.size(), s)
                        : kernels::PairwiseScoresSerial(fields.size(), s);
    benchmark::DoNotOptimize(out.data());
  }
}

template <bool Parallel>
void BM_ParseReferences(benchmark::State& state) {
  SynthOptions opt;
  opt.records = static_cast<std::size_t>(state.range(0));
  const auto corpus = ParseExportText(GenerateSyntheticCorpus(opt).wos_text, ExportFormat::kWosTagged);
  for (auto _ : state) {
    auto refs = Parallel ? ParseReferences(corpus.records, 2014) : ParseReferencesSerial(corpus.records, 2014);
    benchmark::DoNotOptimize(refs.data());
  }
}

}  // namespace

BENCHMARK(BM_WindowStatsSerial)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_WindowStatsParallel)->Arg(1 << 12)->Arg(1 << 18);
BENCHMARK(BM_QuadraticEntropy<false>)->Name("BM_QuadraticEntropySerial")->Arg(256)->Arg(2048);
BENCHMARK(BM_QuadraticEntropy<true>)->Name("BM_QuadraticEntropyParallel")->Arg(256)->Arg(2048);
BENCHMARK(BM_PairwiseSimilarity<false>)->Name("BM_PairwiseSimilaritySerial")->Arg(128)->Arg(1024);
BENCHMARK(BM_PairwiseSimilarity<true>)->Name("BM_PairwiseSimilarityParallel")->Arg(128)->Arg(1024);
BENCHMARK(BM_ParseReferences<false>)->Name("BM_ParseReferencesSerial")->Arg(2000);
BENCHMARK(BM_ParseReferences<true>)->Name("BM_ParseReferencesParallel")->Arg(2000);

BENCHMARK_MAIN();
