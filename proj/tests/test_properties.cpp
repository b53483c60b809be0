#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "oracles.hpp"
#include "random_corpus.hpp"
#include "refspect/error.hpp"
#include "refspect/spectroscopy.hpp"

using namespace refspect;

namespace {

YearCounts ToCounts(const std::map<int, std::int64_t>& series, int shift = 0, std::int64_t scale = 1) {
  YearCounts c;
  for (const auto& [y, n] : series) c[y + shift] = n * scale;
  return c;
}

Spectrogram Full(const YearCounts& c, std::int64_t min_count = 1) {
  SpectrumOptions o;
  o.min_count = min_count;
  return BuildSpectrogram(c, c.begin()->first, c.rbegin()->first, o);
}

std::set<int> PeakSet(const Spectrogram& s, std::int64_t min_count, double min_dev_pct = 0.0) {
  std::set<int> out;
  for (const auto& p : DetectPeaks(s, min_count, min_dev_pct)) out.insert(p.year);
  return out;
}

std::string RandomSegment(Gen& g) {
  static const std::string alphabet = "ABCXYZ0123456789 ,.-&'()/:;\tvpVP";
  std::string s;
  const int n = g.Int(0, 12);
  for (int i = 0; i < n; ++i) s += alphabet[static_cast<std::size_t>(g.Int(0, static_cast<int>(alphabet.size()) - 1))];
  return s;
}

}  // namespace

TEST_CASE("shifting every year shifts the spectrum and nothing else") {
  Gen g(101);
  for (int t = 0; t < 200; ++t) {
    const auto series = g.CountSeries(1, 120, 500);
    const int k = g.Int(-300, 300);
    const auto a = Full(ToCounts(series));
    const auto b = Full(ToCounts(series, k));
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      auto r = b.rows[i];
      CHECK(r.year == a.rows[i].year + k);
      r.year = a.rows[i].year;
      CHECK(r == a.rows[i]);
    }
  }
}

TEST_CASE("scaling counts scales deviations and keeps percentages and peaks") {
  Gen g(102);
  for (int t = 0; t < 200; ++t) {
    const auto series = g.CountSeries(1, 120, 500);
    const std::int64_t c = g.Int(2, 50);
    const auto a = Full(ToCounts(series));
    const auto b = Full(ToCounts(series, 0, c));
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
      CHECK(b.rows[i].median5 == a.rows[i].median5 * static_cast<double>(c));
      CHECK(b.rows[i].dev_abs == a.rows[i].dev_abs * static_cast<double>(c));
      CHECK(std::abs(b.rows[i].dev_pct - a.rows[i].dev_pct) <= 1e-9);
    }
    CHECK(PeakSet(a, 1) == PeakSet(b, 1));
  }
}

TEST_CASE("raising the thresholds can only remove peaks") {
  Gen g(103);
  for (int t = 0; t < 200; ++t) {
    const auto s = Full(ToCounts(g.CountSeries(1, 150, 300)));
    const std::int64_t lo = g.Int(1, 100);
    const std::int64_t hi = lo + g.Int(0, 100);
    const auto loose = PeakSet(s, lo);
    const auto strict = PeakSet(s, hi);
    CHECK(std::includes(loose.begin(), loose.end(), strict.begin(), strict.end()));
    const double pct = g.Real(0, 80);
    const auto by_pct = PeakSet(s, lo, pct);
    CHECK(std::includes(loose.begin(), loose.end(), by_pct.begin(), by_pct.end()));
    for (const auto& p : DetectPeaks(s, lo, pct)) {
      CHECK(p.count >= lo);
      CHECK(p.dev_abs > 0);
      CHECK(p.dev_pct >= pct);
    }
  }
}

TEST_CASE("attribution shares sum to one and merges keep year counts") {
  Gen g(104);
  for (int t = 0; t < 10; ++t) {
    auto wb = fixtures::RandomWorkbench(g, g.Int(20, 120));
    const auto before = CountsFromTally(wb.tally());
    for (int op = 0; op < 8; ++op) fixtures::RandomOp(g, wb, op);
    CHECK(CountsFromTally(wb.tally()) == before);
    for (const auto& [year, count] : wb.tally().years) {
      const auto shares = AttributionShares(year, wb.state());
      double total = 0.0;
      std::size_t occ = 0;
      for (const auto& a : shares) total += a.share, occ += a.occurrences;
      CHECK(std::abs(total - 1.0) <= 1e-12);
      CHECK(occ == count.occurrences);
    }
    wb.state().CheckInvariants();
  }
}

TEST_CASE("serialized fields parse back to themselves") {
  Gen g(105);
  const std::vector<std::string> authors = {"BRODIE B C", "VON HIPPEL A", "O'BRIEN S", "LI X"};
  const std::vector<std::string> sources = {"NATURE", "J AM CHEM SOC", "PHILOS T ROY SOC LONDON", "Z ANORG ALLG CHEM"};
  for (int t = 0; t < 2000; ++t) {
    ReferenceFields f;
    if (g.Coin(0.9)) f.author = g.Pick(authors);
    if (g.Coin(0.9)) f.rpy = g.Int(1500, 2014);
    if (g.Coin(0.7)) f.volume = std::to_string(g.Int(1, 999));
    if (g.Coin(0.7)) f.page = std::to_string(g.Int(1, 9999));
    if (g.Coin(0.9)) f.source = g.Pick(sources);
    if (!f.author && !f.rpy && !f.volume && !f.page && !f.source) f.source = "NATURE";
    const auto text = SerializeFields(f);
    CAPTURE(text);
    const auto ref = ParseCitedRef(text, 2014);
    CHECK(ref.fields == f);
    CHECK(SerializeFields(ref.fields) == text);
  }
}

TEST_CASE("parsing random text never fails on non-blank input") {
  Gen g(106);
  for (int t = 0; t < 5000; ++t) {
    std::string raw;
    const int parts = g.Int(1, 7);
    for (int i = 0; i < parts; ++i) raw += (i ? ", " : "") + RandomSegment(g);
    const bool blank = raw.find_first_not_of(" \t,") == std::string::npos;
    CAPTURE(raw);
    if (raw.find_first_not_of(" \t") == std::string::npos) {
      CHECK_THROWS_AS(ParseCitedRef(raw, 2014), Error);
      continue;
    }
    CitedReference ref;
    CHECK_NOTHROW(ref = ParseCitedRef(raw, 2014));
    CHECK(ref.raw == raw);
    if (!blank) {
      CHECK(ParseCitedRef(raw, 2014) == ref);
    }
  }
}

TEST_CASE("ingest conserves references and is deterministic") {
  Gen g(107);
  for (int t = 0; t < 10; ++t) {
    const auto text = fixtures::RandomCorpusWos(g, g.Int(1, 200));
    const auto a = ParseExportText(text, ExportFormat::kWosTagged);
    const auto b = ParseExportText(text, ExportFormat::kWosTagged);
    CHECK(a.records == b.records);
    CHECK(a.refs == b.refs);
    std::size_t raw = 0;
    for (const auto& r : a.records) raw += r.raw_refs.size();
    CHECK(a.refs.size() == raw);
    const auto tally = TallyYears(a.refs, a.records.size());
    std::size_t occ = 0;
    for (const auto& [y, c] : tally.years) {
      occ += c.occurrences;
      CHECK(c.documents <= c.occurrences);
      CHECK(c.documents <= a.records.size());
    }
    CHECK(occ + tally.no_year == a.refs.size());
  }
}
