#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "refspect/disambiguation.hpp"
#include "refspect/ingest.hpp"

namespace refspect {

enum class PctDenominator { kWindowSum, kMedian };
enum class CountBasis { kOccurrences, kDocuments };

std::optional<PctDenominator> ParsePctDenominator(std::string_view name);
const char* PctDenominatorName(PctDenominator d);
std::optional<CountBasis> ParseCountBasis(std::string_view name);

struct SpectrumOptions {
  PctDenominator denominator = PctDenominator::kWindowSum;
  std::int64_t min_count = 10;  // used for the is_peak column
  double min_dev_pct = 0.0;
};

struct SpectrumRow {
  int year = 0;
  std::int64_t count = 0;
  double median5 = 0.0;
  double dev_abs = 0.0;
  double dev_pct = 0.0;
  bool is_peak = false;

  bool operator==(const SpectrumRow&) const = default;
};

/// Per-year RPY counts with deviations from the centred 5-year median.
struct Spectrogram {
  int from = 0;
  int to = -1;
  PctDenominator denominator = PctDenominator::kWindowSum;
  std::vector<SpectrumRow> rows;   // one per year in [from, to]
  std::int64_t count_before = 0;   // n(from - 1), for neighbour tests
  std::int64_t count_after = 0;    // n(to + 1)

  bool operator==(const Spectrogram&) const = default;
};

// Year -> count, possibly with explicit zero entries. The observed span
// (first to last key) bounds the median windows.
using YearCounts = std::map<int, std::int64_t>;

YearCounts CountsFromTally(const YearTally& tally, CountBasis basis = CountBasis::kOccurrences);
std::optional<std::pair<int, int>> ObservedSpan(const YearCounts& counts);

Spectrogram BuildSpectrogramSerial(const YearCounts& counts, int from, int to,
                                   const SpectrumOptions& options = {});
Spectrogram BuildSpectrogram(const YearCounts& counts, int from, int to,
                             const SpectrumOptions& options = {});

struct Attribution {
  std::string cluster_id;
  std::size_t occurrences = 0;
  double share = 0.0;
  std::size_t documents = 0;
  double doc_share = 0.0;
};

struct Peak {
  int year = 0;
  std::int64_t count = 0;
  double dev_abs = 0.0;
  double dev_pct = 0.0;
  std::vector<Attribution> top_clusters;
};

// Peak rule: n >= min_count, dev_abs > 0, n >= n(y-1), n > n(y+1) and
// dev_pct >= min_dev_pct. Sorted by dev_pct descending, then year.
std::vector<Peak> DetectPeaks(const Spectrogram& spec, std::int64_t min_count = 10,
                              double min_dev_pct = 0.0);

// Shares of the year's reference occurrences per cluster, descending by
// occurrences then cluster id. Empty when no reference carries that year.
std::vector<Attribution> AttributionShares(int year, const ClusterState& state);

struct CitationHistory {
  std::string cluster_id;
  std::map<int, std::size_t> series;  // citing pub_year -> records
};

// Distinct citing records per publication year over the corpus year span.
CitationHistory BuildCitationHistory(const std::vector<CitingRecord>& records,
                                     const ClusterState& state, const std::string& cluster_id);

// Records per publication year, zero-filled across the corpus span.
std::map<int, std::size_t> CorpusYearTotals(const std::vector<CitingRecord>& records);

// Header year,count,median5,dev_abs,dev_pct,is_peak; LF line endings.
std::string SpectrumCsv(const Spectrogram& spec);
std::string HistoryCsv(const CitationHistory& history);

}  // namespace refspect
