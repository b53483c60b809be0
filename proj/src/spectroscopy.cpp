#include "refspect/spectroscopy.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

#include "refspect/error.hpp"
#include "refspect/kernels.hpp"
#include "refspect/text.hpp"

namespace refspect {

std::optional<PctDenominator> ParsePctDenominator(std::string_view name) {
  if (name == "window-sum") return PctDenominator::kWindowSum;
  if (name == "median") return PctDenominator::kMedian;
  return std::nullopt;
}

const char* PctDenominatorName(PctDenominator d) {
  return d == PctDenominator::kWindowSum ? "window-sum" : "median";
}

std::optional<CountBasis> ParseCountBasis(std::string_view name) {
  if (name == "occurrences") return CountBasis::kOccurrences;
  if (name == "documents") return CountBasis::kDocuments;
  return std::nullopt;
}

YearCounts CountsFromTally(const YearTally& tally, CountBasis basis) {
  YearCounts out;
  for (const auto& [year, c] : tally.years) {
    out[year] = static_cast<std::int64_t>(basis == CountBasis::kOccurrences ? c.occurrences : c.documents);
  }
  return out;
}

std::optional<std::pair<int, int>> ObservedSpan(const YearCounts& counts) {
  if (counts.empty()) return std::nullopt;
  return std::make_pair(counts.begin()->first, counts.rbegin()->first);
}

namespace {

using WindowFn = void (*)(std::span<const std::int64_t>, std::int64_t, std::span<kernels::WindowStats>);

bool IsPeak(const SpectrumRow& row, std::int64_t left, std::int64_t right, std::int64_t min_count,
            double min_dev_pct) {
  return row.count >= min_count && row.dev_abs > 0 && row.count >= left && row.count > right &&
         row.dev_pct >= min_dev_pct;
}

std::int64_t CountAt(const YearCounts& counts, int year) {
  auto it = counts.find(year);
  return it == counts.end() ? 0 : it->second;
}

void MarkPeaks(Spectrogram& spec, std::int64_t min_count, double min_dev_pct) {
  for (std::size_t i = 0; i < spec.rows.size(); ++i) {
    const std::int64_t left = i == 0 ? spec.count_before : spec.rows[i - 1].count;
    const std::int64_t right = i + 1 == spec.rows.size() ? spec.count_after : spec.rows[i + 1].count;
    spec.rows[i].is_peak = IsPeak(spec.rows[i], left, right, min_count, min_dev_pct);
  }
}

Spectrogram Build(const YearCounts& counts, int from, int to, const SpectrumOptions& options,
                  WindowFn window_fn) {
  if (from > to) {
    throw Error(ErrorCode::kInvalidArgument,
                "year range is empty: from " + std::to_string(from) + " > to " + std::to_string(to));
  }
  Spectrogram spec;
  spec.from = from;
  spec.to = to;
  spec.denominator = options.denominator;
  spec.count_before = CountAt(counts, from - 1);
  spec.count_after = CountAt(counts, to + 1);

  const std::size_t n_rows = static_cast<std::size_t>(to - from) + 1;
  std::vector<std::int64_t> dense;
  std::int64_t first_query = 0;
  if (auto span = ObservedSpan(counts)) {
    dense.assign(static_cast<std::size_t>(span->second - span->first) + 1, 0);
    for (const auto& [year, n] : counts) dense[static_cast<std::size_t>(year - span->first)] = n;
    first_query = static_cast<std::int64_t>(from) - span->first;
  }
  std::vector<kernels::WindowStats> stats(n_rows);
  window_fn(dense, first_query, stats);

  spec.rows.resize(n_rows);
  for (std::size_t i = 0; i < n_rows; ++i) {
    SpectrumRow& row = spec.rows[i];
    row.year = from + static_cast<int>(i);
    row.count = CountAt(counts, row.year);
    row.median5 = stats[i].median;
    row.dev_abs = static_cast<double>(row.count) - row.median5;
    const double denom =
        options.denominator == PctDenominator::kWindowSum ? stats[i].window_sum : row.median5;
    row.dev_pct = denom == 0.0 ? 0.0 : 100.0 * row.dev_abs / denom;
  }
  MarkPeaks(spec, options.min_count, options.min_dev_pct);
  return spec;
}

}  // namespace

Spectrogram BuildSpectrogramSerial(const YearCounts& counts, int from, int to,
                                   const SpectrumOptions& options) {
  return Build(counts, from, to, options, kernels::WindowStatsSerial);
}

Spectrogram BuildSpectrogram(const YearCounts& counts, int from, int to,
                             const SpectrumOptions& options) {
  return Build(counts, from, to, options, kernels::WindowStatsParallel);
}

std::vector<Peak> DetectPeaks(const Spectrogram& spec, std::int64_t min_count, double min_dev_pct) {
  if (min_count < 1) throw Error(ErrorCode::kInvalidArgument, "min_count must be at least 1");
  std::vector<Peak> peaks;
  for (std::size_t i = 0; i < spec.rows.size(); ++i) {
    const SpectrumRow& row = spec.rows[i];
    const std::int64_t left = i == 0 ? spec.count_before : spec.rows[i - 1].count;
    const std::int64_t right = i + 1 == spec.rows.size() ? spec.count_after : spec.rows[i + 1].count;
    if (IsPeak(row, left, right, min_count, min_dev_pct)) {
      peaks.push_back({row.year, row.count, row.dev_abs, row.dev_pct, {}});
    }
  }
  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
    if (a.dev_pct != b.dev_pct) return a.dev_pct > b.dev_pct;
    return a.year < b.year;
  });
  return peaks;
}

std::vector<Attribution> AttributionShares(int year, const ClusterState& state) {
  std::size_t total_occ = 0;
  std::set<std::string_view> all_docs;
  std::map<std::string, std::pair<std::size_t, std::set<std::string_view>>> per_cluster;
  for (const auto& v : state.index().variants()) {
    if (v.fields.rpy != year) continue;
    total_occ += v.occurrences;
    all_docs.insert(v.owners.begin(), v.owners.end());
    auto& slot = per_cluster[state.ClusterOf(v.key)];
    slot.first += v.occurrences;
    slot.second.insert(v.owners.begin(), v.owners.end());
  }
  std::vector<Attribution> out;
  if (total_occ == 0) return out;
  for (const auto& [id, slot] : per_cluster) {
    Attribution a;
    a.cluster_id = id;
    a.occurrences = slot.first;
    a.share = static_cast<double>(slot.first) / static_cast<double>(total_occ);
    a.documents = slot.second.size();
    a.doc_share = static_cast<double>(a.documents) / static_cast<double>(all_docs.size());
    out.push_back(std::move(a));
  }
  std::stable_sort(out.begin(), out.end(), [](const Attribution& a, const Attribution& b) {
    return a.occurrences > b.occurrences;
  });
  return out;
}

std::map<int, std::size_t> CorpusYearTotals(const std::vector<CitingRecord>& records) {
  std::map<int, std::size_t> out;
  if (records.empty()) return out;
  auto [lo, hi] = std::minmax_element(records.begin(), records.end(),
                                      [](const auto& a, const auto& b) { return a.pub_year < b.pub_year; });
  for (int y = lo->pub_year; y <= hi->pub_year; ++y) out[y] = 0;
  for (const auto& r : records) ++out[r.pub_year];
  return out;
}

CitationHistory BuildCitationHistory(const std::vector<CitingRecord>& records,
                                     const ClusterState& state, const std::string& cluster_id) {
  const WorkCluster& cluster = state.cluster(cluster_id);
  std::set<std::string_view> citers;
  for (const auto& key : cluster.members) {
    const Variant* v = state.index().Find(key);
    citers.insert(v->owners.begin(), v->owners.end());
  }
  CitationHistory h;
  h.cluster_id = cluster_id;
  for (const auto& [year, n] : CorpusYearTotals(records)) h.series[year] = 0;
  for (const auto& r : records) {
    if (citers.count(r.record_id)) ++h.series[r.pub_year];
  }
  return h;
}

std::string SpectrumCsv(const Spectrogram& spec) {
  std::string out = "year,count,median5,dev_abs,dev_pct,is_peak\n";
  for (const auto& r : spec.rows) {
    out += std::to_string(r.year) + "," + std::to_string(r.count) + "," +
           text::FormatDecimal(r.median5) + "," + text::FormatDecimal(r.dev_abs) + "," +
           text::FormatDecimal(r.dev_pct) + "," + (r.is_peak ? "1" : "0") + "\n";
  }
  return out;
}

std::string HistoryCsv(const CitationHistory& history) {
  std::string out = "year,records\n";
  for (const auto& [year, n] : history.series) {
    out += std::to_string(year) + "," + std::to_string(n) + "\n";
  }
  return out;
}

}  // namespace refspect
