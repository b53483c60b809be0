#include "refspect/workbench.hpp"

#include <algorithm>
#include <set>

#include "refspect/error.hpp"
#include "refspect/text.hpp"

namespace refspect {

Workbench::Workbench(Dataset dataset) : dataset_(std::move(dataset)) {
  index_ = std::make_shared<const VariantIndex>(VariantIndex::Build(dataset_.refs));
  state_ = std::make_unique<ClusterState>(
      ClusterState::Replay(index_, dataset_.snapshot, dataset_.journal));
  tally_ = TallyYears(dataset_.refs, dataset_.records.size());
}

Workbench Workbench::FromCorpus(ParsedCorpus corpus, DatasetMeta meta, double threshold,
                                const SourceCanonicalizer& canon) {
  Dataset d;
  d.meta = std::move(meta);
  d.meta.ingest = corpus.report;
  if (d.meta.created.empty()) d.meta.created = text::NowIso8601();
  d.records = std::move(corpus.records);
  d.refs = std::move(corpus.refs);
  const VariantIndex index = VariantIndex::Build(d.refs);
  d.snapshot = AutoCluster(index, BuildBlocks(index), threshold, canon);
  d.snapshot.created = d.meta.created;
  return Workbench(std::move(d));
}

Workbench Workbench::FromDataset(Dataset dataset) { return Workbench(std::move(dataset)); }

Workbench Workbench::Open(const std::filesystem::path& dir) {
  try {
    return Workbench(LoadDataset(dir));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kCorrupt || e.code() == ErrorCode::kIo ||
        e.code() == ErrorCode::kUnsupportedVersion) {
      throw;
    }
    // Journal entries that no longer replay mean the files disagree.
    throw Error(ErrorCode::kCorrupt, std::string("journal.ndjson: replay failed: ") + e.what());
  }
}

void Workbench::Save(const std::filesystem::path& dir) const { SaveDataset(dataset_, dir); }

void Workbench::Recluster(double threshold, const SourceCanonicalizer& canon) {
  AutoSnapshot snap = AutoCluster(*index_, BuildBlocks(*index_), threshold, canon);
  snap.created = text::NowIso8601();
  dataset_.snapshot = std::move(snap);
  dataset_.journal.clear();
  state_ = std::make_unique<ClusterState>(index_, dataset_.snapshot);
}

void Workbench::Sync() { dataset_.journal = state_->journal(); }

int Workbench::Merge(const std::vector<std::string>& ids, const std::string& actor,
                     const std::string& ts) {
  int rev = state_->Merge(ids, actor, ts);
  Sync();
  return rev;
}

int Workbench::Split(const std::string& id, const std::vector<std::string>& members,
                     const std::string& actor, const std::string& ts) {
  int rev = state_->Split(id, members, actor, ts);
  Sync();
  return rev;
}

int Workbench::EditCanonical(const std::string& id, const ReferenceFields& canonical,
                             const std::string& actor, const std::string& ts) {
  int rev = state_->EditCanonical(id, canonical, actor, ts);
  Sync();
  return rev;
}

void Workbench::Rollback(int revision) {
  std::vector<JournalEntry> kept(state_->journal().begin(),
                                 state_->journal().begin() + std::clamp(revision, 0, state_->revision()));
  state_ = std::make_unique<ClusterState>(ClusterState::Replay(index_, dataset_.snapshot, kept));
  Sync();
}

VariantListing ListVariants(const Workbench& wb, const std::vector<int>& years) {
  VariantListing out;
  out.years = years;
  std::set<int> wanted(years.begin(), years.end());
  std::set<std::string_view> citing;
  std::vector<const Variant*> hits;
  for (const auto& v : wb.index().variants()) {
    if (!v.fields.rpy || !wanted.count(*v.fields.rpy)) continue;
    hits.push_back(&v);
    citing.insert(v.owners.begin(), v.owners.end());
  }
  // Variants are key-sorted already; stable sort keeps that as the tie-break.
  std::stable_sort(hits.begin(), hits.end(),
                   [](const Variant* a, const Variant* b) { return a->occurrences > b->occurrences; });
  out.citing_records = citing.size();
  for (const Variant* v : hits) {
    VariantRow row;
    row.rank = out.rows.size() + 1;
    row.reference = v->key;
    row.occurrences = v->occurrences;
    row.documents = v->documents();
    row.pct_doc_hundredths = PercentHundredths(row.documents, out.citing_records);
    row.cluster_id = wb.state().ClusterOf(v->key);
    out.rows.push_back(std::move(row));
  }
  return out;
}

namespace {
std::string Hundredths(std::int64_t h) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%lld.%02lld", static_cast<long long>(h / 100),
                static_cast<long long>(h % 100));
  return buf;
}
}  // namespace

std::string VariantListingTsv(const VariantListing& listing) {
  std::string out = "term\tocc\tdoc\tpct_doc\treference\tcluster_id\n";
  for (const auto& r : listing.rows) {
    out += std::to_string(r.rank) + "\t" + std::to_string(r.occurrences) + "\t" +
           std::to_string(r.documents) + "\t" + Hundredths(r.pct_doc_hundredths) + "\t" +
           r.reference + "\t" + r.cluster_id + "\n";
  }
  return out;
}

Spectrogram SpectrumFor(const Workbench& wb, std::optional<int> from, std::optional<int> to,
                        const SpectrumOptions& options, CountBasis basis) {
  const YearCounts counts = CountsFromTally(wb.tally(), basis);
  auto span = ObservedSpan(counts);
  if (!span && !from && !to) {
    Spectrogram empty;
    empty.denominator = options.denominator;
    return empty;
  }
  const int lo = from.value_or(span ? span->first : *to);
  const int hi = to.value_or(span ? span->second : *from);
  return BuildSpectrogram(counts, lo, hi, options);
}

std::vector<Peak> PeaksFor(const Workbench& wb, std::int64_t min_count, double min_dev_pct,
                           std::optional<int> from, std::optional<int> to, std::size_t top) {
  if (min_count < 1) throw Error(ErrorCode::kInvalidArgument, "min_count must be at least 1");
  SpectrumOptions opts;
  opts.min_count = min_count;
  opts.min_dev_pct = min_dev_pct;
  std::vector<Peak> peaks = DetectPeaks(SpectrumFor(wb, from, to, opts), min_count, min_dev_pct);
  for (auto& p : peaks) {
    p.top_clusters = AttributionShares(p.year, wb.state());
    if (p.top_clusters.size() > top) p.top_clusters.resize(top);
  }
  return peaks;
}

std::string PeaksTsv(const std::vector<Peak>& peaks, const ClusterState& state) {
  std::string out = "year\tcount\tdev_abs\tdev_pct\ttop_cluster\ttop_occurrences\ttop_share\ttop_reference\n";
  for (const auto& p : peaks) {
    out += std::to_string(p.year) + "\t" + std::to_string(p.count) + "\t" +
           text::FormatDecimal(p.dev_abs) + "\t" + text::FormatDecimal(p.dev_pct);
    if (p.top_clusters.empty()) {
      out += "\t\t\t\t\n";
      continue;
    }
    const Attribution& a = p.top_clusters.front();
    out += "\t" + a.cluster_id + "\t" + std::to_string(a.occurrences) + "\t" +
           text::FormatDecimal(a.share) + "\t" + SerializeFields(state.cluster(a.cluster_id).canonical) + "\n";
  }
  return out;
}

}  // namespace refspect
