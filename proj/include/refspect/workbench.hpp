#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "refspect/disambiguation.hpp"
#include "refspect/ingest.hpp"
#include "refspect/spectroscopy.hpp"
#include "refspect/store.hpp"

namespace refspect {

/// A loaded dataset with its derived indexes and live cluster state.
class Workbench {
 public:
  static Workbench FromCorpus(ParsedCorpus corpus, DatasetMeta meta, double threshold,
                              const SourceCanonicalizer& canon = SourceCanonicalizer::Default());
  static Workbench FromDataset(Dataset dataset);
  static Workbench Open(const std::filesystem::path& dir);

  void Save(const std::filesystem::path& dir) const;

  // Replaces the automatic snapshot and clears the analyst journal.
  void Recluster(double threshold, const SourceCanonicalizer& canon = SourceCanonicalizer::Default());

  int Merge(const std::vector<std::string>& ids, const std::string& actor, const std::string& ts);
  int Split(const std::string& id, const std::vector<std::string>& members, const std::string& actor,
            const std::string& ts);
  int EditCanonical(const std::string& id, const ReferenceFields& canonical, const std::string& actor,
                    const std::string& ts);
  // Drops journal entries after `revision` and rebuilds the state.
  void Rollback(int revision);

  const Dataset& dataset() const { return dataset_; }
  const ClusterState& state() const { return *state_; }
  const VariantIndex& index() const { return *index_; }
  const YearTally& tally() const { return tally_; }
  int revision() const { return state_->revision(); }

 private:
  explicit Workbench(Dataset dataset);
  void Sync();

  Dataset dataset_;
  std::shared_ptr<const VariantIndex> index_;
  std::unique_ptr<ClusterState> state_;
  YearTally tally_;
};

/// One line of the occurrence-ranked variant listing for selected years.
struct VariantRow {
  std::size_t rank = 0;
  std::string reference;
  std::size_t occurrences = 0;
  std::size_t documents = 0;
  std::int64_t pct_doc_hundredths = 0;  // documents / records citing the selected years
  std::string cluster_id;
};

struct VariantListing {
  std::vector<int> years;
  std::size_t citing_records = 0;  // records with at least one reference in `years`
  std::vector<VariantRow> rows;
};

VariantListing ListVariants(const Workbench& wb, const std::vector<int>& years);
std::string VariantListingTsv(const VariantListing& listing);

// Spectrogram over [from, to], or over the observed RPY span when unset.
// An empty corpus with no explicit range yields no rows.
Spectrogram SpectrumFor(const Workbench& wb, std::optional<int> from, std::optional<int> to,
                        const SpectrumOptions& options = {},
                        CountBasis basis = CountBasis::kOccurrences);

std::vector<Peak> PeaksFor(const Workbench& wb, std::int64_t min_count, double min_dev_pct,
                           std::optional<int> from = std::nullopt, std::optional<int> to = std::nullopt,
                           std::size_t top = 5);

std::string PeaksTsv(const std::vector<Peak>& peaks, const ClusterState& state);

}  // namespace refspect
