#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "refspect/ingest.hpp"

namespace refspect {

struct JournalPoint {
  double x = 0.0;
  double y = 0.0;
  std::vector<double> profile;  // citation profile for cosine distances
};

/// Precomputed journal positions (and optional profiles), keyed by the
/// normalized journal title.
class JournalMap {
 public:
  // CSV with header journal,x,y[,profile columns...].
  static JournalMap FromCsv(std::string_view data);
  static JournalMap Load(const std::string& path);

  void Add(std::string_view journal, JournalPoint point);

  const std::map<std::string, JournalPoint>& entries() const { return entries_; }
  const JournalPoint* Find(std::string_view journal) const;
  bool has_profiles() const { return profile_dims_ > 0; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, JournalPoint> entries_;
  std::size_t profile_dims_ = 0;
};

struct JournalFrequencies {
  std::map<std::string, double> p;  // normalized journal key -> relative frequency
};

struct MatchReport {
  std::size_t matched_journals = 0;
  std::size_t included_records = 0;
  std::size_t total_records = 0;
  double inclusion_pct = 0.0;
};

std::pair<JournalFrequencies, MatchReport> ComputeJournalFrequencies(
    const std::vector<CitingRecord>& records, const JournalMap& map);

enum class DistanceMode { kMapDistance, kOneMinusCosine };
enum class NormalizeOver { kFullMap, kSet };

std::optional<DistanceMode> ParseDistanceMode(std::string_view name);
const char* DistanceModeName(DistanceMode mode);
std::optional<NormalizeOver> ParseNormalizeOver(std::string_view name);

// Rao-Stirling diversity: sum over ordered journal pairs of p_i p_j d_ij.
// Map mode divides Euclidean distance by the largest pairwise distance over
// either the whole map or the journals in `freqs`.
double RaoStirlingSerial(const JournalFrequencies& freqs, const JournalMap& map, DistanceMode mode,
                         NormalizeOver normalize = NormalizeOver::kFullMap);
double RaoStirling(const JournalFrequencies& freqs, const JournalMap& map, DistanceMode mode,
                   NormalizeOver normalize = NormalizeOver::kFullMap);

nlohmann::ordered_json DiversityJson(double delta, DistanceMode mode, const MatchReport& report);

}  // namespace refspect
