#include "refspect/diversity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "refspect/csv.hpp"
#include "refspect/error.hpp"
#include "refspect/kernels.hpp"
#include "refspect/text.hpp"

namespace refspect {

namespace {

double ParseNumber(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    double v = std::stod(std::string(text::Trim(s)), &used);
    if (used == text::Trim(s).size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw Error(ErrorCode::kBadFormat, "map line " + std::to_string(line) + ": '" + s +
                                         "' is not a finite number");
}

}  // namespace

void JournalMap::Add(std::string_view journal, JournalPoint point) {
  std::string key = text::NormalizeToken(journal);
  if (key.empty()) throw Error(ErrorCode::kBadFormat, "empty journal key");
  if (!std::isfinite(point.x) || !std::isfinite(point.y)) {
    throw Error(ErrorCode::kBadFormat, "non-finite coordinates for " + key);
  }
  if (entries_.empty()) {
    profile_dims_ = point.profile.size();
  } else if (point.profile.size() != profile_dims_) {
    throw Error(ErrorCode::kBadFormat, "profile length differs for " + key);
  }
  if (!entries_.emplace(key, std::move(point)).second) {
    throw Error(ErrorCode::kBadFormat, "duplicate journal " + key);
  }
}

JournalMap JournalMap::FromCsv(std::string_view data) {
  if (data.rfind("\xEF\xBB\xBF", 0) == 0) data.remove_prefix(3);
  auto rows = csv::Parse(data);
  if (rows.empty() || rows[0].fields.size() < 3 || rows[0].fields[0] != "journal" ||
      rows[0].fields[1] != "x" || rows[0].fields[2] != "y") {
    throw Error(ErrorCode::kBadFormat, "map line 1: header must start with journal,x,y");
  }
  const std::size_t width = rows[0].fields.size();
  JournalMap map;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& f = rows[i].fields;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != width) {
      throw Error(ErrorCode::kBadFormat, "map line " + std::to_string(rows[i].line) + ": expected " +
                                             std::to_string(width) + " columns");
    }
    JournalPoint p;
    p.x = ParseNumber(f[1], rows[i].line);
    p.y = ParseNumber(f[2], rows[i].line);
    for (std::size_t c = 3; c < width; ++c) p.profile.push_back(ParseNumber(f[c], rows[i].line));
    try {
      map.Add(f[0], std::move(p));
    } catch (const Error& e) {
      throw Error(ErrorCode::kBadFormat, "map line " + std::to_string(rows[i].line) + ": " + e.what());
    }
  }
  return map;
}

JournalMap JournalMap::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read map " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return FromCsv(ss.str());
}

const JournalPoint* JournalMap::Find(std::string_view journal) const {
  auto it = entries_.find(text::NormalizeToken(journal));
  return it == entries_.end() ? nullptr : &it->second;
}

std::pair<JournalFrequencies, MatchReport> ComputeJournalFrequencies(
    const std::vector<CitingRecord>& records, const JournalMap& map) {
  std::map<std::string, std::size_t> counts;
  MatchReport report;
  report.total_records = records.size();
  for (const auto& r : records) {
    std::string key = text::NormalizeToken(r.journal);
    if (!map.Find(key)) continue;
    ++counts[key];
    ++report.included_records;
  }
  if (report.included_records == 0) {
    throw Error(ErrorCode::kNoMatchedRecords, "no record's journal appears on the map");
  }
  JournalFrequencies freqs;
  for (const auto& [key, n] : counts) {
    freqs.p[key] = static_cast<double>(n) / static_cast<double>(report.included_records);
  }
  report.matched_journals = counts.size();
  report.inclusion_pct =
      100.0 * static_cast<double>(report.included_records) / static_cast<double>(report.total_records);
  return {freqs, report};
}

std::optional<DistanceMode> ParseDistanceMode(std::string_view name) {
  if (name == "map-distance") return DistanceMode::kMapDistance;
  if (name == "one-minus-cosine") return DistanceMode::kOneMinusCosine;
  return std::nullopt;
}

const char* DistanceModeName(DistanceMode mode) {
  return mode == DistanceMode::kMapDistance ? "map-distance" : "one-minus-cosine";
}

std::optional<NormalizeOver> ParseNormalizeOver(std::string_view name) {
  if (name == "full-map") return NormalizeOver::kFullMap;
  if (name == "set") return NormalizeOver::kSet;
  return std::nullopt;
}

namespace {

struct Prepared {
  std::vector<double> p;
  std::vector<const JournalPoint*> points;
  double scale = 1.0;  // max pairwise distance (map mode)
  std::vector<double> norms;
  bool trivial = false;  // Δ is 0 without evaluation
};

double Euclid(const JournalPoint& a, const JournalPoint& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double MaxDistance(const std::vector<const JournalPoint*>& pts) {
  double best = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, Euclid(*pts[i], *pts[j]));
  }
  return best;
}

Prepared Prepare(const JournalFrequencies& freqs, const JournalMap& map, DistanceMode mode,
                 NormalizeOver normalize) {
  Prepared out;
  std::vector<std::pair<double, const JournalPoint*>> entries;
  for (const auto& [key, p] : freqs.p) {
    const JournalPoint* pt = map.Find(key);
    if (!pt) throw Error(ErrorCode::kMissingJournal, "journal '" + key + "' is not on the map");
    entries.emplace_back(p, pt);
  }
  // Summation order follows the frequencies, not the journal names, so
  // renaming journals cannot change the rounding.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (const auto& [p, pt] : entries) {
    out.p.push_back(p);
    out.points.push_back(pt);
  }
  if (out.points.size() <= 1) {
    out.trivial = true;
    return out;
  }
  if (mode == DistanceMode::kMapDistance) {
    if (normalize == NormalizeOver::kSet) {
      out.scale = MaxDistance(out.points);
    } else {
      std::vector<const JournalPoint*> all;
      for (const auto& [key, pt] : map.entries()) all.push_back(&pt);
      out.scale = MaxDistance(all);
    }
    if (out.scale == 0.0) {
      throw Error(ErrorCode::kDegenerateMap, "all journal coordinates coincide (max distance 0)");
    }
  } else {
    if (!map.has_profiles()) {
      throw Error(ErrorCode::kInvalidArgument, "one-minus-cosine mode needs citation-profile columns");
    }
    for (const auto* pt : out.points) {
      double sq = 0.0;
      for (double v : pt->profile) sq += v * v;
      if (sq == 0.0) throw Error(ErrorCode::kDegenerateMap, "zero citation profile on the map");
      out.norms.push_back(std::sqrt(sq));
    }
  }
  return out;
}

template <typename Kernel>
double Evaluate(const JournalFrequencies& freqs, const JournalMap& map, DistanceMode mode,
                NormalizeOver normalize, Kernel&& kernel) {
  const Prepared prep = Prepare(freqs, map, mode, normalize);
  if (prep.trivial) return 0.0;
  if (mode == DistanceMode::kMapDistance) {
    return kernel(prep.p, [&](std::size_t i, std::size_t j) {
      return Euclid(*prep.points[i], *prep.points[j]) / prep.scale;
    });
  }
  return kernel(prep.p, [&](std::size_t i, std::size_t j) {
    const auto& a = prep.points[i]->profile;
    const auto& b = prep.points[j]->profile;
    double dot = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) dot += a[k] * b[k];
    return std::max(0.0, 1.0 - dot / (prep.norms[i] * prep.norms[j]));
  });
}

}  // namespace

double RaoStirlingSerial(const JournalFrequencies& freqs, const JournalMap& map, DistanceMode mode,
                         NormalizeOver normalize) {
  return Evaluate(freqs, map, mode, normalize, [](std::span<const double> p, auto&& d) {
    return kernels::QuadraticEntropySerial(p, d);
  });
}

double RaoStirling(const JournalFrequencies& freqs, const JournalMap& map, DistanceMode mode,
                   NormalizeOver normalize) {
  return Evaluate(freqs, map, mode, normalize, [](std::span<const double> p, auto&& d) {
    return kernels::QuadraticEntropyParallel(p, d);
  });
}

nlohmann::ordered_json DiversityJson(double delta, DistanceMode mode, const MatchReport& report) {
  nlohmann::ordered_json j;
  j["delta"] = delta;
  j["mode"] = DistanceModeName(mode);
  j["matched_journals"] = report.matched_journals;
  j["inclusion_pct"] = report.inclusion_pct;
  return j;
}

}  // namespace refspect
