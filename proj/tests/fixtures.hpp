#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "refspect/ingest.hpp"
#include "refspect/workbench.hpp"

namespace fixtures {

struct BrodieRow {
  const char* raw;
  std::size_t occurrences;
  const char* author;
  int rpy;
  const char* volume;  // nullptr when absent
  const char* page;
  const char* source;
};

// The Brodie graphite-oxide variants, 1859 and 1860.
inline constexpr std::array<BrodieRow, 15> kBrodieVariants = {{
    {"BRODIE B C, 1859, V149, P249, PHILOS T ROY SOC LONDON", 145, "BRODIE B C", 1859, "149", "249", "PHILOS T ROY SOC LONDON"},
    {"BRODIE B C, 1860, V59, P466, ANN CHIM PHYS", 89, "BRODIE B C", 1860, "59", "466", "ANN CHIM PHYS"},
    {"BRODIE M B C, 1860, V59, P466, ANN CHIM PHYS", 6, "BRODIE M B C", 1860, "59", "466", "ANN CHIM PHYS"},
    {"BRODIE B C, 1859, V10, P249, P ROY SOC LONDON", 3, "BRODIE B C", 1859, "10", "249", "P ROY SOC LONDON"},
    {"BRODIE B, 1859, V149, P249, PHILOS T R SOC LONDON", 3, "BRODIE B", 1859, "149", "249", "PHILOS T R SOC LONDON"},
    {"BRODIE B C, 1859, V10, P249, P R SOC LONDON", 2, "BRODIE B C", 1859, "10", "249", "P R SOC LONDON"},
    {"BRODIE B C, 1860, V12, P261, Q J CHEM SOC", 2, "BRODIE B C", 1860, "12", "261", "Q J CHEM SOC"},
    {"BRODIE B C, 1859, V10, P11, P R SOC LONDON", 1, "BRODIE B C", 1859, "10", "11", "P R SOC LONDON"},
    {"BRODIE B C, 1859, V149, P10, PHILOS T R SOC", 1, "BRODIE B C", 1859, "149", "10", "PHILOS T R SOC"},
    {"BRODIE B C, 1860, V114, P6, LIEBIGS ANN CHEM", 1, "BRODIE B C", 1860, "114", "6", "LIEBIGS ANN CHEM"},
    {"BRODIE B, 1860, P59, ANN CHIM PHYS", 1, "BRODIE B", 1860, nullptr, "59", "ANN CHIM PHYS"},
    {"BRODIE B, 1860, V59, P17, NN CHIM PHYS", 1, "BRODIE B", 1860, "59", "17", "NN CHIM PHYS"},
    {"BRODIE B, 1860, V59, P7, ANN CHIM PHYS", 1, "BRODIE B", 1860, "59", "7", "ANN CHIM PHYS"},
    {"BRODIE E C, 1860, V59, P466, ANN CHIM PHYS", 1, "BRODIE E C", 1860, "59", "466", "ANN CHIM PHYS"},
    {"BRODIE F R S, 1859, V149, P249, PHILOS T R SOC LONDON", 1, "BRODIE F R S", 1859, "149", "249", "PHILOS T R SOC LONDON"},
}};

inline constexpr std::size_t kBrodieRecords = 254;

// wos-tagged corpus of 254 records. The 156 occurrences from 1859 go to
// records 0..155 and the 102 from 1860 to records 152..253, so every year
// has one occurrence per citing record and four records cite both years.
inline std::string BrodieWos() {
  std::vector<std::vector<std::string>> refs(kBrodieRecords);
  std::size_t next1859 = 0;
  std::size_t next1860 = 152;
  for (const auto& row : kBrodieVariants) {
    std::size_t& k = row.rpy == 1859 ? next1859 : next1860;
    for (std::size_t i = 0; i < row.occurrences; ++i) refs[k++].push_back(row.raw);
  }
  std::string out = "FN Test\nVR 1.0\n";
  for (std::size_t r = 0; r < kBrodieRecords; ++r) {
    out += "PT J\nTI Graphene record " + std::to_string(r) + "\nSO CARBON\nPY " +
           std::to_string(2004 + static_cast<int>(r % 9)) + "\n";
    for (std::size_t i = 0; i < refs[r].size(); ++i) out += (i == 0 ? "CR " : "   ") + refs[r][i] + "\n";
    out += "UT BR:" + std::to_string(r) + "\nER\n";
  }
  out += "EF\n";
  return out;
}

inline refspect::Workbench BrodieWorkbench(double threshold = 0.75) {
  auto corpus = refspect::ParseExportText(BrodieWos(), refspect::ExportFormat::kWosTagged, "brodie");
  refspect::DatasetMeta meta;
  meta.name = "brodie";
  meta.created = "2020-01-01T00:00:00Z";
  meta.ingest = corpus.report;
  return refspect::Workbench::FromCorpus(std::move(corpus), meta, threshold);
}

}  // namespace fixtures
