#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "refspect/disambiguation.hpp"
#include "refspect/ingest.hpp"

namespace refspect {

inline constexpr const char* kFormatVersion = "1.0";

struct DatasetMeta {
  std::string name;
  std::string created;
  std::vector<std::string> source_files;
  std::vector<std::string> formats;
  IngestReport ingest;

  bool operator==(const DatasetMeta& o) const {
    return name == o.name && created == o.created && source_files == o.source_files &&
           formats == o.formats && ingest.ToJson() == o.ingest.ToJson();
  }
};

/// Everything needed to reproduce an analysis session.
///
/// On disk this is a directory holding meta.json, records.csv, refs.csv,
/// clusters.csv and journal.ndjson. References are stored verbatim and
/// re-parsed on load.
struct Dataset {
  DatasetMeta meta;
  std::vector<CitingRecord> records;
  std::vector<CitedReference> refs;
  AutoSnapshot snapshot;
  std::vector<JournalEntry> journal;

  int revision() const { return journal.empty() ? 0 : journal.back().rev; }
};

// Writes into a sibling temporary directory and swaps it into place, so a
// failed save leaves the previous dataset untouched.
void SaveDataset(const Dataset& dataset, const std::filesystem::path& dir);

// Throws kUnsupportedVersion, kCorrupt (naming the file or journal line) or kIo.
Dataset LoadDataset(const std::filesystem::path& dir);

/// Advisory single-writer lock held on "<dataset>.lock".
class WriterLock {
 public:
  explicit WriterLock(const std::filesystem::path& dataset_dir);
  ~WriterLock();
  WriterLock(const WriterLock&) = delete;
  WriterLock& operator=(const WriterLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace refspect
