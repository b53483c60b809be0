#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace refspect {

inline constexpr int kMinYear = 1500;

/// One citing publication from a bibliographic export.
struct CitingRecord {
  std::string record_id;
  int pub_year = 0;
  std::string title;
  std::string journal;
  std::vector<std::string> raw_refs;  // file order, verbatim

  bool operator==(const CitingRecord&) const = default;
};

enum class RefFlag : std::uint8_t {
  kNoYear = 1 << 0,
  kYearOutOfRange = 1 << 1,
  kNoSource = 1 << 2,
  kUnparsedSegment = 1 << 3,
};

inline constexpr RefFlag kAllRefFlags[] = {RefFlag::kNoYear, RefFlag::kYearOutOfRange,
                                           RefFlag::kNoSource, RefFlag::kUnparsedSegment};

const char* RefFlagName(RefFlag flag);

class RefFlags {
 public:
  RefFlags() = default;
  void set(RefFlag f) { bits_ |= static_cast<std::uint8_t>(f); }
  bool has(RefFlag f) const { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
  bool empty() const { return bits_ == 0; }
  std::uint8_t bits() const { return bits_; }
  std::vector<std::string> names() const;
  bool operator==(const RefFlags&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

/// The bibliographic fields that identify a cited work.
struct ReferenceFields {
  std::optional<std::string> author;
  std::optional<int> rpy;
  std::optional<std::string> volume;
  std::optional<std::string> page;
  std::optional<std::string> source;

  bool operator==(const ReferenceFields&) const = default;
};

/// One parsed occurrence of a cited reference inside a citing record.
struct CitedReference {
  std::string owner;
  std::string raw;
  ReferenceFields fields;
  RefFlags flags;
  std::vector<std::string> residue;  // unclassified segments, verbatim

  bool operator==(const CitedReference&) const = default;
};

// Throws kEmptyReference for blank input; otherwise never throws.
// `current_year` bounds the YEAR_OUT_OF_RANGE window (0 = today).
CitedReference ParseCitedRef(std::string_view raw, int current_year = 0);

// Canonical "AUTHOR, YEAR, Vn, Pn, SOURCE" form. The author slot is always
// emitted (empty when absent) so that re-parsing is idempotent.
std::string SerializeFields(const ReferenceFields& fields);

// Identity of a reference variant: canonical fields plus any residue.
std::string VariantKey(const CitedReference& ref);

enum class ExportFormat { kWosTagged, kRefCsv };

std::optional<ExportFormat> ParseExportFormat(std::string_view name);
const char* ExportFormatName(ExportFormat format);

struct IngestReport {
  std::size_t kept = 0;
  std::size_t rejected = 0;
  std::size_t references = 0;
  std::map<std::string, std::size_t> reject_reasons;
  std::map<std::string, std::size_t> ref_flags;
  std::vector<std::string> log;  // one line per skipped record

  void Merge(const IngestReport& other);
  nlohmann::ordered_json ToJson() const;
  static IngestReport FromJson(const nlohmann::json& j);
};

struct ParsedCorpus {
  std::vector<CitingRecord> records;
  std::vector<CitedReference> refs;  // grouped by record, in record order
  IngestReport report;
};

// Parses export text into records. Structural errors throw kBadFormat naming
// the line; malformed single records are skipped and logged in the report.
ParsedCorpus ParseExportText(std::string_view data, ExportFormat format,
                             std::string_view origin = "<memory>");
ParsedCorpus ParseExport(const std::filesystem::path& path, ExportFormat format);

// Concatenates corpora, rejecting records whose id is already taken.
ParsedCorpus MergeCorpora(std::vector<ParsedCorpus> parts);

// Parses every record's raw references, preserving record order.
std::vector<CitedReference> ParseReferencesSerial(const std::vector<CitingRecord>& records,
                                                  int current_year = 0);
std::vector<CitedReference> ParseReferences(const std::vector<CitingRecord>& records,
                                            int current_year = 0);

struct YearCount {
  std::size_t occurrences = 0;
  std::size_t documents = 0;
  std::int64_t pct_hundredths = 0;  // documents / corpus records, in 1/100 percent

  double percent() const { return static_cast<double>(pct_hundredths) / 100.0; }
  bool operator==(const YearCount&) const = default;
};

struct YearTally {
  std::map<int, YearCount> years;
  std::size_t no_year = 0;
  std::size_t corpus_records = 0;

  bool operator==(const YearTally&) const = default;
};

YearTally TallyYears(const std::vector<CitedReference>& refs, std::size_t corpus_records);

// round_half_up(100 * part / whole, 2 decimals) as an integer count of 1/100.
std::int64_t PercentHundredths(std::size_t part, std::size_t whole);

}  // namespace refspect
