#include "refspect/ingest.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "refspect/csv.hpp"
#include "refspect/error.hpp"
#include "refspect/text.hpp"

namespace refspect {

const char* RefFlagName(RefFlag flag) {
  switch (flag) {
    case RefFlag::kNoYear: return "NO_YEAR";
    case RefFlag::kYearOutOfRange: return "YEAR_OUT_OF_RANGE";
    case RefFlag::kNoSource: return "NO_SOURCE";
    case RefFlag::kUnparsedSegment: return "UNPARSED_SEGMENT";
  }
  return "?";
}

std::vector<std::string> RefFlags::names() const {
  std::vector<std::string> out;
  for (RefFlag f : kAllRefFlags) {
    if (has(f)) out.emplace_back(RefFlagName(f));
  }
  return out;
}

namespace {

enum class SegmentKind { kYear, kVolume, kPage, kDoi, kOther };

SegmentKind Classify(const std::string& seg) {
  if (seg.size() == 4 && text::IsDigits(seg)) return SegmentKind::kYear;
  if (seg.size() > 1 && text::IsDigits(std::string_view(seg).substr(1))) {
    if (seg[0] == 'V') return SegmentKind::kVolume;
    if (seg[0] == 'P') return SegmentKind::kPage;
  }
  if (seg.rfind("DOI ", 0) == 0) return SegmentKind::kDoi;
  return SegmentKind::kOther;
}

std::string NormalizeAuthor(std::string_view s) {
  std::string a = text::NormalizeToken(s);
  while (!a.empty() && a.back() == '.') a.pop_back();
  return std::string(text::Trim(a));
}

}  // namespace

CitedReference ParseCitedRef(std::string_view raw, int current_year) {
  if (text::Trim(raw).empty()) {
    throw Error(ErrorCode::kEmptyReference, "empty cited reference");
  }
  if (current_year == 0) current_year = text::CurrentYear();

  CitedReference ref;
  ref.raw = std::string(raw);

  std::vector<std::string_view> pieces = text::Split(raw, ',');
  std::vector<std::string> segs;
  segs.reserve(pieces.size());
  for (auto p : pieces) segs.push_back(text::NormalizeToken(p));

  std::vector<bool> consumed(segs.size(), false);
  auto to_residue = [&](std::size_t i) {
    ref.residue.emplace_back(text::Trim(pieces[i]));
    ref.flags.set(RefFlag::kUnparsedSegment);
    consumed[i] = true;
  };

  for (std::size_t i = 0; i < segs.size(); ++i) {
    switch (Classify(segs[i])) {
      case SegmentKind::kYear:
        if (ref.fields.rpy) {
          to_residue(i);
        } else {
          ref.fields.rpy = std::stoi(segs[i]);
          consumed[i] = true;
        }
        break;
      case SegmentKind::kVolume:
        if (ref.fields.volume) {
          to_residue(i);
        } else {
          ref.fields.volume = segs[i].substr(1);
          consumed[i] = true;
        }
        break;
      case SegmentKind::kPage:
        if (ref.fields.page) {
          to_residue(i);
        } else {
          ref.fields.page = segs[i].substr(1);
          consumed[i] = true;
        }
        break;
      case SegmentKind::kDoi:
        to_residue(i);
        break;
      case SegmentKind::kOther:
        break;
    }
  }

  if (!consumed[0]) {
    std::string author = NormalizeAuthor(segs[0]);
    if (!author.empty()) ref.fields.author = std::move(author);
    consumed[0] = true;
  }

  std::optional<std::size_t> source_at;
  for (std::size_t i = segs.size(); i-- > 1;) {
    if (!consumed[i] && !segs[i].empty()) {
      source_at = i;
      break;
    }
  }
  if (source_at) {
    ref.fields.source = segs[*source_at];
    consumed[*source_at] = true;
  }
  for (std::size_t i = 1; i < segs.size(); ++i) {
    if (!consumed[i]) to_residue(i);
  }

  if (!ref.fields.rpy) {
    ref.flags.set(RefFlag::kNoYear);
  } else if (*ref.fields.rpy < kMinYear || *ref.fields.rpy > current_year) {
    ref.flags.set(RefFlag::kYearOutOfRange);
  }
  if (!ref.fields.source) ref.flags.set(RefFlag::kNoSource);
  return ref;
}

std::string SerializeFields(const ReferenceFields& f) {
  std::vector<std::string> parts;
  parts.push_back(f.author.value_or(""));
  if (f.rpy) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d", *f.rpy);
    parts.emplace_back(buf);
  }
  if (f.volume) parts.push_back("V" + *f.volume);
  if (f.page) parts.push_back("P" + *f.page);
  if (f.source) parts.push_back(*f.source);
  return text::Join(parts, ", ");
}

std::string VariantKey(const CitedReference& ref) {
  std::string key = SerializeFields(ref.fields);
  for (const auto& r : ref.residue) {
    key += " | ";
    key += r;
  }
  return key;
}

std::optional<ExportFormat> ParseExportFormat(std::string_view name) {
  if (name == "wos-tagged") return ExportFormat::kWosTagged;
  if (name == "ref-csv") return ExportFormat::kRefCsv;
  return std::nullopt;
}

const char* ExportFormatName(ExportFormat format) {
  return format == ExportFormat::kWosTagged ? "wos-tagged" : "ref-csv";
}

void IngestReport::Merge(const IngestReport& other) {
  kept += other.kept;
  rejected += other.rejected;
  references += other.references;
  for (const auto& [k, v] : other.reject_reasons) reject_reasons[k] += v;
  for (const auto& [k, v] : other.ref_flags) ref_flags[k] += v;
  log.insert(log.end(), other.log.begin(), other.log.end());
}

nlohmann::ordered_json IngestReport::ToJson() const {
  nlohmann::ordered_json j;
  j["kept"] = kept;
  j["rejected"] = rejected;
  j["reject_reasons"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : reject_reasons) j["reject_reasons"][k] = v;
  j["ref_flags"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : ref_flags) j["ref_flags"][k] = v;
  return j;
}

IngestReport IngestReport::FromJson(const nlohmann::json& j) {
  IngestReport r;
  r.kept = j.at("kept").get<std::size_t>();
  r.rejected = j.at("rejected").get<std::size_t>();
  for (const auto& [k, v] : j.at("reject_reasons").items()) r.reject_reasons[k] = v.get<std::size_t>();
  for (const auto& [k, v] : j.at("ref_flags").items()) r.ref_flags[k] = v.get<std::size_t>();
  return r;
}

namespace {

std::optional<int> ParsePubYear(std::string_view value) {
  std::string_view v = text::Trim(value);
  if (v.size() != 4 || !text::IsDigits(v)) return std::nullopt;
  int year = std::stoi(std::string(v));
  if (year < kMinYear || year > text::CurrentYear()) return std::nullopt;
  return year;
}

void Reject(IngestReport& report, const std::string& reason, const std::string& detail) {
  ++report.rejected;
  ++report.reject_reasons[reason];
  report.log.push_back(reason + ": " + detail);
}

// Accumulates records while enforcing id uniqueness.
class RecordSink {
 public:
  explicit RecordSink(IngestReport& report) : report_(report) {}

  void Add(CitingRecord rec, const std::string& where) {
    if (!ids_.insert(rec.record_id).second) {
      Reject(report_, "DUPLICATE_ID", rec.record_id + " " + where);
      return;
    }
    ++report_.kept;
    records_.push_back(std::move(rec));
  }

  std::vector<CitingRecord> Take() { return std::move(records_); }

 private:
  IngestReport& report_;
  std::unordered_set<std::string> ids_;
  std::vector<CitingRecord> records_;
};

struct WosRecord {
  std::size_t start_line = 0;
  std::map<std::string, std::vector<std::string>> tags;
};

bool IsTag(std::string_view line) {
  if (line.size() < 2) return false;
  auto up = [](char c) { return c >= 'A' && c <= 'Z'; };
  auto alnum = [&](char c) { return up(c) || (c >= '0' && c <= '9'); };
  if (!up(line[0]) || !alnum(line[1])) return false;
  return line.size() == 2 || line[2] == ' ';
}

void FinishWosRecord(const WosRecord& rec, std::size_t ordinal, std::string_view origin,
                     RecordSink& sink, IngestReport& report) {
  const std::string where = std::string(origin) + ":" + std::to_string(rec.start_line);
  for (const char* tag : {"PT", "TI", "SO", "PY", "CR"}) {
    if (!rec.tags.count(tag)) {
      Reject(report, "MISSING_TAG", std::string(tag) + " absent in record at " + where);
      return;
    }
  }
  auto joined = [&](const char* tag) {
    std::vector<std::string> parts;
    for (const auto& v : rec.tags.at(tag)) parts.emplace_back(text::Trim(v));
    return text::Join(parts, " ");
  };

  auto year = ParsePubYear(joined("PY"));
  if (!year) {
    Reject(report, "BAD_PUB_YEAR", "PY '" + joined("PY") + "' in record at " + where);
    return;
  }

  CitingRecord out;
  if (auto it = rec.tags.find("UT"); it != rec.tags.end() && !text::Trim(it->second.front()).empty()) {
    out.record_id = std::string(text::Trim(it->second.front()));
  } else {
    out.record_id = std::string(origin) + "#" + std::to_string(ordinal);
  }
  out.pub_year = *year;
  out.title = joined("TI");
  out.journal = joined("SO");
  for (const auto& ref : rec.tags.at("CR")) {
    if (text::Trim(ref).empty()) {
      ++report.ref_flags["EMPTY_REFERENCE"];
      continue;
    }
    out.raw_refs.push_back(ref);
  }
  sink.Add(std::move(out), where);
}

std::vector<CitingRecord> ParseWosTagged(std::string_view data, std::string_view origin,
                                         IngestReport& report) {
  RecordSink sink(report);
  std::optional<WosRecord> open;
  std::string current_tag;
  bool ended = false;
  std::size_t ordinal = 0;
  std::size_t lineno = 0;

  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::kBadFormat, std::string(origin) + " line " + std::to_string(lineno) + ": " + what);
  };

  std::size_t pos = 0;
  while (pos < data.size()) {
    std::size_t nl = data.find('\n', pos);
    std::string_view line = data.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? data.size() : nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || (line.rfind("   ", 0) != 0 && text::Trim(line).empty())) continue;
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.remove_prefix(3);

    if (ended) fail("content after EF file terminator");

    if (line.rfind("   ", 0) == 0) {
      if (!open || current_tag.empty()) fail("continuation line outside a field");
      open->tags[current_tag].emplace_back(line.substr(3));
      continue;
    }
    if (!IsTag(line)) fail("expected 'TAG VALUE' line");

    std::string tag(line.substr(0, 2));
    std::string_view value = line.size() > 3 ? line.substr(3) : std::string_view{};

    if (tag == "EF") {
      if (open) fail("EF reached with record starting at line " + std::to_string(open->start_line) +
                     " missing its ER terminator");
      ended = true;
      continue;
    }
    if (tag == "ER") {
      if (!open) fail("ER without an open record");
      FinishWosRecord(*open, ++ordinal, origin, sink, report);
      open.reset();
      current_tag.clear();
      continue;
    }
    if (!open) {
      if (tag == "FN" || tag == "VR") continue;
      open.emplace();
      open->start_line = lineno;
    } else if (tag == "PT") {
      fail("PT starts a new record but record at line " + std::to_string(open->start_line) +
           " has no ER terminator");
    }
    current_tag = tag;
    open->tags[tag].emplace_back(value);
  }
  if (open) {
    lineno = open->start_line;
    fail("record missing ER terminator at end of file");
  }
  return sink.Take();
}

constexpr const char* kRefCsvHeader[] = {"record_id", "pub_year", "title", "journal", "cited_ref"};

std::vector<CitingRecord> ParseRefCsv(std::string_view data, std::string_view origin,
                                      IngestReport& report) {
  if (data.rfind("\xEF\xBB\xBF", 0) == 0) data.remove_prefix(3);
  std::vector<csv::Row> rows = csv::Parse(data);
  if (rows.empty()) return {};

  auto fail = [&](std::size_t line, const std::string& what) {
    throw Error(ErrorCode::kBadFormat, std::string(origin) + " line " + std::to_string(line) + ": " + what);
  };
  const auto& header = rows.front().fields;
  if (header.size() != 5 || !std::equal(header.begin(), header.end(), std::begin(kRefCsvHeader))) {
    fail(1, "header must be record_id,pub_year,title,journal,cited_ref");
  }

  struct Group {
    std::size_t line = 0;
    std::vector<const csv::Row*> rows;
  };
  std::vector<std::string> order;
  std::unordered_map<std::string, Group> groups;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& row = rows[i];
    if (row.fields.size() == 1 && row.fields[0].empty()) continue;
    if (row.fields.size() != 5) {
      fail(row.line, "expected 5 columns, found " + std::to_string(row.fields.size()));
    }
    auto [it, fresh] = groups.try_emplace(row.fields[0]);
    if (fresh) {
      it->second.line = row.line;
      order.push_back(row.fields[0]);
    }
    it->second.rows.push_back(&row);
  }

  RecordSink sink(report);
  for (const auto& id : order) {
    const Group& g = groups.at(id);
    const std::string where = std::string(origin) + ":" + std::to_string(g.line);
    if (text::Trim(id).empty()) {
      Reject(report, "MISSING_ID", "empty record_id at " + where);
      continue;
    }
    const auto& first = g.rows.front()->fields;
    bool consistent = true;
    for (const auto* r : g.rows) {
      if (r->fields[1] != first[1] || r->fields[2] != first[2] || r->fields[3] != first[3]) {
        consistent = false;
      }
    }
    if (!consistent) {
      Reject(report, "INCONSISTENT_ROWS", id + " at " + where);
      continue;
    }
    auto year = ParsePubYear(first[1]);
    if (!year) {
      Reject(report, "BAD_PUB_YEAR", "pub_year '" + first[1] + "' for " + id + " at " + where);
      continue;
    }
    CitingRecord rec;
    rec.record_id = id;
    rec.pub_year = *year;
    rec.title = first[2];
    rec.journal = first[3];
    for (const auto* r : g.rows) {
      const std::string& ref = r->fields[4];
      if (ref.empty()) continue;
      if (text::Trim(ref).empty()) {
        ++report.ref_flags["EMPTY_REFERENCE"];
        continue;
      }
      rec.raw_refs.push_back(ref);
    }
    sink.Add(std::move(rec), where);
  }
  return sink.Take();
}

void CountFlags(const std::vector<CitedReference>& refs, IngestReport& report) {
  report.references += refs.size();
  for (const auto& r : refs) {
    for (RefFlag f : kAllRefFlags) {
      if (r.flags.has(f)) ++report.ref_flags[RefFlagName(f)];
    }
  }
}

}  // namespace

ParsedCorpus ParseExportText(std::string_view data, ExportFormat format, std::string_view origin) {
  ParsedCorpus out;
  out.records = format == ExportFormat::kWosTagged ? ParseWosTagged(data, origin, out.report)
                                                   : ParseRefCsv(data, origin, out.report);
  out.refs = ParseReferences(out.records);
  CountFlags(out.refs, out.report);
  return out;
}

ParsedCorpus ParseExport(const std::filesystem::path& path, ExportFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "read failed for " + path.string());
  return ParseExportText(ss.str(), format, path.filename().string());
}

ParsedCorpus MergeCorpora(std::vector<ParsedCorpus> parts) {
  ParsedCorpus out;
  std::unordered_set<std::string> ids;
  for (auto& part : parts) {
    IngestReport rep = part.report;
    std::unordered_set<std::string> dropped;
    for (auto& rec : part.records) {
      if (!ids.insert(rec.record_id).second) {
        dropped.insert(rec.record_id);
        --rep.kept;
        Reject(rep, "DUPLICATE_ID", rec.record_id + " repeated across input files");
        continue;
      }
      out.records.push_back(std::move(rec));
    }
    if (!dropped.empty()) {
      // Recount flags for the references that survive.
      for (RefFlag f : kAllRefFlags) rep.ref_flags.erase(RefFlagName(f));
      rep.references = 0;
      std::vector<CitedReference> kept_refs;
      for (auto& r : part.refs) {
        if (!dropped.count(r.owner)) kept_refs.push_back(std::move(r));
      }
      CountFlags(kept_refs, rep);
      part.refs = std::move(kept_refs);
    }
    out.refs.insert(out.refs.end(), std::make_move_iterator(part.refs.begin()),
                    std::make_move_iterator(part.refs.end()));
    out.report.Merge(rep);
  }
  return out;
}

std::vector<CitedReference> ParseReferencesSerial(const std::vector<CitingRecord>& records,
                                                  int current_year) {
  if (current_year == 0) current_year = text::CurrentYear();
  std::vector<CitedReference> out;
  for (const auto& rec : records) {
    for (const auto& raw : rec.raw_refs) {
      out.push_back(ParseCitedRef(raw, current_year));
      out.back().owner = rec.record_id;
    }
  }
  return out;
}

std::vector<CitedReference> ParseReferences(const std::vector<CitingRecord>& records,
                                            int current_year) {
  if (current_year == 0) current_year = text::CurrentYear();
  std::vector<std::size_t> offset(records.size() + 1, 0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    offset[i + 1] = offset[i] + records[i].raw_refs.size();
  }
  std::vector<CitedReference> out(offset.back());
  const auto n = static_cast<std::ptrdiff_t>(records.size());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto& rec = records[static_cast<std::size_t>(i)];
    std::size_t slot = offset[static_cast<std::size_t>(i)];
    for (const auto& raw : rec.raw_refs) {
      out[slot] = ParseCitedRef(raw, current_year);
      out[slot].owner = rec.record_id;
      ++slot;
    }
  }
  return out;
}

std::int64_t PercentHundredths(std::size_t part, std::size_t whole) {
  if (whole == 0) return 0;
  const auto p = static_cast<std::int64_t>(part);
  const auto w = static_cast<std::int64_t>(whole);
  return (p * 20000 + w) / (2 * w);
}

YearTally TallyYears(const std::vector<CitedReference>& refs, std::size_t corpus_records) {
  YearTally tally;
  tally.corpus_records = corpus_records;
  std::map<int, std::set<std::string_view>> owners;
  for (const auto& r : refs) {
    if (!r.fields.rpy) {
      ++tally.no_year;
      continue;
    }
    ++tally.years[*r.fields.rpy].occurrences;
    owners[*r.fields.rpy].insert(r.owner);
  }
  for (auto& [year, count] : tally.years) {
    count.documents = owners[year].size();
    count.pct_hundredths = PercentHundredths(count.documents, corpus_records);
  }
  return tally;
}

}  // namespace refspect
