#include "refspect/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "refspect/csv.hpp"
#include "refspect/error.hpp"
#include "refspect/text.hpp"

namespace fs = std::filesystem;

namespace refspect {

namespace {

constexpr const char* kFiles[] = {"records.csv", "refs.csv", "clusters.csv", "journal.ndjson"};

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string RecordsCsv(const Dataset& d) {
  std::string out = "record_id,pub_year,title,journal,n_refs\n";
  for (const auto& r : d.records) {
    out += csv::FormatRow({r.record_id, std::to_string(r.pub_year), r.title, r.journal,
                           std::to_string(r.raw_refs.size())});
  }
  return out;
}

std::string RefsCsv(const Dataset& d) {
  std::string out = "record_id,ordinal,raw,author,rpy,volume,page,source,flags\n";
  std::size_t k = 0;
  for (const auto& rec : d.records) {
    for (std::size_t i = 0; i < rec.raw_refs.size(); ++i, ++k) {
      // Parsed columns are informational; load re-parses the raw string.
      const ReferenceFields* f = k < d.refs.size() ? &d.refs[k].fields : nullptr;
      std::vector<std::string> row = {rec.record_id, std::to_string(i + 1), rec.raw_refs[i]};
      if (f) {
        row.push_back(f->author.value_or(""));
        row.push_back(f->rpy ? std::to_string(*f->rpy) : "");
        row.push_back(f->volume.value_or(""));
        row.push_back(f->page.value_or(""));
        row.push_back(f->source.value_or(""));
        row.push_back(text::Join(d.refs[k].flags.names(), "|"));
      } else {
        row.insert(row.end(), 6, "");
      }
      out += csv::FormatRow(row);
    }
  }
  return out;
}

std::string ClustersFile(const Dataset& d) {
  std::string out = "cluster_id,member_key\n";
  for (const auto& group : d.snapshot.groups) {
    const std::string id = ClusterId(group, 0);
    for (const auto& m : group) out += csv::FormatRow({id, m});
  }
  return out;
}

[[noreturn]] void Corrupt(const std::string& file, const std::string& what) {
  throw Error(ErrorCode::kCorrupt, file + ": " + what);
}

std::vector<csv::Row> ParseTable(const std::string& file, const std::string& data,
                                 const std::vector<std::string>& header) {
  std::vector<csv::Row> rows;
  try {
    rows = csv::Parse(data);
  } catch (const Error& e) {
    Corrupt(file, e.what());
  }
  if (rows.empty() || rows.front().fields != header) Corrupt(file, "unexpected header");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].fields.size() != header.size()) {
      Corrupt(file, "line " + std::to_string(rows[i].line) + " has " +
                        std::to_string(rows[i].fields.size()) + " columns");
    }
  }
  rows.erase(rows.begin());
  return rows;
}

std::size_t ParseCount(const std::string& file, const std::string& s, std::size_t line) {
  if (!text::IsDigits(s) || s.size() > 12) Corrupt(file, "line " + std::to_string(line) + ": bad number '" + s + "'");
  return std::stoull(s);
}

}  // namespace

void SaveDataset(const Dataset& d, const fs::path& dir) {
  std::map<std::string, std::string> files;
  files["records.csv"] = RecordsCsv(d);
  files["refs.csv"] = RefsCsv(d);
  files["clusters.csv"] = ClustersFile(d);
  files["journal.ndjson"] = SerializeJournal(d.journal);

  nlohmann::ordered_json meta;
  meta["format_version"] = kFormatVersion;
  meta["name"] = d.meta.name;
  meta["created"] = d.meta.created;
  meta["source_files"] = d.meta.source_files;
  meta["formats"] = d.meta.formats;
  meta["ingest_report"] = d.meta.ingest.ToJson();
  meta["revision"] = d.revision();
  meta["auto_cluster"] = {{"threshold", d.snapshot.threshold},
                          {"created", d.snapshot.created},
                          {"clusters", d.snapshot.groups.size()}};
  nlohmann::ordered_json manifest;
  for (const char* name : kFiles) {
    const std::string& body = files[name];
    manifest[name] = {{"bytes", body.size()}, {"fnv1a", text::Hex64(text::Fnv1a(body))}};
  }
  meta["files"] = manifest;

  const fs::path target = fs::absolute(dir).lexically_normal();
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  const fs::path old = target.parent_path() / (target.filename().string() + ".old");
  std::error_code ec;
  fs::remove_all(tmp, ec);
  fs::create_directories(tmp, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + tmp.string() + ": " + ec.message());
  for (const auto& [name, body] : files) WriteFile(tmp / name, body);
  WriteFile(tmp / "meta.json", meta.dump(2) + "\n");

  fs::remove_all(old, ec);
  if (fs::exists(target)) {
    fs::rename(target, old, ec);
    if (ec) throw Error(ErrorCode::kIo, "cannot replace " + target.string() + ": " + ec.message());
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    std::error_code restore;
    if (fs::exists(old)) fs::rename(old, target, restore);
    throw Error(ErrorCode::kIo, "cannot move dataset into place: " + ec.message());
  }
  fs::remove_all(old, ec);
}

Dataset LoadDataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, dir.string() + " is not a dataset directory");
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(ReadFile(dir / "meta.json"));
  } catch (const nlohmann::json::exception& e) {
    Corrupt("meta.json", e.what());
  }

  Dataset d;
  std::map<std::string, std::string> files;
  try {
    const std::string version = meta.at("format_version").get<std::string>();
    const std::string major = version.substr(0, version.find('.'));
    if (major != "1") {
      throw Error(ErrorCode::kUnsupportedVersion,
                  "unsupported dataset format version: found " + version + ", expected 1.x");
    }
    d.meta.name = meta.at("name").get<std::string>();
    d.meta.created = meta.at("created").get<std::string>();
    d.meta.source_files = meta.at("source_files").get<std::vector<std::string>>();
    d.meta.formats = meta.at("formats").get<std::vector<std::string>>();
    d.meta.ingest = IngestReport::FromJson(meta.at("ingest_report"));
    d.snapshot.threshold = meta.at("auto_cluster").at("threshold").get<double>();
    d.snapshot.created = meta.at("auto_cluster").at("created").get<std::string>();

    for (const char* name : kFiles) files[name] = ReadFile(dir / name);

    d.journal = ParseJournal(files["journal.ndjson"]);

    for (const char* name : kFiles) {
      const auto& entry = meta.at("files").at(name);
      const auto bytes = entry.at("bytes").get<std::size_t>();
      if (files[name].size() != bytes) {
        Corrupt(name, "expected " + std::to_string(bytes) + " bytes, found " +
                          std::to_string(files[name].size()) + " (truncated or modified)");
      }
      if (text::Hex64(text::Fnv1a(files[name])) != entry.at("fnv1a").get<std::string>()) {
        Corrupt(name, "checksum mismatch");
      }
    }
    if (meta.at("revision").get<int>() != d.revision()) {
      Corrupt("meta.json", "revision does not match the journal");
    }
  } catch (const nlohmann::json::exception& e) {
    Corrupt("meta.json", e.what());
  }

  std::map<std::string, std::size_t> expected_refs;
  for (const auto& row : ParseTable("records.csv", files["records.csv"],
                                    {"record_id", "pub_year", "title", "journal", "n_refs"})) {
    CitingRecord r;
    r.record_id = row.fields[0];
    r.pub_year = static_cast<int>(ParseCount("records.csv", row.fields[1], row.line));
    r.title = row.fields[2];
    r.journal = row.fields[3];
    if (!expected_refs.emplace(r.record_id, ParseCount("records.csv", row.fields[4], row.line)).second) {
      Corrupt("records.csv", "duplicate record id " + r.record_id);
    }
    d.records.push_back(std::move(r));
  }

  std::map<std::string, std::size_t> slot;
  for (std::size_t i = 0; i < d.records.size(); ++i) slot[d.records[i].record_id] = i;
  for (const auto& row : ParseTable("refs.csv", files["refs.csv"],
                                    {"record_id", "ordinal", "raw", "author", "rpy", "volume",
                                     "page", "source", "flags"})) {
    auto it = slot.find(row.fields[0]);
    if (it == slot.end()) Corrupt("refs.csv", "line " + std::to_string(row.line) + ": unknown record");
    auto& rec = d.records[it->second];
    if (ParseCount("refs.csv", row.fields[1], row.line) != rec.raw_refs.size() + 1) {
      Corrupt("refs.csv", "line " + std::to_string(row.line) + ": ordinal out of sequence");
    }
    rec.raw_refs.push_back(row.fields[2]);
  }
  for (const auto& r : d.records) {
    if (r.raw_refs.size() != expected_refs[r.record_id]) {
      Corrupt("refs.csv", "reference count mismatch for " + r.record_id);
    }
  }
  d.refs = ParseReferences(d.records);

  std::vector<std::pair<std::string, std::vector<std::string>>> groups;
  for (const auto& row : ParseTable("clusters.csv", files["clusters.csv"], {"cluster_id", "member_key"})) {
    if (groups.empty() || groups.back().first != row.fields[0]) groups.emplace_back(row.fields[0], std::vector<std::string>{});
    groups.back().second.push_back(row.fields[1]);
  }
  for (auto& [id, members] : groups) {
    if (ClusterId(members, 0) != id) Corrupt("clusters.csv", "cluster " + id + " does not match its members");
    d.snapshot.groups.push_back(std::move(members));
  }
  return d;
}

WriterLock::WriterLock(const fs::path& dataset_dir) {
  const fs::path target = fs::absolute(dataset_dir).lexically_normal();
  const std::string path = target.parent_path() / (target.filename().string() + ".lock");
  fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
  if (fd_ < 0) throw Error(ErrorCode::kIo, "cannot open lock file " + path);
  if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw Error(ErrorCode::kLocked, "dataset is locked by another writer (" + path + ")");
  }
}

WriterLock::~WriterLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

}  // namespace refspect
