#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include "fixtures.hpp"
#include "random_corpus.hpp"
#include "refspect/error.hpp"
#include "refspect/store.hpp"

using namespace refspect;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name)
      : path(fs::temp_directory_path() / ("refspect_store_" + name + "_" + std::to_string(::getpid()))) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void Spit(const fs::path& p, const std::string& s) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f << s;
}

std::map<std::string, std::string> Snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = Slurp(e.path());
  return out;
}

ErrorCode LoadCode(const fs::path& dir, std::string* message = nullptr) {
  try {
    Workbench::Open(dir);
  } catch (const Error& e) {
    if (message) *message = e.what();
    return e.code();
  }
  return ErrorCode::kIo;
}

}  // namespace

TEST_CASE("empty dataset round-trips") {
  TempDir tmp("empty");
  auto wb = Workbench::FromCorpus(ParseExportText("", ExportFormat::kWosTagged), {}, 0.75);
  wb.Save(tmp.path / "ds");
  const auto back = Workbench::Open(tmp.path / "ds");
  CHECK(back.dataset().records.empty());
  CHECK(back.state().clusters().empty());
  CHECK(back.revision() == 0);
  CHECK(back.dataset().meta == wb.dataset().meta);
}

TEST_CASE("round trip after three merges") {
  TempDir tmp("merges");
  auto wb = fixtures::BrodieWorkbench();
  for (int i = 0; i < 3; ++i) {
    std::vector<std::string> ids;
    for (const auto& [id, c] : wb.state().clusters()) {
      if (c.canonical.rpy == 1860 && ids.size() < 2) ids.push_back(id);
    }
    wb.Merge(ids, "ana", "2020-01-01T00:00:00Z");
  }
  wb.Save(tmp.path / "ds");
  const auto back = Workbench::Open(tmp.path / "ds");
  CHECK(back.dataset().journal.size() == 3);
  CHECK(back.revision() == 3);
  CHECK(back.state().clusters() == wb.state().clusters());
  CHECK(back.dataset().records == wb.dataset().records);
  CHECK(back.dataset().refs == wb.dataset().refs);
  CHECK(back.dataset().snapshot == wb.dataset().snapshot);
}

TEST_CASE("save is byte-stable without mutation") {
  TempDir tmp("stable");
  Gen g(4);
  auto wb = fixtures::RandomWorkbench(g, 60);
  fixtures::RandomOp(g, wb, 1);
  wb.Save(tmp.path / "a");
  Workbench::Open(tmp.path / "a").Save(tmp.path / "b");
  CHECK(Snapshot(tmp.path / "a") == Snapshot(tmp.path / "b"));
  const auto meta = nlohmann::json::parse(Slurp(tmp.path / "a" / "meta.json"));
  CHECK(meta["format_version"] == "1.0");
  CHECK(meta["revision"] == 1);
  CHECK(Slurp(tmp.path / "a" / "records.csv").rfind("record_id,pub_year,title,journal,n_refs\n", 0) == 0);
}

TEST_CASE("truncated files fail to load cleanly") {
  TempDir tmp("trunc");
  Gen g(5);
  auto wb = fixtures::RandomWorkbench(g, 80);
  for (int i = 0; i < 4; ++i) fixtures::RandomOp(g, wb, i);
  wb.Save(tmp.path / "ds");
  for (const char* name : {"meta.json", "records.csv", "refs.csv", "clusters.csv", "journal.ndjson"}) {
    CAPTURE(name);
    fs::remove_all(tmp.path / "copy");
    fs::copy(tmp.path / "ds", tmp.path / "copy");
    const auto body = Slurp(tmp.path / "copy" / name);
    REQUIRE(body.size() > 100);
    Spit(tmp.path / "copy" / name, body.substr(0, body.size() - 100));
    std::string msg;
    const auto code = LoadCode(tmp.path / "copy", &msg);
    CHECK(code == ErrorCode::kCorrupt);
    CHECK_FALSE(msg.empty());
  }
}

TEST_CASE("corrupted journal line is named") {
  TempDir tmp("journal");
  auto wb = fixtures::BrodieWorkbench();
  std::vector<std::string> ids;
  for (const auto& [id, c] : wb.state().clusters()) ids.push_back(id);
  wb.Merge({ids[0], ids[1]}, "a", "t");
  wb.Merge({wb.state().clusters().begin()->first, std::next(wb.state().clusters().begin())->first}, "a", "t");
  wb.Save(tmp.path / "ds");
  auto j = Slurp(tmp.path / "ds" / "journal.ndjson");
  j.replace(j.find("\n") + 3, 3, "###");
  Spit(tmp.path / "ds" / "journal.ndjson", j);
  std::string msg;
  CHECK(LoadCode(tmp.path / "ds", &msg) == ErrorCode::kCorrupt);
  CHECK(msg.find("line 2") != std::string::npos);
}

TEST_CASE("unsupported versions are refused") {
  TempDir tmp("version");
  fixtures::BrodieWorkbench().Save(tmp.path / "ds");
  auto meta = Slurp(tmp.path / "ds" / "meta.json");
  meta.replace(meta.find("\"1.0\""), 5, "\"2.3\"");
  Spit(tmp.path / "ds" / "meta.json", meta);
  std::string msg;
  CHECK(LoadCode(tmp.path / "ds", &msg) == ErrorCode::kUnsupportedVersion);
  CHECK(msg.find("found 2.3") != std::string::npos);
  CHECK(msg.find("expected 1") != std::string::npos);
}

TEST_CASE("tampered files are detected") {
  TempDir tmp("tamper");
  fixtures::BrodieWorkbench().Save(tmp.path / "ds");
  auto refs = Slurp(tmp.path / "ds" / "refs.csv");
  refs[refs.find("V149")] = 'W';
  Spit(tmp.path / "ds" / "refs.csv", refs);
  CHECK(LoadCode(tmp.path / "ds") == ErrorCode::kCorrupt);
  CHECK(LoadCode(tmp.path / "missing") == ErrorCode::kIo);
}

TEST_CASE("failed save leaves the previous dataset intact") {
  TempDir tmp("crash");
  auto wb = fixtures::BrodieWorkbench();
  wb.Save(tmp.path / "ds");
  const auto before = Snapshot(tmp.path / "ds");
  Spit(tmp.path / "ds.tmp", "a file where the staging directory should go");
  fs::permissions(tmp.path, fs::perms::owner_write, fs::perm_options::remove);
  std::vector<std::string> ids;
  for (const auto& [id, c] : wb.state().clusters()) ids.push_back(id);
  wb.Merge({ids[0], ids[1]}, "a", "t");
  const bool threw = [&] {
    try {
      wb.Save(tmp.path / "ds");
    } catch (const Error&) {
      return true;
    }
    return false;
  }();
  fs::permissions(tmp.path, fs::perms::owner_write, fs::perm_options::add);
  if (::geteuid() != 0) CHECK(threw);
  if (threw) CHECK(Snapshot(tmp.path / "ds") == before);
  CHECK(Workbench::Open(tmp.path / "ds").revision() == (threw ? 0 : 1));
}

TEST_CASE("writer lock excludes a second writer") {
  TempDir tmp("lock");
  const auto ds = tmp.path / "ds";
  {
    WriterLock first(ds);
    try {
      WriterLock second(ds);
      FAIL("second lock acquired");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kLocked);
    }
  }
  WriterLock again(ds);
}

TEST_CASE("randomized round trips preserve every API query") {
  TempDir tmp("random");
  Gen g(6);
  for (int trial = 0; trial < 5; ++trial) {
    auto wb = fixtures::RandomWorkbench(g, g.Int(20, 120));
    for (int i = 0; i < 20; ++i) fixtures::RandomOp(g, wb, i);
    wb.Save(tmp.path / "ds");
    auto back = Workbench::Open(tmp.path / "ds");
    Api a(wb);
    Api b(back);
    CHECK(fixtures::AllQueries(a, wb) == fixtures::AllQueries(b, back));
  }
}
