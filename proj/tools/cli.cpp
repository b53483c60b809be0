#include "cli.hpp"

#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

#include <CLI11.hpp>

#include "refspect/api.hpp"
#include "refspect/diversity.hpp"
#include "refspect/error.hpp"
#include "refspect/synth.hpp"
#include "refspect/text.hpp"
#include "refspect/workbench.hpp"

namespace refspect {

namespace {

// Thrown for flag combinations CLI11 cannot validate on its own.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void WriteOutput(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << content;
  if (!f) throw Error(ErrorCode::kIo, "cannot write " + path);
}

std::optional<int> OptYear(const CLI::Option* opt, int value) {
  if (opt->count() == 0) return std::nullopt;
  return value;
}

SourceCanonicalizer CanonFrom(const std::string& path) {
  return path.empty() ? SourceCanonicalizer::Default() : SourceCanonicalizer::LoadFile(path);
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reference publication year spectroscopy workbench", "refspect"};
  app.set_version_flag("--version", std::string("refspect ") + kVersion);
  app.require_subcommand(1);

  std::string dataset;
  auto add_dataset = [&](CLI::App* sub) {
    sub->add_option("--dataset,-d", dataset, "Dataset directory")->envname("REFSPECT_DATASET")->required();
  };

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Parse export files into a new dataset");
  std::string format_name;
  std::string out_dir;
  std::vector<std::string> files;
  std::string name;
  double ingest_threshold = 0.75;
  std::string canon_path;
  bool force = false;
  ingest->add_option("--format", format_name, "Input format")
      ->required()
      ->check(CLI::IsMember({"wos-tagged", "ref-csv"}));
  ingest->add_option("--out", out_dir, "Dataset directory to create")->required();
  ingest->add_option("files", files, "Export files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--name", name, "Dataset name");
  ingest->add_option("--threshold", ingest_threshold, "Automatic clustering threshold")
      ->check(CLI::Range(std::numeric_limits<double>::min(), 1.0));
  ingest->add_option("--canon", canon_path, "Source abbreviation rules file")->check(CLI::ExistingFile);
  ingest->add_flag("--force", force, "Overwrite an existing dataset");

  // spectrum
  auto* spectrum = app.add_subcommand("spectrum", "Write the RPY spectrogram as CSV");
  add_dataset(spectrum);
  int from = 0;
  int to = 0;
  std::string denominator = "window-sum";
  std::string basis = "occurrences";
  std::int64_t min_count = 10;
  double min_dev_pct = 0.0;
  std::string csv_path;
  auto* from_opt = spectrum->add_option("--from", from, "First RPY");
  auto* to_opt = spectrum->add_option("--to", to, "Last RPY");
  spectrum->add_option("--pct-denominator", denominator, "Percent deviation denominator")
      ->check(CLI::IsMember({"window-sum", "median"}));
  spectrum->add_option("--basis", basis, "Count occurrences or citing documents")
      ->check(CLI::IsMember({"occurrences", "documents"}));
  spectrum->add_option("--min-count", min_count, "Peak threshold for the is_peak column")
      ->check(CLI::Range(std::int64_t{1}, std::numeric_limits<std::int64_t>::max()));
  spectrum->add_option("--min-dev-pct", min_dev_pct, "Minimum percent deviation for is_peak");
  spectrum->add_option("--csv", csv_path, "Output path ('-' for stdout)");

  // peaks
  auto* peaks = app.add_subcommand("peaks", "List peak years (TSV)");
  add_dataset(peaks);
  auto* pfrom_opt = peaks->add_option("--from", from, "First RPY");
  auto* pto_opt = peaks->add_option("--to", to, "Last RPY");
  peaks->add_option("--min-count", min_count, "Minimum yearly count")
      ->check(CLI::Range(std::int64_t{1}, std::numeric_limits<std::int64_t>::max()));
  peaks->add_option("--min-dev-pct", min_dev_pct, "Minimum percent deviation");

  // refs
  auto* refs = app.add_subcommand("refs", "Occurrence-ranked reference variants for given years");
  add_dataset(refs);
  std::vector<int> years;
  refs->add_option("--year", years, "RPY (repeatable)")->required();

  // cluster
  auto* cluster = app.add_subcommand("cluster", "Re-run automatic clustering");
  add_dataset(cluster);
  double threshold = 0.75;
  cluster->add_option("--threshold", threshold, "Similarity threshold in (0, 1]")
      ->check(CLI::Range(std::numeric_limits<double>::min(), 1.0));
  cluster->add_option("--canon", canon_path, "Source abbreviation rules file")->check(CLI::ExistingFile);
  cluster->add_flag("--force", force, "Discard the analyst journal");

  // clusters
  auto* clusters = app.add_subcommand("clusters", "Export the current clusters as CSV");
  add_dataset(clusters);
  clusters->add_option("--csv", csv_path, "Output path ('-' for stdout)");

  // merge / split
  auto* merge = app.add_subcommand("merge", "Merge clusters (journaled)");
  add_dataset(merge);
  std::vector<std::string> targets;
  std::string actor = "analyst";
  merge->add_option("--targets", targets, "Cluster ids")->required()->expected(2, -1);
  merge->add_option("--actor", actor, "Name recorded in the journal");

  auto* split = app.add_subcommand("split", "Split variants out of a cluster (journaled)");
  add_dataset(split);
  std::string cluster_id;
  std::vector<std::string> members;
  split->add_option("--cluster", cluster_id, "Cluster id")->required();
  split->add_option("--members", members, "Variant keys to move out")->required();
  split->add_option("--actor", actor, "Name recorded in the journal");

  // history
  auto* history = app.add_subcommand("history", "Citation history of a cluster as CSV");
  add_dataset(history);
  history->add_option("--cluster", cluster_id, "Cluster id")->required();
  history->add_option("--csv", csv_path, "Output path ('-' for stdout)");

  // diversity
  auto* diversity = app.add_subcommand("diversity", "Rao-Stirling diversity of the corpus");
  add_dataset(diversity);
  std::string map_path;
  std::string mode = "map-distance";
  std::string normalize = "full-map";
  diversity->add_option("--map", map_path, "Journal map CSV")->required()->check(CLI::ExistingFile);
  diversity->add_option("--mode", mode, "Distance mode")
      ->check(CLI::IsMember({"map-distance", "one-minus-cosine"}));
  diversity->add_option("--normalize-over", normalize, "Max-distance normalization set")
      ->check(CLI::IsMember({"full-map", "set"}));

  // serve
  auto* serve = app.add_subcommand("serve", "Serve the JSON API over HTTP");
  add_dataset(serve);
  int port = 8080;
  std::string host = "127.0.0.1";
  std::string static_dir;
  serve->add_option("--port", port, "TCP port")->check(CLI::Range(0, 65535));
  serve->add_option("--host", host, "Bind address (loopback unless set)");
  serve->add_option("--static", static_dir, "Directory of UI assets")->check(CLI::ExistingDirectory);
  serve->add_option("--map", map_path, "Journal map CSV for /api/diversity")->check(CLI::ExistingFile);

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic wos-tagged corpus");
  std::string synth_out;
  SynthOptions synth_opts;
  synth->add_option("--out", synth_out, "Output file ('-' for stdout)")->required();
  synth->add_option("--records", synth_opts.records, "Number of citing records");
  synth->add_option("--seed", synth_opts.seed, "Random seed");

  std::vector<std::string> argv_store;
  argv_store.push_back("refspect");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 1;
  }

  try {
    if (*ingest) {
      if (std::filesystem::exists(out_dir) && !force) {
        throw UsageError(out_dir + " exists; pass --force to overwrite it");
      }
      const auto format = *ParseExportFormat(format_name);
      WriterLock lock(out_dir);
      std::vector<ParsedCorpus> parts;
      DatasetMeta meta;
      meta.name = name.empty() ? std::filesystem::path(out_dir).filename().string() : name;
      for (const auto& f : files) {
        parts.push_back(ParseExport(f, format));
        meta.source_files.push_back(std::filesystem::path(f).filename().string());
        meta.formats.push_back(format_name);
      }
      ParsedCorpus corpus = MergeCorpora(std::move(parts));
      for (const auto& line : corpus.report.log) err << "skipped: " << line << "\n";
      Workbench wb = Workbench::FromCorpus(std::move(corpus), meta, ingest_threshold, CanonFrom(canon_path));
      wb.Save(out_dir);
      out << wb.dataset().meta.ingest.ToJson().dump() << "\n";
      return 0;
    }
    if (*synth) {
      WriteOutput(synth_out, GenerateSyntheticCorpus(synth_opts).wos_text, out);
      return 0;
    }

    if (*spectrum) {
      Workbench wb = Workbench::Open(dataset);
      SpectrumOptions opts;
      opts.denominator = *ParsePctDenominator(denominator);
      opts.min_count = min_count;
      opts.min_dev_pct = min_dev_pct;
      auto lo = OptYear(from_opt, from);
      auto hi = OptYear(to_opt, to);
      if (lo && hi && *lo > *hi) throw UsageError("--from must not exceed --to");
      WriteOutput(csv_path, SpectrumCsv(SpectrumFor(wb, lo, hi, opts, *ParseCountBasis(basis))), out);
      return 0;
    }
    if (*peaks) {
      Workbench wb = Workbench::Open(dataset);
      auto lo = OptYear(pfrom_opt, from);
      auto hi = OptYear(pto_opt, to);
      if (lo && hi && *lo > *hi) throw UsageError("--from must not exceed --to");
      out << PeaksTsv(PeaksFor(wb, min_count, min_dev_pct, lo, hi), wb.state());
      return 0;
    }
    if (*refs) {
      Workbench wb = Workbench::Open(dataset);
      out << VariantListingTsv(ListVariants(wb, years));
      return 0;
    }
    if (*cluster) {
      WriterLock lock(dataset);
      Workbench wb = Workbench::Open(dataset);
      if (wb.revision() > 0 && !force) {
        throw UsageError("dataset has " + std::to_string(wb.revision()) +
                         " journaled analyst decisions; pass --force to discard them");
      }
      wb.Recluster(threshold, CanonFrom(canon_path));
      wb.Save(dataset);
      out << "clusters\t" << wb.state().clusters().size() << "\tthreshold\t"
          << text::FormatDecimal(threshold) << "\n";
      return 0;
    }
    if (*clusters) {
      Workbench wb = Workbench::Open(dataset);
      WriteOutput(csv_path, ClustersCsv(wb.state()), out);
      return 0;
    }
    if (*merge || *split) {
      WriterLock lock(dataset);
      Workbench wb = Workbench::Open(dataset);
      if (*merge) {
        wb.Merge(targets, actor, text::NowIso8601());
      } else {
        wb.Split(cluster_id, members, actor, text::NowIso8601());
      }
      wb.Save(dataset);
      out << "revision\t" << wb.revision() << "\n";
      return 0;
    }
    if (*history) {
      Workbench wb = Workbench::Open(dataset);
      WriteOutput(csv_path, HistoryCsv(BuildCitationHistory(wb.dataset().records, wb.state(), cluster_id)), out);
      return 0;
    }
    if (*diversity) {
      Workbench wb = Workbench::Open(dataset);
      JournalMap map = JournalMap::Load(map_path);
      const DistanceMode dm = *ParseDistanceMode(mode);
      auto [freqs, report] = ComputeJournalFrequencies(wb.dataset().records, map);
      const double delta = RaoStirling(freqs, map, dm, *ParseNormalizeOver(normalize));
      out << DiversityJson(delta, dm, report).dump() << "\n";
      return 0;
    }
    if (*serve) {
      WriterLock lock(dataset);
      Workbench wb = Workbench::Open(dataset);
      std::optional<JournalMap> map;
      if (!map_path.empty()) map = JournalMap::Load(map_path);
      const std::string dir = dataset;
      Api api(wb, std::move(map), [dir](const Workbench& w) { w.Save(dir); });

      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);

      HttpService service(api, host, static_dir.empty() ? std::nullopt : std::optional(static_dir));
      const int bound = service.Start(port);
      err << "serving " << dataset << " on http://" << host << ":" << bound << "\n";
      int sig = 0;
      sigwait(&signals, &sig);
      service.Stop();
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    err << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace refspect
