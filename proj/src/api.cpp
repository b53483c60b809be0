#include "refspect/api.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "refspect/error.hpp"
#include "refspect/text.hpp"

namespace refspect {

using nlohmann::ordered_json;

namespace {

class BadRequest : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::optional<long long> QueryInt(const ApiRequest& req, const std::string& name) {
  auto it = req.query.find(name);
  if (it == req.query.end() || it->second.empty()) return std::nullopt;
  std::string_view v = it->second;
  bool neg = !v.empty() && v.front() == '-';
  if (neg) v.remove_prefix(1);
  if (!text::IsDigits(v) || v.size() > 12) throw BadRequest(name + " must be an integer");
  long long n = std::stoll(std::string(v));
  return neg ? -n : n;
}

std::optional<double> QueryDouble(const ApiRequest& req, const std::string& name) {
  auto it = req.query.find(name);
  if (it == req.query.end() || it->second.empty()) return std::nullopt;
  try {
    std::size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used == it->second.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw BadRequest(name + " must be a number");
}

std::optional<std::string> QueryString(const ApiRequest& req, const std::string& name) {
  auto it = req.query.find(name);
  if (it == req.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::optional<int> QueryYear(const ApiRequest& req, const std::string& name) {
  auto v = QueryInt(req, name);
  if (!v) return std::nullopt;
  return static_cast<int>(*v);
}

std::vector<std::string> SplitPath(const std::string& path) {
  std::vector<std::string> parts;
  for (auto p : text::Split(path, '/')) {
    if (!p.empty()) parts.emplace_back(p);
  }
  return parts;
}

double Rounded(double v) { return std::stod(text::FormatDecimal(v)); }

ordered_json AttributionJson(const Attribution& a, const ClusterState& state) {
  ordered_json j;
  j["cluster_id"] = a.cluster_id;
  j["reference"] = SerializeFields(state.cluster(a.cluster_id).canonical);
  j["occurrences"] = a.occurrences;
  j["share"] = a.share;
  j["documents"] = a.documents;
  j["doc_share"] = a.doc_share;
  return j;
}

ordered_json Envelope(int revision, ordered_json payload) {
  ordered_json j;
  j["revision"] = revision;
  j["payload"] = std::move(payload);
  return j;
}

ApiResponse ErrorResponse(int status, int revision, const std::string& code, const std::string& message) {
  ordered_json j;
  j["revision"] = revision;
  j["error"] = {{"code", code}, {"message", message}};
  return {status, j};
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownCluster: return 404;
    case ErrorCode::kRevisionConflict: return 409;
    case ErrorCode::kIo:
    case ErrorCode::kLocked: return 500;
    default: return 400;
  }
}

}  // namespace

ordered_json SpectrumJson(const Spectrogram& spec) {
  ordered_json j;
  j["from"] = spec.rows.empty() ? ordered_json(nullptr) : ordered_json(spec.from);
  j["to"] = spec.rows.empty() ? ordered_json(nullptr) : ordered_json(spec.to);
  j["denominator"] = PctDenominatorName(spec.denominator);
  auto rows = ordered_json::array();
  for (const auto& r : spec.rows) {
    rows.push_back({{"year", r.year},
                    {"count", r.count},
                    {"median5", Rounded(r.median5)},
                    {"dev_abs", Rounded(r.dev_abs)},
                    {"dev_pct", Rounded(r.dev_pct)},
                    {"is_peak", r.is_peak}});
  }
  j["rows"] = rows;
  return j;
}

ordered_json PeaksJson(const std::vector<Peak>& peaks, const ClusterState& state) {
  auto out = ordered_json::array();
  for (const auto& p : peaks) {
    ordered_json j;
    j["year"] = p.year;
    j["count"] = p.count;
    j["dev_abs"] = p.dev_abs;
    j["dev_pct"] = p.dev_pct;
    auto top = ordered_json::array();
    for (const auto& a : p.top_clusters) top.push_back(AttributionJson(a, state));
    j["top_clusters"] = top;
    out.push_back(j);
  }
  return out;
}

Api::Api(Workbench& wb, std::optional<JournalMap> map, Persist persist, Clock clock)
    : wb_(wb), map_(std::move(map)), persist_(std::move(persist)), clock_(std::move(clock)) {
  if (!clock_) clock_ = text::NowIso8601;
}

ApiResponse Api::Handle(const ApiRequest& req) {
  const auto parts = SplitPath(req.path);
  const bool is_post = req.method == "POST";
  std::shared_lock<std::shared_mutex> read_lock(mu_, std::defer_lock);
  std::unique_lock<std::shared_mutex> write_lock(mu_, std::defer_lock);
  if (is_post) {
    // Holding the turnstile keeps new readers out until the writer is in.
    std::lock_guard<std::mutex> gate(turnstile_);
    write_lock.lock();
  } else {
    { std::lock_guard<std::mutex> gate(turnstile_); }
    read_lock.lock();
  }

  const int rev = wb_.revision();
  try {
    if (parts.size() < 2 || parts[0] != "api") throw NotFound("no such endpoint " + req.path);
    if (req.method == "GET") return Get(parts, req);
    if (is_post) return Post(parts, req);
    return ErrorResponse(405, rev, "METHOD_NOT_ALLOWED", req.method + " not supported");
  } catch (const BadRequest& e) {
    return ErrorResponse(400, rev, "BAD_REQUEST", e.what());
  } catch (const NotFound& e) {
    return ErrorResponse(404, rev, "NOT_FOUND", e.what());
  } catch (const Error& e) {
    return ErrorResponse(StatusFor(e.code()), wb_.revision(), ErrorCodeName(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return ErrorResponse(400, rev, "BAD_REQUEST", e.what());
  }
}

ApiResponse Api::Get(const std::vector<std::string>& parts, const ApiRequest& req) {
  const int rev = wb_.revision();
  const std::string& what = parts[1];

  if (what == "meta" && parts.size() == 2) {
    const Dataset& d = wb_.dataset();
    ordered_json j;
    j["name"] = d.meta.name;
    j["created"] = d.meta.created;
    j["format_version"] = kFormatVersion;
    j["source_files"] = d.meta.source_files;
    j["formats"] = d.meta.formats;
    j["records"] = d.records.size();
    j["references"] = d.refs.size();
    j["clusters"] = wb_.state().clusters().size();
    j["ingest_report"] = d.meta.ingest.ToJson();
    j["auto_cluster"] = {{"threshold", d.snapshot.threshold}, {"created", d.snapshot.created}};
    auto years = ordered_json::object();
    for (const auto& [y, n] : CorpusYearTotals(d.records)) years[std::to_string(y)] = n;
    j["pub_years"] = years;
    return {200, Envelope(rev, j)};
  }

  if (what == "spectrum" && parts.size() == 2) {
    SpectrumOptions opts;
    if (auto d = QueryString(req, "denominator")) {
      auto parsed = ParsePctDenominator(*d);
      if (!parsed) throw BadRequest("denominator must be window-sum or median");
      opts.denominator = *parsed;
    }
    CountBasis basis = CountBasis::kOccurrences;
    if (auto b = QueryString(req, "basis")) {
      auto parsed = ParseCountBasis(*b);
      if (!parsed) throw BadRequest("basis must be occurrences or documents");
      basis = *parsed;
    }
    if (auto mc = QueryInt(req, "min_count")) {
      if (*mc < 1) throw BadRequest("min_count must be at least 1");
      opts.min_count = *mc;
    }
    if (auto md = QueryDouble(req, "min_dev_pct")) opts.min_dev_pct = *md;
    auto from = QueryYear(req, "from");
    auto to = QueryYear(req, "to");
    if (from && to && *from > *to) throw BadRequest("from must not exceed to");
    return {200, Envelope(rev, SpectrumJson(SpectrumFor(wb_, from, to, opts, basis)))};
  }

  if (what == "peaks" && parts.size() == 2) {
    const long long min_count = QueryInt(req, "min_count").value_or(10);
    if (min_count < 1) throw BadRequest("min_count must be at least 1");
    const double min_dev = QueryDouble(req, "min_dev_pct").value_or(0.0);
    const long long top = QueryInt(req, "top").value_or(5);
    if (top < 0) throw BadRequest("top must be non-negative");
    auto peaks = PeaksFor(wb_, min_count, min_dev, QueryYear(req, "from"), QueryYear(req, "to"),
                          static_cast<std::size_t>(top));
    return {200, Envelope(rev, PeaksJson(peaks, wb_.state()))};
  }

  if (what == "years" && parts.size() == 4 && parts[3] == "references") {
    if (!text::IsDigits(parts[2]) || parts[2].size() > 6) throw BadRequest("year must be an integer");
    const int year = std::stoi(parts[2]);
    VariantListing listing = ListVariants(wb_, {year});
    if (listing.rows.empty()) throw NotFound("no references with RPY " + parts[2]);
    ordered_json j;
    j["year"] = year;
    j["citing_records"] = listing.citing_records;
    auto rows = ordered_json::array();
    for (const auto& r : listing.rows) {
      rows.push_back({{"rank", r.rank},
                      {"reference", r.reference},
                      {"occurrences", r.occurrences},
                      {"documents", r.documents},
                      {"pct_doc", static_cast<double>(r.pct_doc_hundredths) / 100.0},
                      {"cluster_id", r.cluster_id}});
    }
    j["variants"] = rows;
    return {200, Envelope(rev, j)};
  }

  if (what == "clusters" && parts.size() == 2) {
    auto year = QueryYear(req, "year");
    std::vector<const WorkCluster*> hits;
    for (const auto& [id, c] : wb_.state().clusters()) {
      if (year) {
        bool any = false;
        for (const auto& m : c.members) any = any || wb_.index().Find(m)->fields.rpy == *year;
        if (!any) continue;
      }
      hits.push_back(&c);
    }
    std::stable_sort(hits.begin(), hits.end(),
                     [](const WorkCluster* a, const WorkCluster* b) { return a->occ_weight > b->occ_weight; });
    auto arr = ordered_json::array();
    for (const WorkCluster* c : hits) arr.push_back(ClusterToJson(*c));
    return {200, Envelope(rev, arr)};
  }

  if (what == "clusters" && parts.size() == 4 && parts[3] == "history") {
    if (!wb_.state().Find(parts[2])) throw NotFound("unknown cluster id " + parts[2]);
    CitationHistory h = BuildCitationHistory(wb_.dataset().records, wb_.state(), parts[2]);
    ordered_json j;
    j["cluster_id"] = h.cluster_id;
    auto series = ordered_json::array();
    for (const auto& [y, n] : h.series) series.push_back({{"year", y}, {"records", n}});
    j["series"] = series;
    auto corpus = ordered_json::array();
    for (const auto& [y, n] : CorpusYearTotals(wb_.dataset().records)) {
      corpus.push_back({{"year", y}, {"records", n}});
    }
    j["corpus"] = corpus;
    return {200, Envelope(rev, j)};
  }

  if (what == "diversity" && parts.size() == 2) {
    if (!map_) throw NotFound("no journal map configured (start the service with --map)");
    DistanceMode mode = DistanceMode::kMapDistance;
    if (auto m = QueryString(req, "mode")) {
      auto parsed = ParseDistanceMode(*m);
      if (!parsed) throw BadRequest("mode must be map-distance or one-minus-cosine");
      mode = *parsed;
    }
    NormalizeOver norm = NormalizeOver::kFullMap;
    if (auto n = QueryString(req, "normalize_over")) {
      auto parsed = ParseNormalizeOver(*n);
      if (!parsed) throw BadRequest("normalize_over must be full-map or set");
      norm = *parsed;
    }
    auto [freqs, report] = ComputeJournalFrequencies(wb_.dataset().records, *map_);
    const double delta = RaoStirling(freqs, *map_, mode, norm);
    return {200, Envelope(rev, DiversityJson(delta, mode, report))};
  }

  throw NotFound("no such endpoint " + req.path);
}

ApiResponse Api::Post(const std::vector<std::string>& parts, const ApiRequest& req) {
  if (!(parts.size() == 3 && parts[1] == "clusters" && (parts[2] == "merge" || parts[2] == "split"))) {
    throw NotFound("no such endpoint " + req.path);
  }
  nlohmann::json body;
  try {
    body = nlohmann::json::parse(req.body.empty() ? "{}" : req.body);
  } catch (const nlohmann::json::exception&) {
    throw BadRequest("request body is not valid JSON");
  }
  if (!body.is_object()) throw BadRequest("request body must be a JSON object");

  const int before = wb_.revision();
  if (body.contains("expected_revision") && !body["expected_revision"].is_null()) {
    if (!body["expected_revision"].is_number_integer()) throw BadRequest("expected_revision must be an integer");
    const int expected = body["expected_revision"].get<int>();
    if (expected != before) {
      return ErrorResponse(409, before, "REVISION_CONFLICT",
                           "expected revision " + std::to_string(expected) + " but dataset is at " +
                               std::to_string(before));
    }
  }
  const std::string actor = body.value("actor", std::string("analyst"));
  const std::string ts = clock_();

  ordered_json payload;
  if (parts[2] == "merge") {
    if (!body.contains("targets") || !body["targets"].is_array()) throw BadRequest("targets must be an array");
    auto targets = body["targets"].get<std::vector<std::string>>();
    for (const auto& id : targets) {
      if (!wb_.state().Find(id)) throw NotFound("unknown cluster id " + id);
    }
    wb_.Merge(targets, actor, ts);
    const auto& last = wb_.state().clusters();
    // The merged cluster is the one created at this revision.
    for (const auto& [id, c] : last) {
      if (!c.provenance.empty() && c.provenance.back().revision == wb_.revision()) {
        payload["cluster"] = ClusterToJson(c);
      }
    }
  } else {
    if (!body.contains("cluster") || !body["cluster"].is_string()) throw BadRequest("cluster must be a string");
    if (!body.contains("members") || !body["members"].is_array()) throw BadRequest("members must be an array");
    const auto id = body["cluster"].get<std::string>();
    if (!wb_.state().Find(id)) throw NotFound("unknown cluster id " + id);
    wb_.Split(id, body["members"].get<std::vector<std::string>>(), actor, ts);
    payload["clusters"] = ordered_json::array();
    for (const auto& [cid, c] : wb_.state().clusters()) {
      if (!c.provenance.empty() && c.provenance.back().revision == wb_.revision()) {
        payload["clusters"].push_back(ClusterToJson(c));
      }
    }
  }

  if (persist_) {
    try {
      persist_(wb_);
    } catch (const std::exception& e) {
      wb_.Rollback(before);
      return ErrorResponse(500, before, "PERSIST_FAILED", e.what());
    }
  }
  return {200, Envelope(wb_.revision(), payload)};
}

}  // namespace refspect
