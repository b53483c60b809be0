#include "refspect/disambiguation.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "refspect/csv.hpp"
#include "refspect/error.hpp"
#include "refspect/kernels.hpp"
#include "refspect/text.hpp"
#include "source_canon_data.hpp"

namespace refspect {

// ---------------------------------------------------------------------------
// Variants and blocks

VariantIndex VariantIndex::Build(const std::vector<CitedReference>& refs) {
  std::map<std::string, Variant> by_key;
  for (const auto& r : refs) {
    std::string key = VariantKey(r);
    auto [it, fresh] = by_key.try_emplace(key);
    Variant& v = it->second;
    if (fresh) {
      v.key = key;
      v.fields = r.fields;
    }
    ++v.occurrences;
    v.owners.push_back(r.owner);
  }
  VariantIndex index;
  index.variants_.reserve(by_key.size());
  for (auto& [key, v] : by_key) {
    std::sort(v.owners.begin(), v.owners.end());
    v.owners.erase(std::unique(v.owners.begin(), v.owners.end()), v.owners.end());
    index.by_key_.emplace(key, index.variants_.size());
    index.variants_.push_back(std::move(v));
  }
  return index;
}

const Variant* VariantIndex::Find(std::string_view key) const {
  auto i = IndexOf(key);
  return i == std::string::npos ? nullptr : &variants_[i];
}

std::size_t VariantIndex::IndexOf(std::string_view key) const {
  auto it = by_key_.find(std::string(key));
  return it == by_key_.end() ? std::string::npos : it->second;
}

std::string BlockKey::ToString() const {
  std::string year = rpy ? std::to_string(*rpy) : "?";
  if (residual) return "(residual, " + year + ")";
  return "(" + surname + ", " + year + ")";
}

BlockKey BlockKeyFor(const ReferenceFields& fields) {
  BlockKey key;
  key.rpy = fields.rpy;
  if (!fields.author || !fields.rpy) {
    key.residual = true;
    return key;
  }
  key.surname = std::string(text::Split(*fields.author, ' ').front());
  return key;
}

std::vector<Block> BuildBlocks(const VariantIndex& index) {
  std::map<BlockKey, std::vector<std::size_t>> blocks;
  const auto& vs = index.variants();
  for (std::size_t i = 0; i < vs.size(); ++i) blocks[BlockKeyFor(vs[i].fields)].push_back(i);
  std::vector<Block> out;
  out.reserve(blocks.size());
  for (auto& [key, members] : blocks) out.push_back({key, std::move(members)});
  return out;
}

// ---------------------------------------------------------------------------
// Similarity

SourceCanonicalizer SourceCanonicalizer::Parse(std::string_view rules) {
  SourceCanonicalizer c;
  std::size_t lineno = 0;
  for (auto line : text::Split(rules, '\n')) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    std::istringstream ss{std::string(line)};
    std::string directive;
    if (!(ss >> directive)) continue;
    std::string a, b, extra;
    if (directive == "replace" && (ss >> a >> b) && !(ss >> extra)) {
      c.replace_[text::ToUpper(a)] = text::ToUpper(b);
    } else if (directive == "drop-trailing" && (ss >> a) && !(ss >> extra)) {
      c.drop_trailing_.push_back(text::ToUpper(a));
    } else {
      throw Error(ErrorCode::kBadFormat,
                  "source rules line " + std::to_string(lineno) + ": cannot parse '" +
                      std::string(text::Trim(line)) + "'");
    }
  }
  return c;
}

SourceCanonicalizer SourceCanonicalizer::LoadFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read source rules " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return Parse(ss.str());
}

const SourceCanonicalizer& SourceCanonicalizer::Default() {
  static const SourceCanonicalizer kDefault = Parse(detail::kDefaultSourceRules);
  return kDefault;
}

std::string SourceCanonicalizer::Apply(std::string_view source) const {
  std::vector<std::string> tokens;
  std::istringstream ss{text::NormalizeToken(source)};
  for (std::string tok; ss >> tok;) {
    auto it = replace_.find(tok);
    tokens.push_back(it == replace_.end() ? tok : it->second);
  }
  bool dropped = true;
  while (dropped && tokens.size() > 1) {
    dropped = false;
    for (const auto& t : drop_trailing_) {
      if (tokens.back() == t) {
        tokens.pop_back();
        dropped = true;
        break;
      }
    }
  }
  return text::Join(tokens, " ");
}

namespace {

double Agreement(const std::optional<std::string>& a, const std::optional<std::string>& b) {
  if (a.has_value() != b.has_value()) return 0.5;
  if (!a) return 1.0;
  return *a == *b ? 1.0 : 0.0;
}

}  // namespace

double Similarity(const ReferenceFields& a, const ReferenceFields& b,
                  const SourceCanonicalizer& canon) {
  const double author = text::NormalizedLevenshtein(a.author.value_or(""), b.author.value_or(""));
  const double volume = Agreement(a.volume, b.volume);
  const double page = Agreement(a.page, b.page);
  const double source = text::NormalizedLevenshtein(canon.Apply(a.source.value_or("")),
                                                    canon.Apply(b.source.value_or("")));
  if (author == 1.0 && volume == 1.0 && page == 1.0 && source == 1.0) return 1.0;
  const double s = kAuthorWeight * author + kVolumeWeight * volume + kPageWeight * page +
                   kSourceWeight * source;
  return std::clamp(s, 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// Automatic clustering

namespace {

std::size_t FindRoot(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

template <typename ScoreMatrixFn>
std::vector<std::vector<std::string>> ClusterBlock(const VariantIndex& index, const Block& block,
                                                  double threshold, const SourceCanonicalizer& canon,
                                                  ScoreMatrixFn&& score_matrix) {
  const auto& vs = index.variants();
  const std::size_t n = block.variants.size();
  auto scores = score_matrix(n, [&](std::size_t i, std::size_t j) {
    return Similarity(vs[block.variants[i]].fields, vs[block.variants[j]].fields, canon);
  });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (scores[i * n + j] < threshold) continue;
      std::size_t a = FindRoot(parent, i);
      std::size_t b = FindRoot(parent, j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
  }
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < n; ++i) groups[FindRoot(parent, i)].push_back(vs[block.variants[i]].key);
  std::vector<std::vector<std::string>> out;
  for (auto& [root, members] : groups) out.push_back(std::move(members));
  return out;
}

void CheckThreshold(double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "threshold must lie in (0, 1]");
  }
}

AutoSnapshot Finish(std::vector<std::vector<std::vector<std::string>>> per_block, double threshold) {
  AutoSnapshot snap;
  snap.threshold = threshold;
  for (auto& groups : per_block) {
    for (auto& g : groups) snap.groups.push_back(std::move(g));
  }
  std::sort(snap.groups.begin(), snap.groups.end());
  return snap;
}

}  // namespace

AutoSnapshot AutoClusterSerial(const VariantIndex& index, const std::vector<Block>& blocks,
                               double threshold, const SourceCanonicalizer& canon) {
  CheckThreshold(threshold);
  std::vector<std::vector<std::vector<std::string>>> per_block(blocks.size());
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    per_block[b] = ClusterBlock(index, blocks[b], threshold, canon, [](std::size_t n, auto&& f) {
      return kernels::PairwiseScoresSerial(n, f);
    });
  }
  return Finish(std::move(per_block), threshold);
}

AutoSnapshot AutoCluster(const VariantIndex& index, const std::vector<Block>& blocks,
                         double threshold, const SourceCanonicalizer& canon) {
  CheckThreshold(threshold);
  constexpr std::size_t kLargeBlock = 64;
  std::vector<std::vector<std::vector<std::string>>> per_block(blocks.size());
  std::vector<std::size_t> small;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    if (blocks[b].variants.size() < kLargeBlock) {
      small.push_back(b);
      continue;
    }
    // Large blocks parallelize over rows of their score matrix.
    per_block[b] = ClusterBlock(index, blocks[b], threshold, canon, [](std::size_t n, auto&& f) {
      return kernels::PairwiseScoresParallel(n, f);
    });
  }
  const auto ns = static_cast<std::ptrdiff_t>(small.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < ns; ++k) {
    const std::size_t b = small[static_cast<std::size_t>(k)];
    per_block[b] = ClusterBlock(index, blocks[b], threshold, canon, [](std::size_t n, auto&& f) {
      return kernels::PairwiseScoresSerial(n, f);
    });
  }
  return Finish(std::move(per_block), threshold);
}

// ---------------------------------------------------------------------------
// Journal

const char* JournalOpName(JournalOp op) {
  switch (op) {
    case JournalOp::kMerge: return "MERGE";
    case JournalOp::kSplit: return "SPLIT";
    case JournalOp::kEditCanonical: return "EDIT_CANONICAL";
  }
  return "?";
}

nlohmann::ordered_json FieldsToJson(const ReferenceFields& f) {
  nlohmann::ordered_json j;
  auto put = [&](const char* name, const auto& v) {
    if (v) j[name] = *v; else j[name] = nullptr;
  };
  put("author", f.author);
  put("rpy", f.rpy);
  put("volume", f.volume);
  put("page", f.page);
  put("source", f.source);
  return j;
}

ReferenceFields FieldsFromJson(const nlohmann::json& j) {
  ReferenceFields f;
  auto str = [&](const char* name) -> std::optional<std::string> {
    if (!j.contains(name) || j[name].is_null()) return std::nullopt;
    return j[name].get<std::string>();
  };
  f.author = str("author");
  if (j.contains("rpy") && !j["rpy"].is_null()) f.rpy = j["rpy"].get<int>();
  f.volume = str("volume");
  f.page = str("page");
  f.source = str("source");
  return f;
}

nlohmann::ordered_json JournalEntryToJson(const JournalEntry& e) {
  nlohmann::ordered_json j;
  j["rev"] = e.rev;
  j["op"] = JournalOpName(e.op);
  j["targets"] = e.targets;
  if (e.op == JournalOp::kSplit) j["members"] = e.members;
  if (e.op == JournalOp::kEditCanonical && e.canonical) j["canonical"] = FieldsToJson(*e.canonical);
  j["actor"] = e.actor;
  j["ts"] = e.ts;
  return j;
}

JournalEntry JournalEntryFromJson(const nlohmann::json& j) {
  JournalEntry e;
  e.rev = j.at("rev").get<int>();
  const auto op = j.at("op").get<std::string>();
  if (op == "MERGE") {
    e.op = JournalOp::kMerge;
  } else if (op == "SPLIT") {
    e.op = JournalOp::kSplit;
    e.members = j.at("members").get<std::vector<std::string>>();
  } else if (op == "EDIT_CANONICAL") {
    e.op = JournalOp::kEditCanonical;
    e.canonical = FieldsFromJson(j.at("canonical"));
  } else {
    throw Error(ErrorCode::kCorrupt, "unknown journal op '" + op + "'");
  }
  e.targets = j.at("targets").get<std::vector<std::string>>();
  e.actor = j.at("actor").get<std::string>();
  e.ts = j.at("ts").get<std::string>();
  return e;
}

std::string SerializeJournal(const std::vector<JournalEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += JournalEntryToJson(e).dump();
    out.push_back('\n');
  }
  return out;
}

std::vector<JournalEntry> ParseJournal(std::string_view ndjson) {
  std::vector<JournalEntry> out;
  std::size_t lineno = 0;
  auto lines = text::Split(ndjson, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (auto line : lines) {
    ++lineno;
    try {
      out.push_back(JournalEntryFromJson(nlohmann::json::parse(line)));
    } catch (const std::exception& ex) {
      throw Error(ErrorCode::kCorrupt,
                  "journal line " + std::to_string(lineno) + " is corrupted: " + ex.what());
    }
    if (out.back().rev != static_cast<int>(lineno)) {
      throw Error(ErrorCode::kCorrupt, "journal line " + std::to_string(lineno) + " has revision " +
                                           std::to_string(out.back().rev) + ", expected " +
                                           std::to_string(lineno));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cluster state

std::string ClusterId(const std::vector<std::string>& sorted_members, int revision) {
  std::uint64_t h = text::Fnv1a("work-cluster");
  for (const auto& m : sorted_members) {
    h = text::Fnv1a(m, h);
    h = text::Fnv1a("\n", h);
  }
  h = text::Fnv1a("@" + std::to_string(revision), h);
  return "c" + text::Hex64(h);
}

nlohmann::ordered_json ClusterToJson(const WorkCluster& c) {
  nlohmann::ordered_json j;
  j["cluster_id"] = c.id;
  j["canonical"] = FieldsToJson(c.canonical);
  j["reference"] = SerializeFields(c.canonical);
  j["occ_weight"] = c.occ_weight;
  j["doc_weight"] = c.doc_weight;
  j["members"] = c.members;
  auto prov = nlohmann::ordered_json::array();
  for (const auto& p : c.provenance) {
    prov.push_back({{"kind", p.kind == ProvenanceKind::kAuto ? "AUTO" : "ANALYST"},
                    {"revision", p.revision},
                    {"ts", p.ts}});
  }
  j["provenance"] = prov;
  return j;
}

ClusterState::ClusterState(std::shared_ptr<const VariantIndex> index, AutoSnapshot snapshot)
    : index_(std::move(index)), snapshot_(std::move(snapshot)) {
  for (const auto& group : snapshot_.groups) {
    std::vector<std::string> members = group;
    std::sort(members.begin(), members.end());
    WorkCluster c = MakeCluster(std::move(members), 0);
    c.provenance.push_back({ProvenanceKind::kAuto, 0, snapshot_.created});
    Insert(std::move(c));
  }
  CheckInvariants();
}

ClusterState ClusterState::Replay(std::shared_ptr<const VariantIndex> index, AutoSnapshot snapshot,
                                  const std::vector<JournalEntry>& journal) {
  ClusterState state(std::move(index), std::move(snapshot));
  for (const auto& e : journal) state.Apply(e);
  return state;
}

WorkCluster ClusterState::MakeCluster(std::vector<std::string> members, int revision) const {
  WorkCluster c;
  c.members = std::move(members);
  c.id = ClusterId(c.members, revision);
  std::set<std::string_view> owners;
  const Variant* best = nullptr;
  for (const auto& key : c.members) {
    const Variant* v = index_->Find(key);
    if (!v) throw Error(ErrorCode::kCorrupt, "cluster member '" + key + "' is not a known variant");
    c.occ_weight += v->occurrences;
    owners.insert(v->owners.begin(), v->owners.end());
    // Members are sorted, so the first maximum wins lexicographic ties.
    if (!best || v->occurrences > best->occurrences) best = v;
  }
  c.doc_weight = owners.size();
  if (best) c.canonical = best->fields;
  return c;
}

void ClusterState::Insert(WorkCluster c) {
  for (const auto& m : c.members) {
    auto [it, fresh] = owner_.emplace(m, c.id);
    if (!fresh) throw Error(ErrorCode::kCorrupt, "variant '" + m + "' assigned to two clusters");
  }
  const std::string id = c.id;
  if (!clusters_.emplace(id, std::move(c)).second) {
    throw Error(ErrorCode::kCorrupt, "duplicate cluster id " + id);
  }
}

void ClusterState::Erase(const std::string& id) {
  auto it = clusters_.find(id);
  for (const auto& m : it->second.members) owner_.erase(m);
  clusters_.erase(it);
}

const WorkCluster* ClusterState::Find(const std::string& id) const {
  auto it = clusters_.find(id);
  return it == clusters_.end() ? nullptr : &it->second;
}

const WorkCluster& ClusterState::cluster(const std::string& id) const {
  const WorkCluster* c = Find(id);
  if (!c) throw Error(ErrorCode::kUnknownCluster, "unknown cluster id " + id);
  return *c;
}

const std::string& ClusterState::ClusterOf(std::string_view variant_key) const {
  auto it = owner_.find(std::string(variant_key));
  if (it == owner_.end()) {
    throw Error(ErrorCode::kInvalidArgument, "unknown variant '" + std::string(variant_key) + "'");
  }
  return it->second;
}

int ClusterState::Merge(const std::vector<std::string>& ids, const std::string& actor,
                        const std::string& ts) {
  JournalEntry e;
  e.rev = revision_ + 1;
  e.op = JournalOp::kMerge;
  e.targets = ids;
  e.actor = actor;
  e.ts = ts;
  Apply(e);
  return revision_;
}

int ClusterState::Split(const std::string& id, const std::vector<std::string>& members,
                        const std::string& actor, const std::string& ts) {
  JournalEntry e;
  e.rev = revision_ + 1;
  e.op = JournalOp::kSplit;
  e.targets = {id};
  e.members = members;
  std::sort(e.members.begin(), e.members.end());
  e.actor = actor;
  e.ts = ts;
  Apply(e);
  return revision_;
}

int ClusterState::EditCanonical(const std::string& id, const ReferenceFields& canonical,
                                const std::string& actor, const std::string& ts) {
  JournalEntry e;
  e.rev = revision_ + 1;
  e.op = JournalOp::kEditCanonical;
  e.targets = {id};
  e.canonical = canonical;
  e.actor = actor;
  e.ts = ts;
  Apply(e);
  return revision_;
}

void ClusterState::Apply(const JournalEntry& e) {
  if (e.rev != revision_ + 1) {
    throw Error(ErrorCode::kRevisionConflict, "journal entry revision " + std::to_string(e.rev) +
                                                  " does not follow " + std::to_string(revision_));
  }
  for (const auto& id : e.targets) cluster(id);
  const ProvenanceTag tag{ProvenanceKind::kAnalyst, e.rev, e.ts};

  switch (e.op) {
    case JournalOp::kMerge: {
      if (e.targets.size() < 2) {
        throw Error(ErrorCode::kInvalidArgument, "merge needs at least two distinct clusters");
      }
      std::set<std::string> distinct(e.targets.begin(), e.targets.end());
      if (distinct.size() != e.targets.size()) {
        throw Error(ErrorCode::kInvalidArgument, "cannot merge a cluster with itself");
      }
      std::vector<std::string> members;
      std::vector<ProvenanceTag> prov;
      for (const auto& id : e.targets) {
        const WorkCluster& c = clusters_.at(id);
        members.insert(members.end(), c.members.begin(), c.members.end());
        prov.insert(prov.end(), c.provenance.begin(), c.provenance.end());
      }
      std::sort(members.begin(), members.end());
      std::stable_sort(prov.begin(), prov.end(),
                       [](const auto& a, const auto& b) { return a.revision < b.revision; });
      prov.push_back(tag);
      WorkCluster merged = MakeCluster(std::move(members), e.rev);
      merged.provenance = std::move(prov);
      for (const auto& id : e.targets) Erase(id);
      Insert(std::move(merged));
      break;
    }
    case JournalOp::kSplit: {
      if (e.targets.size() != 1) {
        throw Error(ErrorCode::kInvalidArgument, "split takes exactly one cluster");
      }
      const WorkCluster& c = clusters_.at(e.targets.front());
      if (c.members.size() < 2) {
        throw Error(ErrorCode::kInvalidArgument, "cannot split a singleton cluster");
      }
      std::set<std::string> moved(e.members.begin(), e.members.end());
      if (moved.empty() || moved.size() != e.members.size() || moved.size() >= c.members.size()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "split members must be a proper, non-empty subset without repeats");
      }
      std::vector<std::string> out_part;
      std::vector<std::string> keep_part;
      for (const auto& m : c.members) (moved.count(m) ? out_part : keep_part).push_back(m);
      if (out_part.size() != moved.size()) {
        throw Error(ErrorCode::kInvalidArgument, "split member not in cluster " + c.id);
      }
      auto prov = c.provenance;
      prov.push_back(tag);
      WorkCluster a = MakeCluster(std::move(keep_part), e.rev);
      WorkCluster b = MakeCluster(std::move(out_part), e.rev);
      a.provenance = prov;
      b.provenance = prov;
      Erase(e.targets.front());
      Insert(std::move(a));
      Insert(std::move(b));
      break;
    }
    case JournalOp::kEditCanonical: {
      if (e.targets.size() != 1 || !e.canonical) {
        throw Error(ErrorCode::kInvalidArgument, "edit needs one cluster and canonical fields");
      }
      WorkCluster& c = clusters_.at(e.targets.front());
      c.canonical = *e.canonical;
      c.provenance.push_back(tag);
      break;
    }
  }
  journal_.push_back(e);
  revision_ = e.rev;
}

void ClusterState::CheckInvariants() const {
  const auto& vs = index_->variants();
  if (owner_.size() != vs.size()) {
    throw Error(ErrorCode::kCorrupt, "clusters cover " + std::to_string(owner_.size()) + " of " +
                                         std::to_string(vs.size()) + " variants");
  }
  std::size_t occ = 0;
  std::size_t total = 0;
  for (const auto& [id, c] : clusters_) occ += c.occ_weight;
  for (const auto& v : vs) total += v.occurrences;
  if (occ != total) throw Error(ErrorCode::kCorrupt, "cluster weights do not sum to corpus total");
}

std::string ClustersCsv(const ClusterState& state) {
  std::vector<const WorkCluster*> order;
  for (const auto& [id, c] : state.clusters()) order.push_back(&c);
  std::stable_sort(order.begin(), order.end(), [](const WorkCluster* a, const WorkCluster* b) {
    return a->occ_weight > b->occ_weight;
  });
  std::string out = "cluster_id,canonical_author,rpy,volume,page,source,occ_weight,doc_weight,n_members\n";
  for (const WorkCluster* c : order) {
    const auto& f = c->canonical;
    out += csv::FormatRow({c->id, f.author.value_or(""), f.rpy ? std::to_string(*f.rpy) : "",
                           f.volume.value_or(""), f.page.value_or(""), f.source.value_or(""),
                           std::to_string(c->occ_weight), std::to_string(c->doc_weight),
                           std::to_string(c->members.size())});
  }
  return out;
}

}  // namespace refspect
