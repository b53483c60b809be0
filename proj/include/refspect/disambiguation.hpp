#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "refspect/ingest.hpp"

namespace refspect {

/// A distinct reference string (after normalization) with its corpus weight.
struct Variant {
  std::string key;
  ReferenceFields fields;
  std::size_t occurrences = 0;
  std::vector<std::string> owners;  // sorted, unique citing record ids

  std::size_t documents() const { return owners.size(); }
};

class VariantIndex {
 public:
  static VariantIndex Build(const std::vector<CitedReference>& refs);

  // Sorted by key.
  const std::vector<Variant>& variants() const { return variants_; }
  const Variant* Find(std::string_view key) const;
  std::size_t IndexOf(std::string_view key) const;  // npos when absent

 private:
  std::vector<Variant> variants_;
  std::unordered_map<std::string, std::size_t> by_key_;
};

struct BlockKey {
  std::string surname;       // empty for residual blocks
  std::optional<int> rpy;
  bool residual = false;     // reference lacked an author or a year

  auto operator<=>(const BlockKey&) const = default;
  std::string ToString() const;
};

struct Block {
  BlockKey key;
  std::vector<std::size_t> variants;  // indices into VariantIndex, ascending
};

BlockKey BlockKeyFor(const ReferenceFields& fields);

// Partitions variants by (first author token, year); variants missing either
// go to a residual block per year.
std::vector<Block> BuildBlocks(const VariantIndex& index);

/// Token-level rewrite rules for journal/source strings.
///
/// File syntax, one directive per line, '#' starts a comment:
///   replace FROM TO       rewrite token FROM as TO
///   drop-trailing TOKEN   remove TOKEN when it ends the string (repeatedly)
class SourceCanonicalizer {
 public:
  static SourceCanonicalizer Parse(std::string_view rules);
  static SourceCanonicalizer LoadFile(const std::string& path);
  // Rules shipped in data/source_canon.txt, embedded at build time.
  static const SourceCanonicalizer& Default();

  std::string Apply(std::string_view source) const;

 private:
  std::map<std::string, std::string> replace_;
  std::vector<std::string> drop_trailing_;
};

inline constexpr double kAuthorWeight = 0.35;
inline constexpr double kVolumeWeight = 0.25;
inline constexpr double kPageWeight = 0.20;
inline constexpr double kSourceWeight = 0.20;

// Weighted field agreement in [0, 1]; symmetric, and exactly 1 for equal fields.
double Similarity(const ReferenceFields& a, const ReferenceFields& b,
                  const SourceCanonicalizer& canon = SourceCanonicalizer::Default());

/// Output of the automatic pass: disjoint member groups, one per cluster.
struct AutoSnapshot {
  double threshold = 0.75;
  std::string created;
  std::vector<std::vector<std::string>> groups;  // each sorted; groups sorted by first key

  bool operator==(const AutoSnapshot&) const = default;
};

// Single-linkage agglomeration inside each block: variants linked when
// similarity >= threshold, clusters are the connected components.
AutoSnapshot AutoClusterSerial(const VariantIndex& index, const std::vector<Block>& blocks,
                               double threshold,
                               const SourceCanonicalizer& canon = SourceCanonicalizer::Default());
AutoSnapshot AutoCluster(const VariantIndex& index, const std::vector<Block>& blocks,
                         double threshold,
                         const SourceCanonicalizer& canon = SourceCanonicalizer::Default());

enum class JournalOp { kMerge, kSplit, kEditCanonical };

const char* JournalOpName(JournalOp op);

struct JournalEntry {
  int rev = 0;
  JournalOp op = JournalOp::kMerge;
  std::vector<std::string> targets;   // cluster ids
  std::vector<std::string> members;   // SPLIT: variant keys moved out
  std::optional<ReferenceFields> canonical;  // EDIT_CANONICAL payload
  std::string actor;
  std::string ts;

  bool operator==(const JournalEntry&) const = default;
};

nlohmann::ordered_json JournalEntryToJson(const JournalEntry& e);
JournalEntry JournalEntryFromJson(const nlohmann::json& j);

std::string SerializeJournal(const std::vector<JournalEntry>& entries);
// Throws kCorrupt naming the offending line.
std::vector<JournalEntry> ParseJournal(std::string_view ndjson);

enum class ProvenanceKind { kAuto, kAnalyst };

struct ProvenanceTag {
  ProvenanceKind kind = ProvenanceKind::kAuto;
  int revision = 0;
  std::string ts;

  bool operator==(const ProvenanceTag&) const = default;
};

/// A canonical historical work and the reference variants resolved to it.
struct WorkCluster {
  std::string id;
  ReferenceFields canonical;
  std::vector<std::string> members;  // sorted variant keys
  std::size_t occ_weight = 0;
  std::size_t doc_weight = 0;
  std::vector<ProvenanceTag> provenance;

  bool operator==(const WorkCluster&) const = default;
};

nlohmann::ordered_json FieldsToJson(const ReferenceFields& f);
ReferenceFields FieldsFromJson(const nlohmann::json& j);
nlohmann::ordered_json ClusterToJson(const WorkCluster& c);

// Content address: sorted member keys plus the revision at creation.
std::string ClusterId(const std::vector<std::string>& sorted_members, int revision);

/// Current clustering: the automatic snapshot with the analyst journal
/// replayed on top. Revisions count journal entries.
class ClusterState {
 public:
  ClusterState(std::shared_ptr<const VariantIndex> index, AutoSnapshot snapshot);

  static ClusterState Replay(std::shared_ptr<const VariantIndex> index, AutoSnapshot snapshot,
                             const std::vector<JournalEntry>& journal);

  int revision() const { return revision_; }
  const AutoSnapshot& snapshot() const { return snapshot_; }
  const std::vector<JournalEntry>& journal() const { return journal_; }
  const VariantIndex& index() const { return *index_; }
  const std::map<std::string, WorkCluster>& clusters() const { return clusters_; }

  const WorkCluster& cluster(const std::string& id) const;  // throws kUnknownCluster
  const WorkCluster* Find(const std::string& id) const;
  const std::string& ClusterOf(std::string_view variant_key) const;

  int Merge(const std::vector<std::string>& ids, const std::string& actor, const std::string& ts);
  int Split(const std::string& id, const std::vector<std::string>& members,
            const std::string& actor, const std::string& ts);
  int EditCanonical(const std::string& id, const ReferenceFields& canonical,
                    const std::string& actor, const std::string& ts);

  // Applies one journal entry; entry.rev must be revision() + 1.
  void Apply(const JournalEntry& entry);

  // Throws kCorrupt when membership is not a partition of the index.
  void CheckInvariants() const;

 private:
  WorkCluster MakeCluster(std::vector<std::string> members, int revision) const;
  void Insert(WorkCluster c);
  void Erase(const std::string& id);

  std::shared_ptr<const VariantIndex> index_;
  AutoSnapshot snapshot_;
  std::vector<JournalEntry> journal_;
  int revision_ = 0;
  std::map<std::string, WorkCluster> clusters_;
  std::unordered_map<std::string, std::string> owner_;  // variant key -> cluster id
};

// Header cluster_id,canonical_author,rpy,volume,page,source,occ_weight,doc_weight,n_members;
// rows ordered by occ_weight descending, then id.
std::string ClustersCsv(const ClusterState& state);

}  // namespace refspect
