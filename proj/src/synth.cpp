#include "refspect/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace refspect {

namespace {

// splitmix64: small, portable, and identical on every platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t Next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  std::size_t Below(std::size_t n) { return static_cast<std::size_t>(Next() % n); }
  int Between(int lo, int hi) { return lo + static_cast<int>(Below(static_cast<std::size_t>(hi - lo + 1))); }
  double Unit() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

constexpr const char* kSurnames[] = {
    "NOVOSELOV", "GEIM", "CASTRO", "NETO", "LEE", "WANG", "ZHANG", "LI", "CHEN", "LIU",
    "KIM", "PARK", "SMITH", "JONES", "MULLER", "SCHMIDT", "TANAKA", "SATO", "ROSSI", "BONACCORSO",
    "FERRARI", "BLAKE", "HUMMERS", "WALLACE", "SLONCZEWSKI", "DRESSELHAUS", "KATSNELSON", "BERGER",
    "RUOFF", "STANKOVICH"};
constexpr const char* kInitials[] = {"A", "B", "C", "D", "E", "F", "G", "H", "J", "K", "L", "M", "N",
                                     "P", "R", "S", "T", "W", "X", "Y"};
constexpr const char* kSources[] = {
    "NATURE", "SCIENCE", "PHYS REV LETT", "PHYS REV B", "NANO LETT", "ACS NANO", "J AM CHEM SOC",
    "ADV MATER", "CARBON", "APPL PHYS LETT", "NAT MATER", "NAT NANOTECHNOL", "REV MOD PHYS",
    "J PHYS CHEM C", "CHEM MATER", "ANGEW CHEM INT EDIT", "SOLID STATE COMMUN", "PHILOS MAG"};
constexpr const char* kJournals[] = {"CARBON", "NANO LETTERS", "ACS NANO", "PHYSICAL REVIEW B",
                                     "JOURNAL OF PHYSICAL CHEMISTRY C", "ADVANCED MATERIALS",
                                     "APPLIED PHYSICS LETTERS", "NANOSCALE"};

template <std::size_t N>
const char* Pick(Rng& rng, const char* const (&pool)[N]) {
  return pool[rng.Below(N)];
}

std::string RandomReference(Rng& rng, int year) {
  std::string author = Pick(rng, kSurnames);
  author += " ";
  author += Pick(rng, kInitials);
  if (rng.Below(2) == 0) {
    author += " ";
    author += Pick(rng, kInitials);
  }
  return author + ", " + std::to_string(year) + ", V" + std::to_string(rng.Between(1, 200)) + ", P" +
         std::to_string(rng.Between(1, 3000)) + ", " + Pick(rng, kSources);
}

int ContinuumYear(Rng& rng, int pub_year) {
  if (rng.Below(100) < 3) {
    // Sparse older literature, kept clear of the injected work's neighbourhood.
    int y = rng.Between(1800, 1945);
    if (y >= 1890 && y <= 1906) y += 20;
    return y;
  }
  const double lag = -std::log(1.0 - rng.Unit()) * 7.0;
  return std::max(1950, pub_year - static_cast<int>(lag));
}

}  // namespace

SynthCorpus GenerateSyntheticCorpus(const SynthOptions& options) {
  Rng rng(options.seed);
  SynthCorpus out;
  out.historical_year = 1898;
  // Occurrence counts per variant sum to 40. Two variants misspell the
  // surname, so they land in different blocks from the rest.
  out.historical_variants = {
      {"STAUDENMAIER L, 1898, V31, P1481, BER DTSCH CHEM GES", 18},
      {"STAUDENMAIER L, 1898, V31, P1481, BER DEUT CHEM GES", 6},
      {"STAUDENMAIER L, 1898, V31, P1481, BERICHTE DEUTSCHEN", 3},
      {"STAUDENMAIER L, 1898, V31, P1481, CHEM BER", 2},
      {"STAUDENMAIER L, 1898, V31, P1487, BER DTSCH CHEM GES", 2},
      {"STAUDENMAIER L, 1898, V32, P1481, BER DTSCH CHEM GES", 1},
      {"STAUDENMAIER L, 1898, P1481, BER DTSCH CHEM GES", 1},
      {"STAUDENMAIER L, 1898, V31, BER DTSCH CHEM GES", 1},
      {"STAUDENMAIE L, 1898, V31, P1481, BER DTSCH CHEM GES", 2},
      {"STAUDENMEIER L, 1898, V31, P1481, BER DTSCH CHEM GES", 2},
      {"STAUDENMAIER, 1898, V31, P1481, BER DTSCH CHEM GES", 1},
      {"STAUDENMAIER L, 1898, V31, P1481, BERICHTE", 1},
  };
  for (const auto& v : out.historical_variants) out.historical_occurrences += v.occurrences;

  std::vector<std::vector<std::string>> refs(options.records);
  std::vector<int> years(options.records);
  for (std::size_t i = 0; i < options.records; ++i) {
    years[i] = rng.Between(options.first_pub_year, options.last_pub_year);
    const int n = rng.Between(10, 30);
    for (int k = 0; k < n; ++k) refs[i].push_back(RandomReference(rng, ContinuumYear(rng, years[i])));
  }

  std::vector<std::size_t> order(options.records);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.Below(i)]);
  std::size_t next = 0;
  for (const auto& v : out.historical_variants) {
    for (std::size_t k = 0; k < v.occurrences; ++k) {
      auto& list = refs[order[next++ % order.size()]];
      list.insert(list.begin() + static_cast<std::ptrdiff_t>(rng.Below(list.size() + 1)), v.reference);
    }
  }

  std::string& w = out.wos_text;
  w = "FN Synthetic Export\nVR 1.0\n";
  for (std::size_t i = 0; i < options.records; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "SYN:%06zu", i + 1);
    w += "PT J\n";
    w += "TI Synthetic graphene study " + std::to_string(i + 1) + "\n";
    w += std::string("SO ") + Pick(rng, kJournals) + "\n";
    w += "PY " + std::to_string(years[i]) + "\n";
    for (std::size_t k = 0; k < refs[i].size(); ++k) w += (k == 0 ? "CR " : "   ") + refs[i][k] + "\n";
    w += std::string("UT ") + id + "\n";
    w += "ER\n\n";
  }
  w += "EF\n";
  return out;
}

}  // namespace refspect
