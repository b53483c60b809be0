#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace refspect {

struct SynthOptions {
  std::size_t records = 500;
  int first_pub_year = 2004;
  int last_pub_year = 2013;
  std::uint64_t seed = 1898;
};

struct InjectedVariant {
  std::string reference;
  std::size_t occurrences = 0;
};

struct SynthCorpus {
  std::string wos_text;  // wos-tagged export
  int historical_year = 1898;
  std::vector<InjectedVariant> historical_variants;
  std::size_t historical_occurrences = 0;
};

// Synthetic citing corpus: references follow a recent-literature continuum,
// with one historical work injected under misspelled variants. Deterministic
// for a given seed.
SynthCorpus GenerateSyntheticCorpus(const SynthOptions& options = {});

}  // namespace refspect
