#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hints/core.hpp"

namespace hints {

// Generator settings. Text form is one "key = value" per line, '#' comments;
// entity_types is a comma-separated list.
struct SynthConfig {
  std::size_t vocab_size = 3000;
  std::vector<std::string> entity_types{"PER", "ORG", "LOC", "MISC"};
  double mean_len = 15;
  std::size_t max_len = 40;
  double np_rate = 0.45;            // chance a new chunk is an NP
  double nnp_in_np_rate = 0.85;     // chance an entity token is tagged NNP
  double entity_in_np_rate = 0.35;  // chance an NP contains an entity
  double emission_concentration = 1.0;  // Zipf exponent of word distributions
  double exception_rate = 0.005;    // chance a token outside NPs is an NNP
  std::uint64_t seed = 7;

  void validate() const;
  static SynthConfig parse(std::string_view text);
  std::string to_text() const;
};

// Joint (sentence, y1, y2) triples; every one satisfies the full constraint.
// Role is Test (both labelings present). Ids are "g1", "g2", ...
Corpus generate(const SynthConfig& config, std::size_t n_sentences);

struct SplitSizes {
  std::size_t d1 = 0;
  std::size_t d2 = 0;
  std::size_t unlab = 0;
  std::size_t test = 0;
  std::size_t dev = 0;
};

enum class UnlabMode { OneSided, TwoSided };  // keep y1 / keep nothing

struct Splits {
  Corpus d1;     // y1 only
  Corpus d2;     // y2 only
  Corpus unlab;  // y1 only (one-sided) or bare
  Corpus test;   // both
  Corpus dev;    // both; may be empty
};

// Disjoint seeded partition (Fisher-Yates over example indices).
Splits split(const Corpus& corpus, const SplitSizes& sizes, std::uint64_t seed, UnlabMode mode);

}  // namespace hints
