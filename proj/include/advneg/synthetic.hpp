#pragma once

#include <cstdint>

#include "advneg/corpus.hpp"

namespace advneg {

struct SyntheticOptions {
  std::size_t records = 100;
  std::uint64_t seed = 0;
  Split split = Split::train;
  // Share of records that carry the 5 human-style adversarial negatives.
  double adversarial_share = 1.0;
};

// Topic-clustered dialogue corpus for offline runs: contexts, positives and
// human-style adversarial negatives all draw from one topic's keyword bank,
// so positives overlap their context strongly, random pool picks mostly do
// not, and retrieval-based negatives land in between.
Corpus make_synthetic_corpus(const SyntheticOptions& options);

}  // namespace advneg
