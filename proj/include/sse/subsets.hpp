#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sse {

/// Ordered list of 0-based sensor indices.
using SensorSet = std::vector<int>;

/// All size-`k` subsets of `pool`, in lexicographic order of positions.
std::vector<SensorSet> combinations(const SensorSet& pool, int k);

/// All size-`k` subsets of {0, ..., n-1}, lexicographic.
std::vector<SensorSet> combinations(int n, int k);

/// n choose k (exact for the desk-scale sizes used here).
std::uint64_t binomial(int n, int k);

/// {0, ..., p-1} minus `removed`.
SensorSet complement(int p, const SensorSet& removed);

/// "0;2;3" (empty set -> "").
std::string format_set(const SensorSet& set);

}  // namespace sse
