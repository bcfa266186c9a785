#include "sse/subsets.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sse {

std::vector<SensorSet> combinations(const SensorSet& pool, int k) {
    const int n = static_cast<int>(pool.size());
    std::vector<SensorSet> out;
    if (k < 0 || k > n) return out;

    std::vector<int> pos(k);
    std::iota(pos.begin(), pos.end(), 0);
    while (true) {
        SensorSet pick(k);
        for (int i = 0; i < k; ++i) pick[i] = pool[pos[i]];
        out.push_back(std::move(pick));

        int i = k - 1;
        while (i >= 0 && pos[i] == n - k + i) --i;
        if (i < 0) break;
        ++pos[i];
        for (int j = i + 1; j < k; ++j) pos[j] = pos[j - 1] + 1;
    }
    return out;
}

std::vector<SensorSet> combinations(int n, int k) {
    SensorSet pool(std::max(n, 0));
    std::iota(pool.begin(), pool.end(), 0);
    return combinations(pool, k);
}

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

SensorSet complement(int p, const SensorSet& removed) {
    SensorSet out;
    for (int d = 0; d < p; ++d)
        if (std::find(removed.begin(), removed.end(), d) == removed.end()) out.push_back(d);
    return out;
}

std::string format_set(const SensorSet& set) {
    std::string s;
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (i) s += ';';
        s += std::to_string(set[i]);
    }
    return s;
}

}  // namespace sse
