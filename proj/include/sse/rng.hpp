#pragma once

#include <cstdint>
#include <random>

namespace sse {

/// splitmix64 finalizer; used to turn (seed, counter) pairs into independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed for stream `stream` of a run seeded with `seed`. Distinct streams never
/// share state, so adding sensors or reordering work leaves other streams untouched.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Stream ids used by simulate(): process noise, one per sensor, adversary.
namespace stream {
inline constexpr std::uint64_t process = 0;
inline constexpr std::uint64_t adversary = 1;
inline constexpr std::uint64_t initial_state = 2;
inline constexpr std::uint64_t sensor_base = 16;
inline constexpr std::uint64_t sensor(int j) { return sensor_base + static_cast<std::uint64_t>(j); }
}  // namespace stream

/// One reproducible standard-normal source.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

    double next() { return dist_(engine_); }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> dist_{0.0, 1.0};
};

}  // namespace sse
