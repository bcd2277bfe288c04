#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace spikedim {

enum class Dist { Gaussian, Uniform, StudentT };

Dist dist_from_string(std::string_view s);
const char* dist_to_string(Dist d);

// Deterministic random source. The distribution transforms are implemented
// here rather than taken from <random> because the standard leaves
// normal_distribution's sequence implementation-defined; identical output
// across toolchains is a shipping requirement (manifests re-run bitwise).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform on [0,1) with 53-bit resolution
    double uniform01();

    // standard normal, Box-Muller (second value cached)
    double normal();

    // zero mean, unit variance draws
    double sample(Dist d);

    std::uint64_t raw() { return gen_(); }

private:
    std::mt19937_64 gen_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Substream derivation: hash (master seed, stream name, index) into a fresh
// seed. Workers pulling named substreams see the same values regardless of
// scheduling, which keeps parallel sections reproducible.
std::uint64_t substream(std::uint64_t master, std::string_view name,
                        std::uint64_t index);

} // namespace spikedim
