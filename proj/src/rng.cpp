#include "rng.hpp"

#include <cmath>

#include "errors.hpp"

namespace spikedim {

Dist dist_from_string(std::string_view s) {
    if (s == "gaussian") return Dist::Gaussian;
    if (s == "uniform") return Dist::Uniform;
    if (s == "t") return Dist::StudentT;
    throw ConfigError("unknown distribution '" + std::string(s) +
                      "' (expected gaussian, uniform or t)");
}

const char* dist_to_string(Dist d) {
    switch (d) {
        case Dist::Gaussian: return "gaussian";
        case Dist::Uniform: return "uniform";
        case Dist::StudentT: return "t";
    }
    return "?";
}

double Rng::uniform01() {
    return std::ldexp(static_cast<double>(gen_() >> 11), -53);
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

double Rng::sample(Dist d) {
    switch (d) {
        case Dist::Gaussian:
            return normal();
        case Dist::Uniform:
            // +-sqrt(3) has unit variance
            return (2.0 * uniform01() - 1.0) * 1.7320508075688772935;
        case Dist::StudentT: {
            // t with 5 dof (smallest with finite fourth moment),
            // rescaled by sqrt(3/5) to unit variance
            const double z = normal();
            double s = 0.0;
            for (int i = 0; i < 5; ++i) {
                const double v = normal();
                s += v * v;
            }
            const double t = z / std::sqrt(s / 5.0);
            return t * 0.7745966692414833770;  // sqrt(3/5)
        }
    }
    return 0.0;
}

std::uint64_t substream(std::uint64_t master, std::string_view name,
                        std::uint64_t index) {
    // FNV-1a over the name, then two splitmix64 finalization rounds
    std::uint64_t h = 1469598103934665603ULL ^ master;
    for (const char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    h += 0x9e3779b97f4a7c15ULL * (index + 1);
    for (int round = 0; round < 2; ++round) {
        h ^= h >> 30;
        h *= 0xbf58476d1ce4e5b9ULL;
        h ^= h >> 27;
        h *= 0x94d049bb133111ebULL;
        h ^= h >> 31;
    }
    return h;
}

} // namespace spikedim
