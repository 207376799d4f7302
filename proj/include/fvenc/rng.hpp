#pragma once

#include <cmath>
#include <cstdint>

namespace fvenc {

// splitmix64 stream. Chosen over std::mt19937 because its output is fully
// specified here, so seeded runs replay bit-exactly on any platform.
// Algorithm identifier used in serialized metadata: "splitmix64-boxmuller".
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // modulo bias is negligible for n << 2^64 and keeps the draw count fixed
        return next_u64() % n;
    }

    // standard normal via Box-Muller; second value of each pair is cached
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    static constexpr const char* kAlgorithm = "splitmix64-boxmuller";

  private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Deterministic substream derivation: one master seed fans out into
// independent streams keyed by index (stage id, chunk id, epoch, ...).
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    Rng g(seed ^ (0xA3EC647659359ACDULL * (stream + 1)));
    return g.next_u64();
}

}  // namespace fvenc
