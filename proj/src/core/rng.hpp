#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace addunet {

// Stateless 64-bit mixer (splitmix64 finalizer). Used to derive independent
// sub-seeds from (run_seed, stream tag, counter...) tuples so every noise
// field and batch draw is a pure function of its coordinates.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x8000000000000001ULL;
    for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p));
    return h;
}

// Deterministic RNG: the engine is the standard-specified mt19937_64; the
// real-valued transforms (uniform, Box-Muller gaussian) are written out here
// instead of using std distributions, whose output is implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1), 53-bit resolution
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // modulo reduction; bias is negligible for n << 2^64
    std::uint64_t below(std::uint64_t n) { return eng_() % n; }

    // standard normal via Box-Muller; generates pairs, caches the second
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform(); // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * M_PI * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace addunet
