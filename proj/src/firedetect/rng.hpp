#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace firedetect {

// splitmix64 finalizer, used to derive independent stream seeds from a run seed.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) noexcept {
    return mix_seed(parent ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

// Portable random stream: mt19937_64 is fully specified by the standard, the
// real-valued conversions below are ours so results match across stdlibs.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    // [0, 1)
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    // (lo, hi]; never returns lo unless lo == hi
    double uniform_upper(double lo, double hi) { return hi - uniform01() * (hi - lo); }

    // [-1, 1]
    double symmetric() { return 2.0 * uniform01() - 1.0; }

    // [-1, 1) with 32-bit resolution, two draws per engine output; enough
    // for error envelopes and twice as cheap
    double symmetric32() {
        if (!has_half_) {
            half_word_ = engine_();
            has_half_ = true;
            return static_cast<double>(static_cast<std::uint32_t>(half_word_)) * 0x1.0p-31 - 1.0;
        }
        has_half_ = false;
        return static_cast<double>(static_cast<std::uint32_t>(half_word_ >> 32)) * 0x1.0p-31 - 1.0;
    }

    double standard_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    std::uint64_t below(std::uint64_t n) {
        // rejection sampling keeps the draw unbiased
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return x % n;
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
    std::uint64_t half_word_ = 0;
    bool has_half_ = false;
};

} // namespace firedetect
