#pragma once

#include <cstdint>
#include <random>

namespace riskbandit {

// SplitMix64 finalizer; bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Seed for the (trial, stream) substream of a base seed. Streams are arm
// indices for environments; policies use kPolicyStream.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial,
                                    std::uint64_t stream) noexcept {
    std::uint64_t h = mix64(base);
    h = mix64(h ^ (trial * 0xD1B54A32D192ED03ULL));
    return mix64(h ^ (stream * 0xABC98388FB8FAC03ULL));
}

inline constexpr std::uint64_t kPolicyStream = 0xFFFF'FFFF'0000'0001ULL;

// Seedable random stream. Owned by exactly one trial; never shared.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    static RngStream substream(std::uint64_t base, std::uint64_t trial, std::uint64_t stream) {
        return RngStream(derive_seed(base, trial, stream));
    }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal(double mean, double stddev) { return mean + stddev * std_normal_(engine_); }

    // Gamma with the given shape and rate (mean shape / rate).
    double gamma(double shape, double rate) {
        using Param = std::gamma_distribution<double>::param_type;
        return gamma_(engine_, Param(shape, 1.0 / rate));
    }

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> std_normal_{0.0, 1.0};
    std::gamma_distribution<double> gamma_{};
};

}  // namespace riskbandit
