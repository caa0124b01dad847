#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace pmab {

enum class NoiseKind { gaussian, uniform_bounded };

inline std::string_view to_string(NoiseKind kind) {
    return kind == NoiseKind::gaussian ? "gaussian" : "uniform-bounded";
}

inline NoiseKind noise_kind_from_string(std::string_view s) {
    if (s == "gaussian") return NoiseKind::gaussian;
    if (s == "uniform-bounded" || s == "uniform_bounded" || s == "uniform") return NoiseKind::uniform_bounded;
    throw std::invalid_argument("unknown noise kind: " + std::string(s));
}

// Zero-mean sub-Gaussian noise. Gaussian has standard deviation sigma;
// uniform-bounded is uniform on [-sigma, sigma], for which sigma is a valid
// sub-Gaussian parameter.
struct NoiseModel {
    NoiseKind kind = NoiseKind::gaussian;
    double sigma = 1.0;

    void validate() const {
        if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
            throw std::invalid_argument("NoiseModel: sigma must be finite and >= 0");
        }
    }
};

// splitmix64 finalizer; also used as a tiny counter-based engine.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class SplitMix64 {
public:
    using result_type = std::uint64_t;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t out = mix64(state_);
        state_ += 0x9e3779b97f4a7c15ULL;
        return out;
    }

private:
    std::uint64_t state_;
};

// Noise keyed by (seed, epoch): epsilon_t does not depend on which arm is
// pulled or on how many draws happened before, so two policies facing the
// same instance and seed see the same epsilon sequence.
class NoiseStream {
public:
    explicit NoiseStream(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    double draw(std::int64_t epoch, const NoiseModel& model) const {
        if (model.sigma == 0.0) {
            return 0.0;
        }
        SplitMix64 engine(mix64(seed_ ^ mix64(static_cast<std::uint64_t>(epoch))));
        if (model.kind == NoiseKind::gaussian) {
            std::normal_distribution<double> dist(0.0, model.sigma);
            return dist(engine);
        }
        std::uniform_real_distribution<double> dist(-model.sigma, model.sigma);
        return dist(engine);
    }

private:
    std::uint64_t seed_;
};

}  // namespace pmab
