#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pmab/environment.hpp"

namespace pmab {

// What a policy may know before play starts. true_periods is only read by
// policies that are entitled to it (oracle, seq_elim, per_phase_ucb).
struct PolicyContext {
    std::size_t num_arms = 0;
    Epoch horizon = 0;
    double sigma = 0.0;
    std::vector<std::int64_t> true_periods;

    static PolicyContext from_instance(const BanditInstance& instance) {
        return {instance.num_arms(), instance.horizon(), instance.noise().sigma, instance.periods()};
    }
};

class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string id() const = 0;
    virtual void reset(const PolicyContext& ctx) = 0;
    virtual std::size_t select(Epoch t) = 0;
    virtual void observe(Epoch t, std::size_t arm, double reward) = 0;

    // Periods the policy is acting on after stage one, if it estimates any.
    virtual std::optional<std::vector<std::int64_t>> estimated_periods() const { return std::nullopt; }

    // Counters for the run log (forced pulls, exploit pulls, ...).
    virtual std::map<std::string, std::int64_t> diagnostics() const { return {}; }
};

struct StageOneChoice {
    std::int64_t n = 0;
    std::int64_t g = 0;
    double H = 0.0;
};

// g = ceil(sqrt(n)) (at least 2), H = sqrt(1 + log n).
inline StageOneChoice parameters_for_block(std::int64_t n) {
    if (n < 1) throw std::invalid_argument("parameters_for_block: n must be positive");
    StageOneChoice c;
    c.n = n;
    c.g = 1;
    while (c.g * c.g < n) ++c.g;
    c.g = std::max<std::int64_t>(c.g, 2);
    c.H = std::sqrt(1.0 + std::log(static_cast<double>(n)));
    return c;
}

// n = floor(sqrt(T/K)), g = ceil(sqrt(n)), H = sqrt(1 + log n).
inline StageOneChoice recommended_parameters(Epoch horizon, std::size_t num_arms) {
    if (num_arms < 1) throw std::invalid_argument("recommended_parameters: K must be positive");
    if (horizon <= 4 * static_cast<Epoch>(num_arms)) {
        throw std::invalid_argument("recommended_parameters: horizon too short (need T > 4K)");
    }
    const auto k = static_cast<std::int64_t>(num_arms);
    std::int64_t n = static_cast<std::int64_t>(std::sqrt(static_cast<double>(horizon) / static_cast<double>(k)));
    while ((n + 1) * (n + 1) * k <= horizon) ++n;
    while (n * n * k > horizon) --n;
    return parameters_for_block(n);
}

// Arm pulled at epoch t of the exploration block: floor((t-1)/n), 0-based.
inline std::size_t stage_one_schedule(Epoch t, std::int64_t n, std::size_t num_arms) {
    if (n < 1) throw std::invalid_argument("stage_one_schedule: n must be positive");
    if (t < 1 || t > n * static_cast<Epoch>(num_arms)) {
        throw std::out_of_range("stage_one_schedule: epoch " + std::to_string(t) + " is outside stage one");
    }
    return static_cast<std::size_t>((t - 1) / n);
}

}  // namespace pmab
