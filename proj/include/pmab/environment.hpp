#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pmab/noise.hpp"
#include "pmab/rational.hpp"

namespace pmab {

// Arms are 0-based; epochs are 1-based (t = 1..T) throughout the library.
using Epoch = std::int64_t;

// Smallest d dividing values.size() such that values tiles with period d.
inline std::size_t minimal_period(std::span<const double> values) {
    const std::size_t len = values.size();
    for (std::size_t d = 1; d < len; ++d) {
        if (len % d != 0) continue;
        bool tiles = true;
        for (std::size_t p = 0; p + d < len && tiles; ++p) {
            tiles = values[p] == values[p + d];
        }
        if (tiles) return d;
    }
    return len;
}

// b_j = (1/T) sum_{t=1..T} mu_t exp(-2 pi i j t / T), the inverse of the
// complex exponential representation mu_t = sum_j b_j exp(2 pi i j t / T).
inline std::vector<std::complex<double>> fourier_coefficients(std::span<const double> values) {
    const auto period = static_cast<std::int64_t>(values.size());
    std::vector<std::complex<double>> coeffs(values.size());
    for (std::int64_t j = 0; j < period; ++j) {
        std::complex<double> acc{0.0, 0.0};
        for (std::int64_t t = 1; t <= period; ++t) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>((j * t) % period) / static_cast<double>(period);
            acc += values[static_cast<std::size_t>(t - 1)] * std::polar(1.0, angle);
        }
        coeffs[static_cast<std::size_t>(j)] = acc / static_cast<double>(period);
    }
    return coeffs;
}

enum class Representation { tabular, fourier };

class MeanProfile {
public:
    static constexpr double kImaginaryTolerance = 1e-9;

    // Tabular profile; throws if the declared period is not minimal.
    explicit MeanProfile(std::vector<double> values) : values_(std::move(values)) {
        if (values_.empty()) {
            throw std::invalid_argument("MeanProfile: period must be positive");
        }
        for (double v : values_) {
            if (!std::isfinite(v)) throw std::invalid_argument("MeanProfile: non-finite mean");
        }
        if (minimal_period(values_) != values_.size()) {
            throw std::invalid_argument("MeanProfile: declared period " + std::to_string(values_.size()) +
                                        " is not minimal (profile repeats every " +
                                        std::to_string(minimal_period(values_)) + ")");
        }
    }

    // Truncates the values to their minimal period instead of rejecting them.
    static MeanProfile reduced(std::vector<double> values) {
        if (values.empty()) throw std::invalid_argument("MeanProfile: period must be positive");
        values.resize(minimal_period(values));
        return MeanProfile(std::move(values));
    }

    static MeanProfile constant(double mean) { return MeanProfile(std::vector<double>{mean}); }

    // Evaluates mu_t = sum_j b_j exp(2 pi i j t / T) for t = 1..T. Conjugate
    // symmetry is required; imaginary residue up to 1e-9 is discarded.
    static MeanProfile from_fourier(std::vector<std::complex<double>> coeffs) {
        const auto period = static_cast<std::int64_t>(coeffs.size());
        if (period == 0) throw std::invalid_argument("MeanProfile: empty Fourier coefficient list");
        if (std::abs(coeffs[0].imag()) > kImaginaryTolerance) {
            throw std::invalid_argument("MeanProfile: b_0 must be real");
        }
        for (std::int64_t j = 1; j < period; ++j) {
            const auto diff = coeffs[static_cast<std::size_t>(j)] - std::conj(coeffs[static_cast<std::size_t>(period - j)]);
            if (std::abs(diff) > kImaginaryTolerance) {
                throw std::invalid_argument("MeanProfile: Fourier coefficients are not conjugate symmetric at j=" +
                                            std::to_string(j));
            }
        }
        std::vector<double> values(static_cast<std::size_t>(period));
        for (std::int64_t t = 1; t <= period; ++t) {
            std::complex<double> acc{0.0, 0.0};
            for (std::int64_t j = 0; j < period; ++j) {
                const double angle = 2.0 * std::numbers::pi * static_cast<double>((j * t) % period) / static_cast<double>(period);
                acc += coeffs[static_cast<std::size_t>(j)] * std::polar(1.0, angle);
            }
            if (std::abs(acc.imag()) > kImaginaryTolerance) {
                throw std::invalid_argument("MeanProfile: Fourier evaluation has imaginary residue above 1e-9");
            }
            values[static_cast<std::size_t>(t - 1)] = acc.real();
        }
        MeanProfile profile(std::move(values));
        profile.representation_ = Representation::fourier;
        profile.fourier_ = std::move(coeffs);
        return profile;
    }

    std::int64_t period() const { return static_cast<std::int64_t>(values_.size()); }
    std::span<const double> values() const { return values_; }
    Representation representation() const { return representation_; }

    // Coefficients as supplied for Fourier profiles, otherwise computed from the table.
    std::vector<std::complex<double>> coefficients() const {
        return fourier_.empty() ? fourier_coefficients(values_) : fourier_;
    }

    double at(Epoch epoch) const {
        const auto p = ((epoch - 1) % period() + period()) % period();
        return values_[static_cast<std::size_t>(p)];
    }

private:
    std::vector<double> values_;
    Representation representation_ = Representation::tabular;
    std::vector<std::complex<double>> fourier_;
};

class BanditInstance {
public:
    BanditInstance(std::vector<MeanProfile> arms, NoiseModel noise, Epoch horizon)
        : arms_(std::move(arms)), noise_(noise), horizon_(horizon) {
        if (arms_.empty()) throw std::invalid_argument("BanditInstance: at least one arm is required");
        if (horizon_ < 1) throw std::invalid_argument("BanditInstance: horizon must be positive");
        noise_.validate();
    }

    std::size_t num_arms() const { return arms_.size(); }
    Epoch horizon() const { return horizon_; }
    const NoiseModel& noise() const { return noise_; }
    const std::vector<MeanProfile>& arms() const { return arms_; }
    const MeanProfile& arm(std::size_t k) const { return arms_.at(k); }

    std::vector<std::int64_t> periods() const {
        std::vector<std::int64_t> out;
        out.reserve(arms_.size());
        for (const auto& a : arms_) out.push_back(a.period());
        return out;
    }

    BanditInstance with_horizon(Epoch horizon) const { return BanditInstance(arms_, noise_, horizon); }
    BanditInstance with_noise(NoiseModel noise) const { return BanditInstance(arms_, noise, horizon_); }

    double mean_at(std::size_t arm, Epoch epoch) const {
        if (arm >= arms_.size()) {
            throw std::out_of_range("mean_at: arm index " + std::to_string(arm) + " out of range for K=" +
                                    std::to_string(arms_.size()));
        }
        if (epoch < 1) throw std::out_of_range("mean_at: epochs start at 1");
        return arms_[arm].at(epoch);
    }

    double best_mean(Epoch epoch) const {
        double best = arms_.front().at(epoch);
        for (const auto& a : arms_) best = std::max(best, a.at(epoch));
        return best;
    }

private:
    std::vector<MeanProfile> arms_;
    NoiseModel noise_;
    Epoch horizon_;
};

inline double mean_at(const BanditInstance& instance, std::size_t arm, Epoch epoch) {
    return instance.mean_at(arm, epoch);
}

// Y_{k,t} = mu_{k,t} + eps_t with eps_t keyed by (seed, t).
inline double sample_reward(const BanditInstance& instance, std::size_t arm, Epoch epoch, const NoiseStream& stream) {
    return instance.mean_at(arm, epoch) + stream.draw(epoch, instance.noise());
}

struct StageOneShape {
    std::int64_t n = 0;
    std::int64_t g = 0;
};

// Problems are reported, not enforced: the worked example has means up to 9
// and a single arm, yet is a legitimate estimation demo.
struct ValidityReport {
    bool means_in_unit_interval = true;
    bool at_least_two_arms = true;
    bool horizon_long_enough = true;  // T >= 4K
    std::vector<std::size_t> arms_with_long_period;  // T_k >= n/(2g)
    std::vector<std::string> notes;

    bool ok() const {
        return means_in_unit_interval && at_least_two_arms && horizon_long_enough && arms_with_long_period.empty();
    }
};

inline ValidityReport validity_report(const BanditInstance& instance, std::optional<StageOneShape> stage_one = {}) {
    ValidityReport report;
    for (std::size_t k = 0; k < instance.num_arms(); ++k) {
        for (double v : instance.arm(k).values()) {
            if (v < 0.0 || v > 1.0) {
                report.means_in_unit_interval = false;
            }
        }
    }
    if (!report.means_in_unit_interval) {
        report.notes.emplace_back("mean rewards leave [0,1]; regret is computed on raw means");
    }
    if (instance.num_arms() < 2) {
        report.at_least_two_arms = false;
        report.notes.emplace_back("fewer than two arms");
    }
    if (instance.horizon() < 4 * static_cast<Epoch>(instance.num_arms())) {
        report.horizon_long_enough = false;
        report.notes.emplace_back("horizon shorter than 4K");
    }
    if (stage_one) {
        for (std::size_t k = 0; k < instance.num_arms(); ++k) {
            // T_k < n / (2g)  <=>  2 g T_k < n
            if (2 * stage_one->g * instance.arm(k).period() >= stage_one->n) {
                report.arms_with_long_period.push_back(k);
            }
        }
        if (!report.arms_with_long_period.empty()) {
            report.notes.emplace_back("some periods violate T_k < n/(2g) for the stage-one parameters");
        }
    }
    return report;
}

struct RunResult {
    std::vector<std::size_t> actions;
    std::vector<double> rewards;
    std::vector<double> gaps;
    std::vector<double> cumulative_regret;
    std::uint64_t seed = 0;
    std::string policy_id;
    std::optional<std::vector<std::int64_t>> estimated_periods;

    double final_regret() const { return cumulative_regret.empty() ? 0.0 : cumulative_regret.back(); }
};

struct RegretTrace {
    std::vector<double> gaps;
    std::vector<double> cumulative_regret;
};

// gaps[t-1] = max_k mu_{k,t} - mu_{actions[t-1],t}.
inline RegretTrace pseudo_regret(const BanditInstance& instance, std::span<const std::size_t> actions) {
    if (static_cast<Epoch>(actions.size()) != instance.horizon()) {
        throw std::invalid_argument("pseudo_regret: expected " + std::to_string(instance.horizon()) +
                                    " actions, got " + std::to_string(actions.size()));
    }
    RegretTrace trace;
    trace.gaps.reserve(actions.size());
    trace.cumulative_regret.reserve(actions.size());
    double total = 0.0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const Epoch t = static_cast<Epoch>(i) + 1;
        const double gap = instance.best_mean(t) - instance.mean_at(actions[i], t);
        trace.gaps.push_back(gap);
        total += gap;
        trace.cumulative_regret.push_back(total);
    }
    return trace;
}

// mu_t = 3 + 3 sin(pi t / 2) + 3 cos(pi t), period 4, horizon n.
inline BanditInstance make_worked_example(std::int64_t n, double sigma) {
    if (n < 4) throw std::invalid_argument("make_worked_example: n must be at least 4");
    std::vector<double> values;
    for (int t = 1; t <= 4; ++t) {
        // sin(pi t/2) and cos(pi t) at integer t are exactly 0, +-1.
        const double s = (t % 2 == 0) ? 0.0 : (t % 4 == 1 ? 1.0 : -1.0);
        const double c = (t % 2 == 0) ? 1.0 : -1.0;
        values.push_back(3.0 + 3.0 * s + 3.0 * c);
    }
    return BanditInstance({MeanProfile(std::move(values))}, NoiseModel{NoiseKind::gaussian, sigma}, n);
}

enum class LowerBoundFamily { E1, E2, E3 };

struct LowerBoundParams {
    Epoch horizon = 10000;
    // Gap Delta; defaults to sqrt(1/(2T)).
    std::optional<double> delta_gap;
    // E1: +1 builds (0.5+Delta, 0.5), -1 builds (0.5-Delta, 0.5).
    int sign = +1;
    // E2/E3: period of arm 1 and the per-phase sign of its gap. Defaults to
    // (+1, -1, -1, ...), which has minimal period T_1 whenever T_1 >= 2.
    std::int64_t period1 = 2;
    std::vector<int> phase_signs;
    // E3: periods of arms 2..K and the perturbation size.
    std::vector<std::int64_t> other_periods;
    double perturbation = 0.0;
    double sigma = 1.0;
};

inline double default_lower_bound_gap(Epoch horizon) { return std::sqrt(1.0 / (2.0 * static_cast<double>(horizon))); }

inline BanditInstance make_lower_bound_instance(LowerBoundFamily family, const LowerBoundParams& params) {
    const double gap = params.delta_gap.value_or(default_lower_bound_gap(params.horizon));
    if (!(gap > 0.0 && gap < 0.5)) {
        throw std::invalid_argument("make_lower_bound_instance: Delta must lie in (0, 0.5)");
    }
    const NoiseModel noise{NoiseKind::gaussian, params.sigma};
    if (family == LowerBoundFamily::E1) {
        if (params.sign != 1 && params.sign != -1) throw std::invalid_argument("E1: sign must be +1 or -1");
        return BanditInstance({MeanProfile::constant(0.5 + params.sign * gap), MeanProfile::constant(0.5)}, noise,
                              params.horizon);
    }

    if (params.period1 < 1) throw std::invalid_argument("E2/E3: period1 must be positive");
    std::vector<int> signs = params.phase_signs;
    if (signs.empty()) {
        signs.assign(static_cast<std::size_t>(params.period1), -1);
        signs[0] = +1;
    }
    if (static_cast<std::int64_t>(signs.size()) != params.period1) {
        throw std::invalid_argument("E2/E3: phase_signs must have period1 entries");
    }
    std::vector<double> arm1;
    for (int s : signs) {
        if (s != 1 && s != -1) throw std::invalid_argument("E2/E3: phase signs must be +1 or -1");
        arm1.push_back(0.5 + s * gap);
    }
    std::vector<MeanProfile> arms{MeanProfile::reduced(std::move(arm1))};

    if (family == LowerBoundFamily::E2) {
        arms.push_back(MeanProfile::constant(0.5));
        return BanditInstance(std::move(arms), noise, params.horizon);
    }

    if (params.other_periods.empty()) throw std::invalid_argument("E3: other_periods must list T_2..T_K");
    const double num_arms = static_cast<double>(params.other_periods.size() + 1);
    const double bump = params.perturbation / std::sqrt(2.0 * num_arms);
    for (std::int64_t period : params.other_periods) {
        if (period < 1) throw std::invalid_argument("E3: periods must be positive");
        std::vector<double> values(static_cast<std::size_t>(period), 0.5);
        if (period >= 2) values[0] += bump;
        if (values[0] < 0.0 || values[0] > 1.0) {
            throw std::invalid_argument("E3: perturbation moves means outside [0,1]");
        }
        // A zero perturbation leaves the arm stationary, i.e. the E2 seed.
        arms.push_back(MeanProfile::reduced(std::move(values)));
    }
    return BanditInstance(std::move(arms), noise, params.horizon);
}

// sqrt(sum_k sum_p (mu^(1)_{k,p} - mu^(2)_{k,p})^2), each arm summed over the
// LCM of its two periods so that instances with different periods compare.
inline double bandit_metric(const BanditInstance& a, const BanditInstance& b) {
    if (a.num_arms() != b.num_arms()) throw std::invalid_argument("bandit_metric: arm counts differ");
    double sum = 0.0;
    for (std::size_t k = 0; k < a.num_arms(); ++k) {
        const std::int64_t span = lcm_checked(a.arm(k).period(), b.arm(k).period());
        for (Epoch t = 1; t <= span; ++t) {
            const double d = a.arm(k).at(t) - b.arm(k).at(t);
            sum += d * d;
        }
    }
    return std::sqrt(sum);
}

}  // namespace pmab
