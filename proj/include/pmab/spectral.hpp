#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmab/rational.hpp"

namespace pmab::spectral {

using Complex = std::complex<double>;

namespace detail {

inline void check_block(std::span<const double> samples, std::span<const std::int64_t> epochs) {
    if (samples.empty()) throw std::invalid_argument("dft: empty sample block");
    if (samples.size() != epochs.size()) throw std::invalid_argument("dft: samples and epochs differ in length");
}

}  // namespace detail

// (1/n) sum_t Y_t exp(-2 pi i v t) over the given absolute epochs.
inline Complex dft_at(std::span<const double> samples, std::span<const std::int64_t> epochs, double v) {
    detail::check_block(samples, epochs);
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument("dft_at: frequency must lie in [0, 1]");
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double turns = std::fmod(v * static_cast<double>(epochs[i]), 1.0);
        acc += samples[i] * std::polar(1.0, -2.0 * std::numbers::pi * turns);
    }
    return acc / static_cast<double>(samples.size());
}

// Same transform at a rational frequency; the phase is reduced exactly.
inline Complex dft_at(std::span<const double> samples, std::span<const std::int64_t> epochs, const Rational& v) {
    detail::check_block(samples, epochs);
    if (v.num() < 0 || v > Rational{1, 1}) throw std::invalid_argument("dft_at: frequency must lie in [0, 1]");
    const std::int64_t den = v.den();
    Complex acc{0.0, 0.0};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const std::int64_t residue = ((v.num() * (epochs[i] % den)) % den + den) % den;
        const double turns = static_cast<double>(residue) / static_cast<double>(den);
        acc += samples[i] * std::polar(1.0, -2.0 * std::numbers::pi * turns);
    }
    return acc / static_cast<double>(samples.size());
}

// {j1/j2 : 1 <= j1 < j2 <= t_max}, reduced, deduplicated, ascending.
inline std::vector<Rational> candidate_frequencies(std::int64_t t_max) {
    if (t_max < 2) throw std::invalid_argument("candidate_frequencies: t_max must be at least 2");
    std::set<Rational> unique;
    for (std::int64_t den = 2; den <= t_max; ++den) {
        for (std::int64_t num = 1; num < den; ++num) unique.emplace(num, den);
    }
    return {unique.begin(), unique.end()};
}

// Largest integer strictly below n/(2g).
inline std::int64_t default_t_max(std::int64_t n, std::int64_t g) { return (n - 1) / (2 * g); }

struct Periodogram {
    std::int64_t n = 0;
    std::vector<std::int64_t> epochs;
    std::vector<Rational> grid;
    std::vector<double> frequencies;
    std::vector<Complex> values;
    std::vector<double> magnitudes;

    double sup_magnitude() const {
        return magnitudes.empty() ? 0.0 : *std::max_element(magnitudes.begin(), magnitudes.end());
    }
};

// Grid: uniform mesh of step 1/(24n) over [0, 1/2] merged with every extra
// frequency in [0, 1/2] (the candidate harmonics).
inline std::vector<Rational> periodogram_grid(std::int64_t n, std::span<const Rational> extra) {
    if (n < 1) throw std::invalid_argument("periodogram_grid: n must be positive");
    std::set<Rational> points;
    const std::int64_t steps = 24 * n;
    for (std::int64_t i = 0; 2 * i <= steps; ++i) points.emplace(i, steps);
    const Rational half{1, 2};
    for (const auto& f : extra) {
        if (f.num() >= 0 && f <= half) points.insert(f);
    }
    return {points.begin(), points.end()};
}

inline Periodogram compute_periodogram(std::span<const double> samples, std::span<const std::int64_t> epochs,
                                       std::span<const Rational> extra_frequencies) {
    detail::check_block(samples, epochs);
    Periodogram pg;
    pg.n = static_cast<std::int64_t>(samples.size());
    pg.epochs.assign(epochs.begin(), epochs.end());
    pg.grid = periodogram_grid(pg.n, extra_frequencies);
    pg.frequencies.reserve(pg.grid.size());
    pg.values.reserve(pg.grid.size());
    pg.magnitudes.reserve(pg.grid.size());
    for (const auto& v : pg.grid) {
        const Complex y = dft_at(samples, epochs, v);
        pg.frequencies.push_back(v.value());
        pg.values.push_back(y);
        pg.magnitudes.push_back(std::abs(y));
    }
    return pg;
}

// A_j = sup { |sin(pi nu)| / (pi nu) : nu in [j, j+1] }: dense scan, then
// golden-section refinement of the bracketing cell to 1e-10 in nu.
inline double a_sup(std::int64_t j) {
    if (j < 1) throw std::invalid_argument("a_sup: j must be positive");
    const auto sinc = [](double nu) { return std::abs(std::sin(std::numbers::pi * nu)) / (std::numbers::pi * nu); };
    constexpr int kScan = 10000;
    const double lo = static_cast<double>(j);
    const double step = 1.0 / kScan;
    int best = 0;
    double best_val = sinc(lo);
    for (int i = 1; i <= kScan; ++i) {
        const double val = sinc(lo + i * step);
        if (val > best_val) {
            best_val = val;
            best = i;
        }
    }
    double a = lo + std::max(0, best - 1) * step;
    double b = lo + std::min(kScan, best + 1) * step;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = sinc(c);
    double fd = sinc(d);
    while (b - a > 1e-10) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = sinc(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = sinc(d);
        }
    }
    return std::max({best_val, fc, fd, sinc(0.5 * (a + b))});
}

struct LeakageSums {
    double u1 = 0.0;
    double u2 = 0.0;
};

// U_1 = sum_{j=0}^{floor((n-2g-1)/(4g))} A_{(2j+1)g},
// U_2 = sum_{j=1}^{floor((n-1)/(4g))} A_{2jg-1}.
inline LeakageSums u_constants(std::int64_t n, std::int64_t g) {
    if (n < 1) throw std::invalid_argument("u_constants: n must be positive");
    if (g < 2 || static_cast<double>(g) < std::sqrt(static_cast<double>(n))) {
        throw std::invalid_argument("u_constants: g must satisfy g >= max{2, sqrt(n)}");
    }
    LeakageSums sums;
    if (n - 2 * g - 1 >= 0) {
        for (std::int64_t j = 0; j <= (n - 2 * g - 1) / (4 * g); ++j) sums.u1 += a_sup((2 * j + 1) * g);
    }
    for (std::int64_t j = 1; j <= (n - 1) / (4 * g); ++j) sums.u2 += a_sup(2 * j * g - 1);
    return sums;
}

// eps_bar = 2 sigma H / (1 - pi/24) * sqrt(log(n) / n), natural log.
inline double noise_bound(std::int64_t n, double sigma, double H) {
    if (n < 2) throw std::invalid_argument("noise_bound: n must be at least 2");
    const double nd = static_cast<double>(n);
    return 2.0 * sigma * H / (1.0 - std::numbers::pi / 24.0) * std::sqrt(std::log(nd) / nd);
}

struct ThresholdConstants {
    std::int64_t n = 0;
    std::int64_t g = 0;
    double H = 0.0;
    double sigma = 0.0;
    std::vector<std::pair<std::int64_t, double>> a_table;
    double u1 = 0.0;
    double u2 = 0.0;
    double eps_bar = 0.0;
    double leakage_ratio = 0.0;  // pi U_1 / (1 - pi U_2)
};

inline ThresholdConstants make_threshold_constants(std::int64_t n, std::int64_t g, double H, double sigma) {
    if (!(H > 0.0)) throw std::invalid_argument("threshold constants: H must be positive");
    if (!(sigma >= 0.0)) throw std::invalid_argument("threshold constants: sigma must be non-negative");
    ThresholdConstants c;
    c.n = n;
    c.g = g;
    c.H = H;
    c.sigma = sigma;
    const auto sums = u_constants(n, g);
    c.u1 = sums.u1;
    c.u2 = sums.u2;
    if (n - 2 * g - 1 >= 0) {
        for (std::int64_t j = 0; j <= (n - 2 * g - 1) / (4 * g); ++j) c.a_table.emplace_back((2 * j + 1) * g, a_sup((2 * j + 1) * g));
    }
    for (std::int64_t j = 1; j <= (n - 1) / (4 * g); ++j) c.a_table.emplace_back(2 * j * g - 1, a_sup(2 * j * g - 1));
    std::sort(c.a_table.begin(), c.a_table.end());
    const double denom = 1.0 - std::numbers::pi * c.u2;
    if (!(denom > 0.0)) throw std::domain_error("threshold constants: 1 - pi U_2 must be positive");
    c.leakage_ratio = std::numbers::pi * c.u1 / denom;
    c.eps_bar = noise_bound(n, sigma, H);
    return c;
}

// tau = eps_bar + pi U_1 / (1 - pi U_2) * (eps_bar + sup |y(v)|).
inline double threshold(const ThresholdConstants& constants, double sup_magnitude) {
    if (!(1.0 - std::numbers::pi * constants.u2 > 0.0)) {
        throw std::domain_error("threshold: 1 - pi U_2 must be positive");
    }
    if (!(sup_magnitude >= 0.0)) throw std::invalid_argument("threshold: sup magnitude must be non-negative");
    return constants.eps_bar + constants.leakage_ratio * (constants.eps_bar + sup_magnitude);
}

struct TraceStep {
    Rational peak;       // global maximum v* of the remaining domain
    Rational matched;    // nearest candidate v_hat
    double excluded_lo;  // open interval (v_hat - g/n, v_hat + g/n)
    double excluded_hi;
    bool accepted;       // false when v_hat repeats or crowds an earlier match
};

struct FrequencyEstimate {
    std::vector<Rational> identified;
    std::int64_t period_estimate = 1;
    double threshold = 0.0;
    double sup_magnitude = 0.0;
    std::vector<TraceStep> trace;
};

// Thresholded peak picking with neighborhood exclusion. Grid-maximum ties go to
// the lowest frequency; nearest-candidate ties go to the smaller denominator,
// then the smaller numerator.
inline FrequencyEstimate identify_frequencies(const Periodogram& periodogram, const ThresholdConstants& constants,
                                              std::int64_t t_max) {
    if (periodogram.grid.empty()) throw std::invalid_argument("identify_frequencies: empty periodogram");
    const auto candidates = candidate_frequencies(t_max);
    const Rational radius{constants.g, constants.n};

    FrequencyEstimate est;
    est.sup_magnitude = periodogram.sup_magnitude();
    est.threshold = threshold(constants, est.sup_magnitude);

    const std::size_t m = periodogram.grid.size();
    std::vector<char> active(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
        active[i] = periodogram.grid[i] >= radius && periodogram.magnitudes[i] > est.threshold;
    }
    const auto exclude_around = [&](const Rational& centre) {
        for (std::size_t i = 0; i < m; ++i) {
            if (active[i] && within_open(periodogram.grid[i], centre, radius)) active[i] = 0;
        }
    };

    while (true) {
        std::optional<std::size_t> peak;
        for (std::size_t i = 0; i < m; ++i) {
            if (active[i] && (!peak || periodogram.magnitudes[i] > periodogram.magnitudes[*peak])) peak = i;
        }
        if (!peak) break;
        const Rational v_star = periodogram.grid[*peak];

        const Rational* best = &candidates.front();
        for (const auto& c : candidates) {
            const int cmp = compare_distance(c, v_star, *best, v_star);
            if (cmp < 0 || (cmp == 0 && (c.den() < best->den() || (c.den() == best->den() && c.num() < best->num())))) {
                best = &c;
            }
        }
        const Rational v_hat = *best;

        bool accepted = true;
        for (const auto& prev : est.identified) {
            if (!(compare_distance(v_hat, prev, radius, Rational{0, 1}) >= 0)) accepted = false;
        }
        if (accepted) est.identified.push_back(v_hat);

        exclude_around(v_hat);
        // The loop must make progress even if v* sits g/n or more from its match.
        if (active[*peak]) exclude_around(v_star);

        est.trace.push_back(TraceStep{v_star, v_hat, v_hat.value() - radius.value(), v_hat.value() + radius.value(), accepted});
    }
    est.period_estimate = lcm_of_denominators(est.identified);
    return est;
}

struct StageOneParams {
    std::int64_t n = 0;
    std::int64_t g = 0;
    double H = 0.0;
    double sigma = 0.0;
    std::optional<std::int64_t> t_max;

    std::int64_t effective_t_max() const { return t_max.value_or(default_t_max(n, g)); }
};

// One arm: periodogram -> threshold -> identification -> LCM.
inline FrequencyEstimate estimate_period(std::span<const double> samples, std::span<const std::int64_t> epochs,
                                         const StageOneParams& params, const ThresholdConstants& constants) {
    if (static_cast<std::int64_t>(samples.size()) != params.n) {
        throw std::invalid_argument("estimate_period: block has " + std::to_string(samples.size()) +
                                    " samples, expected n=" + std::to_string(params.n));
    }
    const std::int64_t t_max = params.effective_t_max();
    if (t_max < 2) {
        // No candidate harmonics exist; only the stationary hypothesis remains.
        FrequencyEstimate est;
        const std::vector<Rational> none;
        const auto pg = compute_periodogram(samples, epochs, none);
        est.sup_magnitude = pg.sup_magnitude();
        est.threshold = threshold(constants, est.sup_magnitude);
        return est;
    }
    const auto candidates = candidate_frequencies(t_max);
    const auto pg = compute_periodogram(samples, epochs, candidates);
    return identify_frequencies(pg, constants, t_max);
}

struct SampleBlock {
    std::vector<double> samples;
    std::vector<std::int64_t> epochs;
};

inline std::vector<FrequencyEstimate> estimate_periods(std::span<const SampleBlock> blocks, const StageOneParams& params) {
    const auto constants = make_threshold_constants(params.n, params.g, params.H, params.sigma);
    std::vector<FrequencyEstimate> out;
    out.reserve(blocks.size());
    for (const auto& block : blocks) out.push_back(estimate_period(block.samples, block.epochs, params, constants));
    return out;
}

// Upper bound on the probability that some arm's period is misestimated:
// 48K/n^{H^2-1} + 200K/n^{0.867H^2-1} + 200K/n^{0.694H^2-1}.
inline double failure_probability_bound(std::int64_t n, std::int64_t num_arms, double H) {
    if (n < 2) throw std::invalid_argument("failure_probability_bound: n must be at least 2");
    if (num_arms < 1) throw std::invalid_argument("failure_probability_bound: K must be positive");
    if (!(H > 1.0)) throw std::invalid_argument("failure_probability_bound: H must exceed 1");
    const double nd = static_cast<double>(n);
    const double k = static_cast<double>(num_arms);
    const double h2 = H * H;
    return 48.0 * k / std::pow(nd, h2 - 1.0) + 200.0 * k / std::pow(nd, 0.867 * h2 - 1.0) +
           200.0 * k / std::pow(nd, 0.694 * h2 - 1.0);
}

struct StrengthCoefficients {
    double sigma_coeff = 0.0;  // b_k >= sigma_coeff * sigma + B_coeff * B_k
    double B_coeff = 0.0;
};

inline StrengthCoefficients strength_coefficients(std::int64_t n, std::int64_t g, double H) {
    const auto sums = u_constants(n, g);
    const double pi = std::numbers::pi;
    const double denom = 1.0 - pi * sums.u2;
    if (!(denom > 0.0)) throw std::domain_error("strength_coefficients: 1 - pi U_2 must be positive");
    const double ratio = pi * sums.u1 / denom;
    StrengthCoefficients c;
    c.sigma_coeff = (2.0 * ratio + 2.0) * noise_bound(n, 1.0, H);
    c.B_coeff = std::max(8.0 * pi / 3.0 * sums.u2, ratio * std::max(pi * sums.u1, pi * sums.u2 + 1.0) + pi * sums.u2);
    return c;
}

// Checks b_k >= sigma_coeff * sigma + B_coeff * B_k for one profile, where
// b_k and B_k are the smallest and largest nonzero |b_{k,j}|.
inline bool strength_condition_holds(std::span<const Complex> coefficients, std::int64_t n, std::int64_t g, double H,
                              double sigma, double zero_tol = 1e-12) {
    double lo = 0.0;
    double hi = 0.0;
    bool any = false;
    for (const auto& b : coefficients) {
        const double mag = std::abs(b);
        if (mag <= zero_tol) continue;
        lo = any ? std::min(lo, mag) : mag;
        hi = any ? std::max(hi, mag) : mag;
        any = true;
    }
    if (!any) return true;
    const auto c = strength_coefficients(n, g, H);
    return lo >= c.sigma_coeff * sigma + c.B_coeff * hi;
}

}  // namespace pmab::spectral
