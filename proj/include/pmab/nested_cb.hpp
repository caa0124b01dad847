#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmab/environment.hpp"

namespace pmab {

// Index-set labels: 0 is the stage-one set, 1..S the per-round sets.
inline constexpr int kStageOneSet = 0;
inline constexpr int kNoSet = -1;

// Two-term width for one effective arm. A summand with zero count carries
// weight zero and contributes nothing; with no samples at all the width is
// infinite so the arm is forced into the wide-CI branch.
inline double confidence_width(std::int64_t count_bar, std::int64_t count_round, double d_hat, double delta, double sigma) {
    const std::int64_t total = count_bar + count_round;
    if (total == 0) return std::numeric_limits<double>::infinity();
    const auto term = [&](std::int64_t c) {
        if (c == 0) return 0.0;
        const double cd = static_cast<double>(c);
        return cd / static_cast<double>(total) *
               std::sqrt(4.0 * sigma * sigma / cd * std::log(8.0 * d_hat * cd / delta));
    };
    return term(count_bar) + term(count_round);
}

enum class Branch { wide, exploit, eliminate };

struct RoundRecord {
    int round = 0;
    std::vector<std::size_t> active;
    std::vector<double> means;   // aligned with active
    std::vector<double> widths;  // aligned with active
    Branch branch = Branch::wide;
    std::vector<std::size_t> eliminated;
};

struct Decision {
    std::size_t arm = 0;
    int index_set = kNoSet;  // set the epoch joins: s for the wide branch, kNoSet otherwise
    int rounds_evaluated = 0;
    bool forced_by_zero_count = false;
    bool round_cap_hit = false;
};

// Nested confidence-bound learner over effective arms (arm, t mod period_k).
// Sufficient statistics are kept per (index set, arm, phase); the full action
// log is retained as well so that set-based quantities can be recomputed.
class NestedCbState {
public:
    NestedCbState(std::vector<std::int64_t> periods, double sigma, Epoch horizon, double delta)
        : periods_(std::move(periods)), sigma_(sigma), horizon_(horizon), delta_(delta) {
        if (periods_.empty()) throw std::invalid_argument("NestedCbState: no arms");
        for (auto p : periods_) {
            if (p < 1) throw std::invalid_argument("NestedCbState: periods must be positive");
        }
        if (horizon_ < 2) throw std::invalid_argument("NestedCbState: horizon must be at least 2");
        if (!(delta_ > 0.0 && delta_ < 1.0)) throw std::invalid_argument("NestedCbState: delta must lie in (0, 1)");
        d_hat_ = std::accumulate(periods_.begin(), periods_.end(), std::int64_t{0});
        rounds_ = static_cast<int>(std::floor(std::log2(static_cast<double>(horizon_))));
        while ((std::int64_t{1} << (rounds_ + 1)) <= horizon_) ++rounds_;
        while (rounds_ > 0 && (std::int64_t{1} << rounds_) > horizon_) --rounds_;
        stats_.resize(static_cast<std::size_t>(rounds_ + 1));
        for (auto& per_set : stats_) {
            per_set.resize(periods_.size());
            for (std::size_t k = 0; k < periods_.size(); ++k) per_set[k].assign(static_cast<std::size_t>(periods_[k]), {});
        }
    }

    std::size_t num_arms() const { return periods_.size(); }
    const std::vector<std::int64_t>& periods() const { return periods_; }
    std::int64_t d_hat() const { return d_hat_; }
    int max_rounds() const { return rounds_; }
    double sigma() const { return sigma_; }
    double delta() const { return delta_; }
    Epoch horizon() const { return horizon_; }

    // Epochs must be appended in increasing order starting at 1.
    void record(Epoch t, std::size_t arm, double reward, int index_set) {
        if (t != static_cast<Epoch>(actions_.size()) + 1) throw std::logic_error("NestedCbState: epochs must be recorded in order");
        if (arm >= periods_.size()) throw std::out_of_range("NestedCbState: arm out of range");
        if (index_set < kNoSet || index_set > rounds_) throw std::out_of_range("NestedCbState: bad index set");
        actions_.push_back(arm);
        rewards_.push_back(reward);
        labels_.push_back(index_set);
        if (index_set != kNoSet) {
            auto& cell = stats_[static_cast<std::size_t>(index_set)][arm][phase(arm, t)];
            cell.count += 1;
            cell.sum += reward;
        }
    }

    std::size_t phase(std::size_t arm, Epoch t) const {
        return static_cast<std::size_t>(t % periods_[arm]);
    }

    std::int64_t count(int index_set, std::size_t arm, Epoch t) const {
        return stats_.at(static_cast<std::size_t>(index_set))[arm][phase(arm, t)].count;
    }

    double phase_mean(int round, std::size_t arm, Epoch t) const {
        const auto& bar = stats_[kStageOneSet][arm][phase(arm, t)];
        const auto& cur = stats_.at(static_cast<std::size_t>(round))[arm][phase(arm, t)];
        const std::int64_t total = bar.count + cur.count;
        if (total == 0) throw std::logic_error("phase_mean: no samples for arm " + std::to_string(arm) + " at this phase");
        return (bar.sum + cur.sum) / static_cast<double>(total);
    }

    double phase_width(int round, std::size_t arm, Epoch t) const {
        return confidence_width(count(kStageOneSet, arm, t), count(round, arm, t), static_cast<double>(d_hat_), delta_, sigma_);
    }

    // Runs the screening tournament at epoch t without mutating state.
    Decision decide(Epoch t, std::vector<RoundRecord>* trace = nullptr) const {
        std::vector<std::size_t> active(periods_.size());
        std::iota(active.begin(), active.end(), std::size_t{0});
        const double exploit_width = sigma_ / std::sqrt(static_cast<double>(horizon_));
        std::vector<double> means;
        std::vector<double> widths;
        Decision decision;

        for (int s = 1;; ++s) {
            decision.rounds_evaluated = s;
            means.assign(active.size(), 0.0);
            widths.assign(active.size(), 0.0);
            for (std::size_t i = 0; i < active.size(); ++i) {
                widths[i] = phase_width(s, active[i], t);
                means[i] = std::isfinite(widths[i]) ? phase_mean(s, active[i], t) : 0.0;
            }
            const double target = std::ldexp(sigma_, -s);
            RoundRecord record;
            if (trace) {
                record.round = s;
                record.active = active;
                record.means = means;
                record.widths = widths;
            }

            std::optional<std::size_t> widest;
            for (std::size_t i = 0; i < active.size(); ++i) {
                if (widths[i] > target && (!widest || widths[i] > widths[*widest])) widest = i;
            }
            if (widest) {
                decision.arm = active[*widest];
                decision.index_set = s;
                decision.forced_by_zero_count = !std::isfinite(widths[*widest]);
                if (trace) trace->push_back(std::move(record));
                return decision;
            }

            const auto argmax_mean = [&]() {
                std::size_t best = 0;
                for (std::size_t i = 1; i < active.size(); ++i) {
                    if (means[i] > means[best]) best = i;
                }
                return active[best];
            };

            const bool all_narrow = std::all_of(widths.begin(), widths.end(), [&](double w) { return w <= exploit_width; });
            if (all_narrow) {
                decision.arm = argmax_mean();
                decision.index_set = kNoSet;
                if (trace) {
                    record.branch = Branch::exploit;
                    trace->push_back(std::move(record));
                }
                return decision;
            }

            // every width <= 2^{-s} sigma: drop arms more than 2^{1-s} sigma below the best
            const double best_mean = *std::max_element(means.begin(), means.end());
            const double cutoff = best_mean - std::ldexp(sigma_, 1 - s);
            std::vector<std::size_t> next;
            std::vector<double> next_means;
            for (std::size_t i = 0; i < active.size(); ++i) {
                if (means[i] >= cutoff) {
                    next.push_back(active[i]);
                    next_means.push_back(means[i]);
                } else if (trace) {
                    record.eliminated.push_back(active[i]);
                }
            }
            if (trace) {
                record.branch = Branch::eliminate;
                trace->push_back(std::move(record));
            }
            active = std::move(next);
            if (s + 1 > rounds_) {
                // round cap: exploit among the survivors using the last round's means
                std::size_t best = 0;
                for (std::size_t i = 1; i < active.size(); ++i) {
                    if (next_means[i] > next_means[best]) best = i;
                }
                decision.arm = active[best];
                decision.index_set = kNoSet;
                decision.round_cap_hit = true;
                return decision;
            }
        }
    }

    // Epochs currently in an index set, ascending.
    std::vector<Epoch> index_set(int label) const {
        std::vector<Epoch> out;
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i] == label) out.push_back(static_cast<Epoch>(i) + 1);
        }
        return out;
    }

    std::span<const std::size_t> actions() const { return actions_; }
    std::span<const double> rewards() const { return rewards_; }
    std::span<const int> labels() const { return labels_; }

private:
    struct Cell {
        std::int64_t count = 0;
        double sum = 0.0;
    };

    std::vector<std::int64_t> periods_;
    double sigma_;
    Epoch horizon_;
    double delta_;
    std::int64_t d_hat_ = 0;
    int rounds_ = 0;
    std::vector<std::vector<std::vector<Cell>>> stats_;  // [set][arm][phase]
    std::vector<std::size_t> actions_;
    std::vector<double> rewards_;
    std::vector<int> labels_;
};

// |{ j in index_set : action_j = arm and j = t (mod period) }| straight from the log.
inline std::int64_t count_same_phase(std::span<const std::size_t> actions, std::span<const Epoch> index_set,
                                     std::size_t arm, Epoch t, std::int64_t period) {
    if (period < 1) throw std::invalid_argument("count_same_phase: period must be positive");
    std::int64_t c = 0;
    for (Epoch j : index_set) {
        if (actions[static_cast<std::size_t>(j - 1)] == arm && (j - t) % period == 0) ++c;
    }
    return c;
}

}  // namespace pmab
