#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmab/policy.hpp"

namespace pmab {

// n_s = ceil(2^{2+2s} log(K T s^2) / T1) * T1.
inline std::int64_t elimination_schedule(int s, std::size_t num_arms, Epoch horizon, std::int64_t period) {
    if (s < 1) throw std::invalid_argument("elimination_schedule: s must be at least 1");
    if (period < 1) throw std::invalid_argument("elimination_schedule: T1 must be positive");
    if (num_arms < 1 || horizon < 1) throw std::invalid_argument("elimination_schedule: K and T must be positive");
    const double sd = static_cast<double>(s);
    const double raw = std::ldexp(1.0, 2 + 2 * s) *
                       std::log(static_cast<double>(num_arms) * static_cast<double>(horizon) * sd * sd) /
                       static_cast<double>(period);
    return static_cast<std::int64_t>(std::ceil(raw)) * period;
}

struct EliminationRound {
    int round = 0;
    std::int64_t pulls_per_arm = 0;
    std::vector<std::size_t> active;
    std::vector<std::int64_t> counts;  // aligned with active
    std::vector<double> means;         // aligned with active
    std::vector<std::size_t> eliminated;
    bool completed = false;
};

// Pulls every active arm n_s times in consecutive blocks, so each arm's
// block covers every phase of T1 equally often, then drops the arms whose
// average is more than 2^{-s} sigma below the round maximum.
class SequentialElimination final : public Policy {
public:
    std::string id() const override { return "seq_elim"; }

    void reset(const PolicyContext& ctx) override {
        if (ctx.num_arms < 1) throw std::invalid_argument("seq_elim: no arms");
        if (ctx.true_periods.size() != ctx.num_arms) throw std::invalid_argument("seq_elim: needs the common period");
        for (auto p : ctx.true_periods) {
            if (p != ctx.true_periods.front()) throw std::invalid_argument("seq_elim: arms must share one period");
        }
        ctx_ = ctx;
        period_ = ctx.true_periods.front();
        history_.clear();
        start_round(1, all_arms());
    }

    std::size_t select(Epoch) override {
        const auto& r = history_.back();
        return r.active[slot_];
    }

    void observe(Epoch, std::size_t arm, double reward) override {
        auto& r = history_.back();
        if (arm != r.active[slot_]) throw std::logic_error("seq_elim: observed arm differs from the selected arm");
        r.counts[slot_] += 1;
        sums_[slot_] += reward;
        if (r.counts[slot_] < r.pulls_per_arm) return;
        if (++slot_ < r.active.size()) return;
        finish_round();
    }

    std::map<std::string, std::int64_t> diagnostics() const override {
        std::int64_t completed = 0;
        for (const auto& r : history_) completed += r.completed ? 1 : 0;
        return {{"completed_rounds", completed}, {"active_arms", static_cast<std::int64_t>(history_.back().active.size())}};
    }

    const std::vector<EliminationRound>& history() const { return history_; }
    const std::vector<std::size_t>& active() const { return history_.back().active; }
    int round() const { return history_.back().round; }

private:
    std::vector<std::size_t> all_arms() const {
        std::vector<std::size_t> a(ctx_.num_arms);
        for (std::size_t k = 0; k < a.size(); ++k) a[k] = k;
        return a;
    }

    void start_round(int s, std::vector<std::size_t> active) {
        EliminationRound r;
        r.round = s;
        r.pulls_per_arm = elimination_schedule(s, ctx_.num_arms, ctx_.horizon, period_);
        r.active = std::move(active);
        r.counts.assign(r.active.size(), 0);
        r.means.assign(r.active.size(), 0.0);
        sums_.assign(r.active.size(), 0.0);
        slot_ = 0;
        history_.push_back(std::move(r));
    }

    void finish_round() {
        auto& r = history_.back();
        for (std::size_t i = 0; i < r.active.size(); ++i) r.means[i] = sums_[i] / static_cast<double>(r.counts[i]);
        const double best = *std::max_element(r.means.begin(), r.means.end());
        const double cutoff = best - std::ldexp(ctx_.sigma, -r.round);
        std::vector<std::size_t> next;
        for (std::size_t i = 0; i < r.active.size(); ++i) {
            if (r.means[i] >= cutoff) {
                next.push_back(r.active[i]);
            } else {
                r.eliminated.push_back(r.active[i]);
            }
        }
        r.completed = true;
        start_round(r.round + 1, std::move(next));
    }

    PolicyContext ctx_;
    std::int64_t period_ = 1;
    std::vector<EliminationRound> history_;
    std::vector<double> sums_;
    std::size_t slot_ = 0;
};

}  // namespace pmab
