#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmab/policy.hpp"
#include "pmab/two_stage.hpp"

namespace pmab {

// Independent UCB1 subproblems, one per context (phase or residue).
// Index: mean + width * sqrt(2 log N / n), N the context's pull count.
// Unpulled arms go first; index ties go to the lowest arm.
class UcbTable {
public:
    UcbTable() = default;
    UcbTable(std::size_t contexts, std::size_t num_arms, double width)
        : arms_(num_arms), width_(width), counts_(contexts * num_arms, 0), sums_(contexts * num_arms, 0.0),
          totals_(contexts, 0) {
        if (contexts < 1 || num_arms < 1) throw std::invalid_argument("UcbTable: empty table");
    }

    std::size_t contexts() const { return totals_.size(); }

    std::size_t choose(std::size_t ctx) const {
        const std::size_t base = ctx * arms_;
        for (std::size_t k = 0; k < arms_; ++k) {
            if (counts_[base + k] == 0) return k;
        }
        const double log_n = std::log(static_cast<double>(totals_[ctx]));
        std::size_t best = 0;
        double best_index = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < arms_; ++k) {
            const double n = static_cast<double>(counts_[base + k]);
            const double index = sums_[base + k] / n + width_ * std::sqrt(2.0 * log_n / n);
            if (index > best_index) {
                best_index = index;
                best = k;
            }
        }
        return best;
    }

    void update(std::size_t ctx, std::size_t arm, double reward) {
        counts_[ctx * arms_ + arm] += 1;
        sums_[ctx * arms_ + arm] += reward;
        totals_[ctx] += 1;
    }

    std::int64_t count(std::size_t ctx, std::size_t arm) const { return counts_[ctx * arms_ + arm]; }
    std::int64_t total(std::size_t ctx) const { return totals_[ctx]; }

private:
    std::size_t arms_ = 0;
    double width_ = 1.0;
    std::vector<std::int64_t> counts_;
    std::vector<double> sums_;
    std::vector<std::int64_t> totals_;
};

// Default is the textbook UCB1 bonus for rewards in [0, 1]; sigma_scaled
// multiplies it by the noise scale instead (sub-Gaussian UCB).
struct UcbParams {
    double scale = 1.0;
    bool sigma_scaled = false;

    double width(double sigma) const { return sigma_scaled ? scale * sigma : scale; }
};

// One UCB1 per phase t mod T1 of the known common period.
class PerPhaseUcb final : public Policy {
public:
    explicit PerPhaseUcb(UcbParams params = {}) : params_(params) {}

    std::string id() const override { return "per_phase_ucb"; }

    void reset(const PolicyContext& ctx) override {
        if (ctx.true_periods.size() != ctx.num_arms || ctx.num_arms < 1) {
            throw std::invalid_argument("per_phase_ucb: needs the common period");
        }
        for (auto p : ctx.true_periods) {
            if (p != ctx.true_periods.front()) throw std::invalid_argument("per_phase_ucb: arms must share one period");
        }
        period_ = ctx.true_periods.front();
        table_ = UcbTable(static_cast<std::size_t>(period_), ctx.num_arms, params_.width(ctx.sigma));
    }

    std::size_t select(Epoch t) override { return table_.choose(phase(t)); }
    void observe(Epoch t, std::size_t arm, double reward) override { table_.update(phase(t), arm, reward); }

    const UcbTable& table() const { return table_; }

private:
    std::size_t phase(Epoch t) const { return static_cast<std::size_t>(t % period_); }

    UcbParams params_;
    std::int64_t period_ = 1;
    UcbTable table_;
};

// Plain UCB1 that ignores periodicity.
class StationaryUcb final : public Policy {
public:
    explicit StationaryUcb(UcbParams params = {}) : params_(params) {}

    std::string id() const override { return "stationary_ucb"; }

    void reset(const PolicyContext& ctx) override { table_ = UcbTable(1, ctx.num_arms, params_.width(ctx.sigma)); }
    std::size_t select(Epoch) override { return table_.choose(0); }
    void observe(Epoch, std::size_t arm, double reward) override { table_.update(0, arm, reward); }

private:
    UcbParams params_;
    UcbTable table_;
};

struct LcmUcbParams {
    StageOneOverrides stage_one;
    UcbParams ucb;
};

// Runs the same stage one as the two-stage policy, then one UCB1 per
// residue t mod L with L = lcm of the estimated periods (capped at T).
// Stage-one rewards seed the tables.
class LcmUcbPolicy final : public Policy {
public:
    explicit LcmUcbPolicy(LcmUcbParams params = {}) : params_(std::move(params)) {}

    std::string id() const override { return "lcm_ucb"; }

    void reset(const PolicyContext& ctx) override {
        ctx_ = ctx;
        stage_one_ = StageOne(resolve_stage_one(params_.stage_one, ctx), ctx.num_arms);
        periods_.reset();
        lcm_ = 1;
        capped_ = false;
        table_ = {};
    }

    std::size_t select(Epoch t) override {
        if (stage_one_.contains(t)) return stage_one_.arm_at(t);
        return table_.choose(residue(t));
    }

    void observe(Epoch t, std::size_t arm, double reward) override {
        if (stage_one_.contains(t)) {
            stage_one_.record(t, arm, reward);
            if (t == stage_one_.length()) finish_stage_one();
            return;
        }
        table_.update(residue(t), arm, reward);
    }

    std::optional<std::vector<std::int64_t>> estimated_periods() const override { return periods_; }

    std::map<std::string, std::int64_t> diagnostics() const override {
        return {{"lcm", lcm_}, {"lcm_capped", capped_ ? 1 : 0}};
    }

    std::int64_t lcm() const { return lcm_; }

private:
    std::size_t residue(Epoch t) const { return static_cast<std::size_t>(t % lcm_); }

    void finish_stage_one() {
        std::vector<std::int64_t> periods;
        for (const auto& e : stage_one_.estimate()) periods.push_back(e.period_estimate);
        periods_ = periods;
        std::int64_t l = 1;
        for (auto p : periods) {
            const auto g = std::gcd(l, p);
            if (l / g > ctx_.horizon / p) {
                l = ctx_.horizon;
                capped_ = true;
                break;
            }
            l = l / g * p;
        }
        lcm_ = std::min<std::int64_t>(l, ctx_.horizon);
        capped_ = capped_ || l > ctx_.horizon;
        table_ = UcbTable(static_cast<std::size_t>(lcm_), ctx_.num_arms, params_.ucb.width(ctx_.sigma));
        Epoch t = 1;
        for (const auto& entry : stage_one_.log()) table_.update(residue(t++), entry.arm, entry.reward);
    }

    LcmUcbParams params_;
    PolicyContext ctx_;
    StageOne stage_one_;
    std::optional<std::vector<std::int64_t>> periods_;
    std::int64_t lcm_ = 1;
    bool capped_ = false;
    UcbTable table_;
};

}  // namespace pmab
