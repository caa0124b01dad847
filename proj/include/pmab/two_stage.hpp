#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmab/nested_cb.hpp"
#include "pmab/policy.hpp"
#include "pmab/spectral.hpp"

namespace pmab {

// Overrides for the stage-one parameters; unset fields fall back to the
// recommended (n, g, H) for (T, K) and t_max = largest integer below n/(2g).
struct StageOneOverrides {
    std::optional<std::int64_t> n;
    std::optional<std::int64_t> g;
    std::optional<double> H;
    std::optional<std::int64_t> t_max;
};

inline spectral::StageOneParams resolve_stage_one(const StageOneOverrides& o, const PolicyContext& ctx) {
    spectral::StageOneParams p;
    p.n = o.n ? *o.n : recommended_parameters(ctx.horizon, ctx.num_arms).n;
    if (p.n < 2) throw std::invalid_argument("stage one: n must be at least 2");
    const auto derived = parameters_for_block(p.n);
    p.g = o.g.value_or(derived.g);
    p.H = o.H.value_or(derived.H);
    p.sigma = ctx.sigma;
    p.t_max = o.t_max;
    return p;
}

// Explores each arm for n consecutive epochs and keeps the blocks.
class StageOne {
public:
    StageOne() = default;

    StageOne(spectral::StageOneParams params, std::size_t num_arms)
        : params_(params), num_arms_(num_arms), blocks_(num_arms) {}

    const spectral::StageOneParams& params() const { return params_; }
    Epoch length() const { return params_.n * static_cast<Epoch>(num_arms_); }
    bool contains(Epoch t) const { return t >= 1 && t <= length(); }
    std::size_t arm_at(Epoch t) const { return stage_one_schedule(t, params_.n, num_arms_); }

    void record(Epoch t, std::size_t arm, double reward) {
        blocks_[arm].samples.push_back(reward);
        blocks_[arm].epochs.push_back(t);
        log_.push_back({arm, reward});
    }

    std::vector<spectral::FrequencyEstimate> estimate() const { return spectral::estimate_periods(blocks_, params_); }

    const std::vector<spectral::SampleBlock>& blocks() const { return blocks_; }

    struct Entry {
        std::size_t arm;
        double reward;
    };
    const std::vector<Entry>& log() const { return log_; }

private:
    spectral::StageOneParams params_;
    std::size_t num_arms_ = 0;
    std::vector<spectral::SampleBlock> blocks_;
    std::vector<Entry> log_;
};

struct TwoStageParams {
    StageOneOverrides stage_one;
    std::optional<double> delta;  // defaults to 8/T
    bool oracle = false;          // act on the true periods instead of the estimates
};

// Stage one feeds period estimation; stage two runs the nested
// confidence-bound tournament, reusing the stage-one rewards. The oracle
// variant is the same policy with the true periods substituted.
class TwoStagePolicy final : public Policy {
public:
    explicit TwoStagePolicy(TwoStageParams params = {}) : params_(std::move(params)) {}

    std::string id() const override { return params_.oracle ? "oracle" : "two_stage"; }

    void reset(const PolicyContext& ctx) override {
        ctx_ = ctx;
        stage_one_ = StageOne(resolve_stage_one(params_.stage_one, ctx), ctx.num_arms);
        estimates_.clear();
        acting_periods_.reset();
        state_.reset();
        pending_ = {};
        forced_ = exploit_ = cap_hits_ = 0;
        max_rounds_evaluated_ = 0;
        if (params_.oracle && ctx.true_periods.size() != ctx.num_arms) {
            throw std::invalid_argument("oracle policy needs the true periods");
        }
    }

    std::size_t select(Epoch t) override {
        if (stage_one_.contains(t)) return stage_one_.arm_at(t);
        if (!state_) throw std::logic_error("two-stage policy: stage two reached before stage one completed");
        pending_ = state_->decide(t);
        max_rounds_evaluated_ = std::max(max_rounds_evaluated_, pending_.rounds_evaluated);
        return pending_.arm;
    }

    void observe(Epoch t, std::size_t arm, double reward) override {
        if (stage_one_.contains(t)) {
            stage_one_.record(t, arm, reward);
            if (t == stage_one_.length()) finish_stage_one();
            return;
        }
        if (arm != pending_.arm) throw std::logic_error("two-stage policy: observed arm differs from the selected arm");
        if (pending_.forced_by_zero_count) ++forced_;
        if (pending_.index_set == kNoSet) ++exploit_;
        if (pending_.round_cap_hit) ++cap_hits_;
        state_->record(t, arm, reward, pending_.index_set);
    }

    std::optional<std::vector<std::int64_t>> estimated_periods() const override { return acting_periods_; }

    std::map<std::string, std::int64_t> diagnostics() const override {
        return {{"stage_one_length", stage_one_.length()},
                {"zero_count_forced_pulls", forced_},
                {"exploit_pulls", exploit_},
                {"round_cap_hits", cap_hits_},
                {"max_rounds_evaluated", max_rounds_evaluated_}};
    }

    const std::vector<spectral::FrequencyEstimate>& frequency_estimates() const { return estimates_; }
    const NestedCbState* state() const { return state_ ? &*state_ : nullptr; }
    const StageOne& stage_one() const { return stage_one_; }

private:
    void finish_stage_one() {
        std::vector<std::int64_t> periods;
        if (params_.oracle) {
            periods = ctx_.true_periods;
        } else {
            estimates_ = stage_one_.estimate();
            for (const auto& e : estimates_) periods.push_back(e.period_estimate);
        }
        acting_periods_ = periods;
        if (ctx_.horizon <= stage_one_.length()) return;
        const double delta = params_.delta.value_or(8.0 / static_cast<double>(ctx_.horizon));
        state_.emplace(periods, ctx_.sigma, ctx_.horizon, delta);
        Epoch t = 1;
        for (const auto& entry : stage_one_.log()) state_->record(t++, entry.arm, entry.reward, kStageOneSet);
    }

    TwoStageParams params_;
    PolicyContext ctx_;
    StageOne stage_one_;
    std::vector<spectral::FrequencyEstimate> estimates_;
    std::optional<std::vector<std::int64_t>> acting_periods_;
    std::optional<NestedCbState> state_;
    Decision pending_;
    std::int64_t forced_ = 0;
    std::int64_t exploit_ = 0;
    std::int64_t cap_hits_ = 0;
    int max_rounds_evaluated_ = 0;
};

}  // namespace pmab
