#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "pmab/harness.hpp"
#include "pmab/nested_cb.hpp"
#include "pmab/two_stage.hpp"

using namespace pmab;

TEST(Width, ClosedFormValue) {
    EXPECT_NEAR(confidence_width(12, 0, 8, 8e-4, 1.0), 2.14279323652, 1e-10);
    EXPECT_NEAR(confidence_width(0, 12, 8, 8e-4, 1.0), 2.14279323652, 1e-10);
}

TEST(Width, NoSamplesIsInfinite) { EXPECT_TRUE(std::isinf(confidence_width(0, 0, 8, 1e-3, 1.0))); }

TEST(Width, LinearInSigma) {
    EXPECT_NEAR(confidence_width(9, 4, 6, 1e-3, 0.6), 3 * confidence_width(9, 4, 6, 1e-3, 0.2), 1e-12);
}

TEST(Width, NonincreasingInRoundCountForSmallCounts) {
    for (std::int64_t bar = 2; bar <= 10; ++bar) {
        for (std::int64_t cur = 2; cur < 10; ++cur) {
            EXPECT_LE(confidence_width(bar, cur + 1, 8, 8e-4, 1.0), confidence_width(bar, cur, 8, 8e-4, 1.0)) << bar << " " << cur;
        }
    }
}

TEST(Width, NonincreasingOnceRoundCountCatchesUp) {
    for (std::int64_t bar = 2; bar <= 60; ++bar) {
        for (std::int64_t cur = bar; cur < 200; ++cur) {
            EXPECT_LE(confidence_width(bar, cur + 1, 8, 8e-4, 1.0), confidence_width(bar, cur, 8, 8e-4, 1.0)) << bar << " " << cur;
        }
    }
}

TEST(Width, FewRoundSamplesCanWidenAgainstALargeStageOneSet) {
    // the round term's weight grows faster than its own width shrinks
    EXPECT_GT(confidence_width(40, 3, 8, 8e-4, 1.0), confidence_width(40, 2, 8, 8e-4, 1.0));
}

TEST(Counting, SamePhaseFromLog) {
    const std::vector<std::size_t> actions(8, 0);
    const std::vector<Epoch> psi{1, 2, 3, 4, 5, 6, 7, 8};
    EXPECT_EQ(count_same_phase(actions, psi, 0, 9, 4), 2);
    EXPECT_EQ(count_same_phase(actions, std::vector<Epoch>{}, 0, 9, 4), 0);
    EXPECT_EQ(count_same_phase(actions, psi, 1, 9, 4), 0);
}

TEST(Counting, StageOneBlockCoversEveryPhaseTwice) {
    const std::int64_t n = 50;
    for (std::int64_t period = 1; period < n / 2; ++period) {
        NestedCbState st({period, 1}, 1.0, 1000, 0.01);
        for (Epoch t = 1; t <= n; ++t) st.record(t, 0, 0.0, kStageOneSet);
        for (Epoch t = 1; t <= period; ++t) EXPECT_GE(st.count(kStageOneSet, 0, t), 2);
    }
}

TEST(PhaseMean, SingleSample) {
    NestedCbState st({3}, 1.0, 100, 0.01);
    st.record(1, 0, 0.7, kStageOneSet);
    EXPECT_DOUBLE_EQ(st.phase_mean(1, 0, 4), 0.7);
    EXPECT_THROW(st.phase_mean(1, 0, 2), std::logic_error);
}

TEST(PhaseMean, WeightedCombinationOfSets) {
    NestedCbState st({2}, 1.0, 100, 0.01);
    st.record(1, 0, 1.0, kStageOneSet);
    st.record(2, 0, 9.0, kStageOneSet);
    st.record(3, 0, 3.0, kStageOneSet);
    st.record(4, 0, 9.0, 1);
    st.record(5, 0, 8.0, 1);
    st.record(6, 0, 9.0, 2);
    // phase of odd epochs: bar {1, 3}, round one {8}
    const double bar_mean = 2.0, cur_mean = 8.0;
    EXPECT_DOUBLE_EQ(st.phase_mean(1, 0, 7), (2 * bar_mean + 1 * cur_mean) / 3);
    EXPECT_DOUBLE_EQ(st.phase_mean(2, 0, 7), bar_mean);
}

TEST(PhaseMean, NoiseFreeRecoversProfile) {
    const MeanProfile p({0.1, 0.5, 0.3});
    NestedCbState st({3}, 0.5, 100, 0.01);
    for (Epoch t = 1; t <= 30; ++t) st.record(t, 0, p.at(t), kStageOneSet);
    for (Epoch t = 31; t <= 33; ++t) EXPECT_DOUBLE_EQ(st.phase_mean(1, 0, t), p.at(t));
}

TEST(Tournament, ExploitWhenAllNarrow) {
    NestedCbState st({1, 1}, 1.0, 100, 0.08);
    Epoch t = 1;
    for (int i = 0; i < 10000; ++i) st.record(t++, 0, 0.4, kStageOneSet);
    for (int i = 0; i < 10000; ++i) st.record(t++, 1, 0.6, kStageOneSet);
    ASSERT_LE(st.phase_width(1, 0, t), 0.1);
    const auto d = st.decide(t);
    EXPECT_EQ(d.arm, 1u);
    EXPECT_EQ(d.index_set, kNoSet);
    EXPECT_EQ(d.rounds_evaluated, 1);
}

TEST(Tournament, WidePullJoinsRoundSet) {
    NestedCbState st({2, 2}, 1.0, 10000, 8e-4);
    Epoch t = 1;
    for (int i = 0; i < 4; ++i) st.record(t++, 0, 0.5, kStageOneSet);
    for (int i = 0; i < 4; ++i) st.record(t++, 1, 0.5, kStageOneSet);
    ASSERT_GT(st.phase_width(1, 0, t), 0.5);
    const auto d = st.decide(t);
    EXPECT_EQ(d.arm, 0u);
    EXPECT_EQ(d.index_set, 1);
    EXPECT_FALSE(d.forced_by_zero_count);
}

TEST(Tournament, ZeroCountPhaseIsForced) {
    NestedCbState st({7}, 1.0, 1000, 0.01);
    for (Epoch t = 1; t <= 3; ++t) st.record(t, 0, 0.5, kStageOneSet);
    const auto d = st.decide(4);  // phase 4 mod 7 never seen
    EXPECT_TRUE(d.forced_by_zero_count);
    EXPECT_EQ(d.index_set, 1);
}

TEST(Tournament, RoundCapIsFloorLog2) {
    EXPECT_EQ(NestedCbState({1}, 1.0, 2000, 0.01).max_rounds(), 10);
    EXPECT_EQ(NestedCbState({1}, 1.0, 1024, 0.01).max_rounds(), 10);
    EXPECT_EQ(NestedCbState({1}, 1.0, 1023, 0.01).max_rounds(), 9);
}

namespace {

BanditInstance three_arm(double sigma, Epoch T) {
    return BanditInstance({MeanProfile({0.2, 0.8}), MeanProfile({0.9, 0.1, 0.1}), MeanProfile({0.75, 0.75, 0.05, 0.05})},
                          NoiseModel{NoiseKind::gaussian, sigma}, T);
}

}  // namespace

TEST(Tournament, SetsPartitionAndTerminate) {
    const auto inst = three_arm(0.3, 6000);
    TwoStagePolicy policy(TwoStageParams{{}, {}, true});
    run_episode(inst, policy, 5);
    const auto* st = policy.state();
    ASSERT_NE(st, nullptr);
    const auto labels = st->labels();
    ASSERT_EQ(static_cast<Epoch>(labels.size()), inst.horizon());
    const Epoch stage_one = policy.stage_one().length();
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (static_cast<Epoch>(i) < stage_one) {
            EXPECT_EQ(labels[i], kStageOneSet);
        } else {
            EXPECT_NE(labels[i], kStageOneSet);
            EXPECT_GE(labels[i], kNoSet);
            EXPECT_LE(labels[i], st->max_rounds());
        }
    }
    std::size_t total = 0;
    for (int s = kNoSet; s <= st->max_rounds(); ++s) total += st->index_set(s).size();
    EXPECT_EQ(total, labels.size());
    EXPECT_LE(policy.diagnostics().at("max_rounds_evaluated"), st->max_rounds() + 1);
    EXPECT_EQ(st->d_hat(), 9);
}

TEST(Tournament, EliminationOnlyBelowCutoff) {
    const auto inst = three_arm(0.3, 6000);
    TwoStagePolicy policy(TwoStageParams{{}, {}, true});
    run_episode(inst, policy, 11);
    const auto* st = policy.state();
    int eliminations = 0;
    for (Epoch t = policy.stage_one().length() + 1; t <= inst.horizon(); t += 7) {
        std::vector<RoundRecord> trace;
        st->decide(t, &trace);
        for (const auto& r : trace) {
            if (r.branch != Branch::eliminate) continue;
            const double best = *std::max_element(r.means.begin(), r.means.end());
            for (std::size_t k : r.eliminated) {
                const auto it = std::find(r.active.begin(), r.active.end(), k);
                const double m = r.means[static_cast<std::size_t>(it - r.active.begin())];
                EXPECT_LT(m, best - std::ldexp(st->sigma(), 1 - r.round));
                ++eliminations;
            }
        }
    }
    EXPECT_GT(eliminations, 0);
}

TEST(Tournament, DominatedArmRarelyPulledLate) {
    const BanditInstance inst({MeanProfile::constant(0.7), MeanProfile::constant(0.3)}, NoiseModel{NoiseKind::gaussian, 0.5}, 2000);
    std::int64_t late = 0, bad = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        TwoStagePolicy policy;
        const auto run = run_episode(inst, policy, seed);
        for (std::size_t i = 1000; i < run.actions.size(); ++i) {
            ++late;
            bad += run.actions[i] == 1;
        }
    }
    EXPECT_LT(static_cast<double>(bad) / static_cast<double>(late), 0.05);
}
