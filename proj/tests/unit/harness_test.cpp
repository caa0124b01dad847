#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "pmab/pmab.hpp"

using namespace pmab;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_config(int replications, unsigned threads = 1) {
    auto j = nlohmann::json::parse(R"({
        "instance": {"arms": [{"values": [0.2, 0.8]}, {"values": [0.9, 0.1, 0.1]}], "noise": {"sigma": 0.1}, "horizon": 2000},
        "policies": ["two_stage", "oracle", "stationary_ucb", {"id": "lcm_ucb", "params": {"sigma_scaled": true}}],
        "horizons": [1000, 2000],
        "base_seed": 100,
        "curve_stride": 250})");
    j["replications"] = replications;
    j["threads"] = threads;
    return j;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("pmab_harness_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST(Episode, SameSeedSameResult) {
    const auto inst = instance_from_json(small_config(1)["instance"]);
    auto p = make_policy("two_stage");
    const auto a = run_episode(inst, *p, 4);
    const auto b = run_episode(inst, *p, 4);
    EXPECT_EQ(a.actions, b.actions);
    EXPECT_EQ(a.rewards, b.rewards);
    EXPECT_EQ(a.cumulative_regret, b.cumulative_regret);
    EXPECT_EQ(a.seed, 4u);
    EXPECT_EQ(a.policy_id, "two_stage");
}

TEST(Episode, IncompatiblePolicyThrows) {
    const auto inst = instance_from_json(small_config(1)["instance"]);
    auto p = make_policy("seq_elim");
    EXPECT_THROW(run_episode(inst, *p, 0), std::invalid_argument);
    EXPECT_THROW(make_policy("thompson"), std::invalid_argument);
}

TEST(MonteCarlo, SingleReplicationMean) {
    const auto config = ExperimentConfig::from_json(small_config(1));
    const auto res = monte_carlo(config);
    const auto inst = instance_from_json(config.instance).with_horizon(2000);
    auto p = make_policy("two_stage");
    const auto run = run_episode(inst, *p, 100);
    EXPECT_EQ(res.stat("two_stage", 2000).mean_regret, run.final_regret());
    EXPECT_EQ(res.stat("two_stage", 2000).std_error, 0.0);
}

TEST(MonteCarlo, PrefixProperty) {
    const auto small = monte_carlo(ExperimentConfig::from_json(small_config(3)));
    const auto big = monte_carlo(ExperimentConfig::from_json(small_config(6)));
    for (const auto& r : small.replications) {
        bool found = false;
        for (const auto& q : big.replications) {
            if (q.policy == r.policy && q.horizon == r.horizon && q.replication == r.replication) {
                EXPECT_EQ(q.seed, r.seed);
                EXPECT_EQ(q.final_regret, r.final_regret);
                EXPECT_EQ(q.curve, r.curve);
                found = true;
            }
        }
        EXPECT_TRUE(found);
    }
}

TEST(MonteCarlo, StatsFromReplications) {
    const auto res = monte_carlo(ExperimentConfig::from_json(small_config(5)));
    const auto& s = res.stat("oracle", 1000);
    std::vector<double> v;
    for (const auto& r : res.replications) {
        if (r.policy == "oracle" && r.horizon == 1000) v.push_back(r.final_regret);
    }
    ASSERT_EQ(v.size(), 5u);
    double mean = 0.0;
    for (double x : v) mean += x / 5.0;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    EXPECT_NEAR(s.mean_regret, mean, 1e-12);
    EXPECT_NEAR(s.std_error, std::sqrt(ss / 4.0) / std::sqrt(5.0), 1e-12);
    ASSERT_TRUE(s.success_rate.has_value());
    EXPECT_EQ(*s.success_rate, 1.0);
    EXPECT_FALSE(res.stat("stationary_ucb", 1000).success_rate.has_value());
    EXPECT_TRUE(res.slopes.contains("two_stage"));
}

TEST(MonteCarlo, ThreadsDoNotChangeResults) {
    const auto one = monte_carlo(ExperimentConfig::from_json(small_config(4, 1)));
    const auto four = monte_carlo(ExperimentConfig::from_json(small_config(4, 4)));
    EXPECT_EQ(regret_curves_csv(one), regret_curves_csv(four));
    EXPECT_EQ(summary_json(one).dump(), summary_json(four).dump());
    EXPECT_EQ(one.config_hash, four.config_hash);
}

TEST(Slope, SyntheticPowerLaws) {
    std::vector<Epoch> T;
    std::vector<double> root, linear;
    for (int i = 0; i < 12; ++i) {
        T.push_back(static_cast<Epoch>(1000 * std::pow(1.5, i)));
        root.push_back(3.0 * std::sqrt(static_cast<double>(T.back())));
        linear.push_back(0.2 * static_cast<double>(T.back()));
    }
    EXPECT_NEAR(loglog_slope(T, root).slope, 0.5, 0.01);
    EXPECT_NEAR(loglog_slope(T, linear).slope, 1.0, 0.01);
    EXPECT_EQ(loglog_slope(T, root).used.size(), 6u);
}

TEST(Slope, NonpositivePointsAreSkipped) {
    const std::vector<Epoch> T{100, 200, 400, 800};
    const std::vector<double> r{1.0, 0.0, 20.0, 40.0};
    const auto fit = loglog_slope(T, r, 1.0);
    EXPECT_EQ(fit.skipped, (std::vector<Epoch>{200}));
    EXPECT_EQ(fit.used, (std::vector<Epoch>{100, 400, 800}));
    EXPECT_THROW(loglog_slope(T, std::vector<double>{0, 0, 0, 0}), std::invalid_argument);
}

TEST(Overlay, FailureAndEnvelope) {
    const double H = std::sqrt(1.0 + std::log(50.0));
    EXPECT_NEAR(bound_overlay(10000, 9, 5, 50, H).failure_bound, 0.08373662153, 1e-10);
    EXPECT_EQ(bound_overlay(10000, 9, 5, 50, H, 0.0).rate_envelope, 0.0);
    const double ratio = bound_overlay(40000, 9, 3, 50, H).rate_envelope / bound_overlay(10000, 9, 3, 50, H).rate_envelope;
    EXPECT_GT(ratio, 2.0);
    EXPECT_LT(ratio, 2.6);
    EXPECT_EQ(bound_overlay(5, 9, 3, 50, H).rate_envelope, 0.0);
}

TEST(Config, Validation) {
    auto j = small_config(2);
    j["horizons"] = {2000, 1000};
    EXPECT_THROW(ExperimentConfig::from_json(j), std::invalid_argument);
    j = small_config(0);
    EXPECT_THROW(ExperimentConfig::from_json(j), std::invalid_argument);
    j = small_config(2);
    j["policies"] = {"bogus"};
    EXPECT_THROW(ExperimentConfig::from_json(j), std::invalid_argument);
    j = small_config(2);
    j.erase("instance");
    EXPECT_THROW(ExperimentConfig::from_json(j), std::invalid_argument);
}

TEST(Config, NamespacedParamsAndHash) {
    auto j = small_config(2);
    j["policy_params"] = {{"two_stage", {{"t_max", 6}}}};
    const auto c = ExperimentConfig::from_json(j);
    EXPECT_EQ(c.policies[0].params.at("t_max"), 6);
    EXPECT_NE(c.hash(), ExperimentConfig::from_json(small_config(2)).hash());
    EXPECT_EQ(ExperimentConfig::from_json(small_config(2, 1)).hash(), ExperimentConfig::from_json(small_config(2, 8)).hash());
    EXPECT_EQ(c.hash().size(), 16u);
}

TEST(Output, CsvSchemaAndReport) {
    const auto config = ExperimentConfig::from_json(small_config(3));
    const auto res = monte_carlo(config);
    const auto dir = scratch("report");
    write_outputs(dir, config, res);
    const auto csv = read_text(dir / "regret_curves.csv");
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "policy,T,replication,t,cum_regret");
    for (const char* f : {"summary.json", "run_meta.json", "config.json"}) EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto meta = read_json_file((dir / "run_meta.json").string());
    EXPECT_EQ(meta.at("config_hash"), res.config_hash);
    EXPECT_EQ(meta.at("seeds"), (std::vector<int>{100, 101, 102}));

    const auto again = report(dir);
    EXPECT_EQ(read_text(dir / "regret_curves.csv"), csv);
    ASSERT_EQ(again.stats.size(), res.stats.size());
    for (std::size_t i = 0; i < res.stats.size(); ++i) {
        EXPECT_NEAR(again.stats[i].mean_regret, res.stats[i].mean_regret, 1e-12);
        EXPECT_NEAR(again.stats[i].std_error, res.stats[i].std_error, 1e-12);
        EXPECT_EQ(again.stats[i].success_rate, res.stats[i].success_rate);
    }
    EXPECT_EQ(again.config_hash, res.config_hash);
    fs::remove_all(dir);
}

TEST(Output, NumberFormattingRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 12345.678901234567, 0.0, -2.5e-17}) EXPECT_EQ(parse_double(format_double(v)), v);
    EXPECT_THROW(parse_double("1.0x"), std::invalid_argument);
    EXPECT_EQ(parse_int("42"), 42);
    EXPECT_EQ(split_csv_line("a,b,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
}
