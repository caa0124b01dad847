#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <thread>
#include <vector>

#include <json.hpp>

#include "pmab/environment.hpp"
#include "pmab/instance_io.hpp"
#include "pmab/policies.hpp"
#include "pmab/spectral.hpp"

namespace pmab {

inline constexpr const char* kVersion = "0.1.0";

// Plays t = 1..T. Noise is keyed by (seed, t) only, so every policy facing
// the same instance and seed sees the same noise sequence.
inline RunResult run_episode(const BanditInstance& instance, Policy& policy, std::uint64_t seed) {
    policy.reset(PolicyContext::from_instance(instance));
    const NoiseStream stream(seed);
    const Epoch horizon = instance.horizon();
    RunResult r;
    r.seed = seed;
    r.policy_id = policy.id();
    r.actions.reserve(static_cast<std::size_t>(horizon));
    r.rewards.reserve(static_cast<std::size_t>(horizon));
    for (Epoch t = 1; t <= horizon; ++t) {
        const std::size_t arm = policy.select(t);
        if (arm >= instance.num_arms()) throw std::logic_error(policy.id() + ": selected arm out of range");
        const double reward = sample_reward(instance, arm, t, stream);
        policy.observe(t, arm, reward);
        r.actions.push_back(arm);
        r.rewards.push_back(reward);
    }
    auto trace = pseudo_regret(instance, r.actions);
    r.gaps = std::move(trace.gaps);
    r.cumulative_regret = std::move(trace.cumulative_regret);
    r.estimated_periods = policy.estimated_periods();
    return r;
}

// ---------------------------------------------------------------- numbers

inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    if (res.ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("not a number: '" + std::string(s) + "'");
    }
    return v;
}

inline std::int64_t parse_int(std::string_view s) {
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw std::invalid_argument("not an integer: '" + std::string(s) + "'");
    }
    return v;
}

// FNV-1a 64 over the canonical (key-sorted, compact) JSON dump.
inline std::string config_hash(const nlohmann::json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

// ---------------------------------------------------------------- config

struct PolicySpec {
    std::string id;
    nlohmann::json params = nlohmann::json::object();
};

struct ExperimentConfig {
    nlohmann::json instance;  // resolved inline instance description
    std::vector<PolicySpec> policies;
    std::vector<Epoch> horizons;
    int replications = 1;
    std::uint64_t base_seed = 0;
    unsigned threads = 1;
    Epoch curve_stride = 100;
    double slope_tail_fraction = 0.5;
    double envelope_constant = 1.0;
    std::string output_dir;

    // Relative instance paths resolve against base_dir.
    static ExperimentConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
        ExperimentConfig c;
        if (j.contains("instance") && j.at("instance").is_string()) {
            std::filesystem::path p = j.at("instance").get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            c.instance = read_json_file(p.string());
        } else if (j.contains("instance")) {
            c.instance = j.at("instance");
        } else {
            throw std::invalid_argument("config: missing instance");
        }
        const auto params = j.value("policy_params", nlohmann::json::object());
        for (const auto& p : j.at("policies")) {
            PolicySpec spec;
            if (p.is_string()) {
                spec.id = p.get<std::string>();
            } else {
                spec.id = p.at("id").get<std::string>();
                spec.params = p.value("params", nlohmann::json::object());
            }
            if (params.contains(spec.id)) spec.params.update(params.at(spec.id));
            make_policy(spec.id, spec.params);
            c.policies.push_back(std::move(spec));
        }
        if (c.policies.empty()) throw std::invalid_argument("config: no policies");
        const auto base = instance_from_json(c.instance);
        if (j.contains("horizons")) {
            c.horizons = j.at("horizons").get<std::vector<Epoch>>();
        } else {
            c.horizons = {base.horizon()};
        }
        c.replications = j.value("replications", 1);
        c.base_seed = j.value("base_seed", std::uint64_t{0});
        c.threads = j.value("threads", 1u);
        c.curve_stride = j.value("curve_stride", Epoch{100});
        c.slope_tail_fraction = j.value("slope_tail_fraction", 0.5);
        c.envelope_constant = j.value("envelope_constant", 1.0);
        c.output_dir = j.value("output_dir", std::string{});
        c.validate();
        return c;
    }

    void validate() const {
        if (replications < 1) throw std::invalid_argument("config: replications must be at least 1");
        if (horizons.empty()) throw std::invalid_argument("config: no horizons");
        for (std::size_t i = 0; i < horizons.size(); ++i) {
            if (horizons[i] < 1) throw std::invalid_argument("config: horizons must be positive");
            if (i > 0 && horizons[i] <= horizons[i - 1]) throw std::invalid_argument("config: horizons must be strictly increasing");
        }
        if (curve_stride < 1) throw std::invalid_argument("config: curve_stride must be positive");
        if (!(slope_tail_fraction > 0.0 && slope_tail_fraction <= 1.0)) {
            throw std::invalid_argument("config: slope_tail_fraction must lie in (0, 1]");
        }
    }

    // Canonical form; hashed and written next to every output. threads and
    // output_dir do not affect results and are left out.
    nlohmann::json to_json() const {
        nlohmann::json pols = nlohmann::json::array();
        for (const auto& p : policies) pols.push_back({{"id", p.id}, {"params", p.params}});
        return {{"instance", instance},
                {"policies", pols},
                {"horizons", horizons},
                {"replications", replications},
                {"base_seed", base_seed},
                {"curve_stride", curve_stride},
                {"slope_tail_fraction", slope_tail_fraction},
                {"envelope_constant", envelope_constant}};
    }

    std::string hash() const { return config_hash(to_json()); }
};

// ---------------------------------------------------------------- results

struct ReplicationResult {
    std::string policy;
    Epoch horizon = 0;
    int replication = 0;
    std::uint64_t seed = 0;
    double final_regret = 0.0;
    std::optional<bool> periods_correct;  // empty for policies that estimate nothing
    std::vector<std::pair<Epoch, double>> curve;
};

struct AggregateStats {
    std::string policy;
    Epoch horizon = 0;
    int replications = 0;
    double mean_regret = 0.0;
    double std_error = 0.0;
    std::optional<double> success_rate;
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    std::vector<Epoch> used;
    std::vector<Epoch> skipped;  // nonpositive regret
};

// OLS of log(regret) on log(T) over the last ceil(fraction * m) points.
inline SlopeFit loglog_slope(std::span<const Epoch> horizons, std::span<const double> regrets, double tail_fraction = 0.5) {
    if (horizons.size() != regrets.size()) throw std::invalid_argument("loglog_slope: size mismatch");
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) throw std::invalid_argument("loglog_slope: tail fraction must lie in (0, 1]");
    const std::size_t m = horizons.size();
    const auto tail = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(tail_fraction * static_cast<double>(m))));
    if (m < 2 || tail > m) throw std::invalid_argument("loglog_slope: need at least 2 points");
    SlopeFit fit;
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t i = m - tail; i < m; ++i) {
        if (!(regrets[i] > 0.0)) {
            fit.skipped.push_back(horizons[i]);
            continue;
        }
        fit.used.push_back(horizons[i]);
        xs.push_back(std::log(static_cast<double>(horizons[i])));
        ys.push_back(std::log(regrets[i]));
    }
    if (xs.size() < 2) throw std::invalid_argument("loglog_slope: fewer than 2 positive points in the tail");
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("loglog_slope: horizons must differ");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

struct BoundOverlay {
    double failure_bound = 0.0;
    double rate_envelope = 0.0;
};

// Failure bound of stage one and C * sqrt(T d log^2 T log(T/d)); the
// envelope is 0 when T <= d.
inline BoundOverlay bound_overlay(Epoch horizon, std::int64_t d, std::int64_t num_arms, std::int64_t n, double H,
                                  double constant = 1.0) {
    if (horizon < 1 || d < 1) throw std::invalid_argument("bound_overlay: T and d must be positive");
    BoundOverlay b;
    b.failure_bound = spectral::failure_probability_bound(n, num_arms, H);
    const double T = static_cast<double>(horizon);
    const double ratio = std::log(T / static_cast<double>(d));
    const double lt = std::log(T);
    b.rate_envelope = ratio > 0.0 ? constant * std::sqrt(T * static_cast<double>(d) * lt * lt * ratio) : 0.0;
    return b;
}

inline std::vector<std::pair<Epoch, double>> sample_curve(std::span<const double> cumulative, Epoch stride) {
    std::vector<std::pair<Epoch, double>> out;
    const auto T = static_cast<Epoch>(cumulative.size());
    for (Epoch t = stride; t < T; t += stride) out.emplace_back(t, cumulative[static_cast<std::size_t>(t - 1)]);
    if (T > 0) out.emplace_back(T, cumulative.back());
    return out;
}

inline AggregateStats aggregate(const std::string& policy, Epoch horizon, std::span<const ReplicationResult> reps) {
    AggregateStats s;
    s.policy = policy;
    s.horizon = horizon;
    s.replications = static_cast<int>(reps.size());
    if (reps.empty()) return s;
    double sum = 0.0;
    for (const auto& r : reps) sum += r.final_regret;
    s.mean_regret = sum / static_cast<double>(reps.size());
    if (reps.size() > 1) {
        double ss = 0.0;
        for (const auto& r : reps) ss += (r.final_regret - s.mean_regret) * (r.final_regret - s.mean_regret);
        const double sd = std::sqrt(ss / static_cast<double>(reps.size() - 1));
        s.std_error = sd / std::sqrt(static_cast<double>(reps.size()));
    }
    std::size_t judged = 0, correct = 0;
    for (const auto& r : reps) {
        if (!r.periods_correct) continue;
        ++judged;
        correct += *r.periods_correct ? 1 : 0;
    }
    if (judged > 0) s.success_rate = static_cast<double>(correct) / static_cast<double>(judged);
    return s;
}

struct ExperimentResult {
    std::string config_hash;
    std::vector<ReplicationResult> replications;  // ordered by (policy, T, replication)
    std::vector<AggregateStats> stats;            // ordered by (policy, T)
    std::map<std::string, SlopeFit> slopes;
    std::vector<std::pair<Epoch, BoundOverlay>> bounds;

    const AggregateStats& stat(const std::string& policy, Epoch horizon) const {
        for (const auto& s : stats) {
            if (s.policy == policy && s.horizon == horizon) return s;
        }
        throw std::out_of_range("no stats for " + policy + " at T=" + std::to_string(horizon));
    }
};

// Stats, slopes and overlays from replication results already in order.
inline ExperimentResult summarize(const ExperimentConfig& config, std::vector<ReplicationResult> reps) {
    ExperimentResult out;
    out.config_hash = config.hash();
    out.replications = std::move(reps);
    const auto R = static_cast<std::size_t>(config.replications);
    std::size_t offset = 0;
    for (const auto& p : config.policies) {
        std::vector<double> means;
        for (Epoch T : config.horizons) {
            std::span<const ReplicationResult> block(out.replications.data() + offset, R);
            offset += R;
            out.stats.push_back(aggregate(p.id, T, block));
            means.push_back(out.stats.back().mean_regret);
        }
        if (config.horizons.size() >= 2) {
            try {
                out.slopes[p.id] = loglog_slope(config.horizons, means, config.slope_tail_fraction);
            } catch (const std::invalid_argument&) {
                // no usable tail (e.g. all-zero regret); reported as absent
            }
        }
    }
    const auto base = instance_from_json(config.instance);
    const auto periods = base.periods();
    std::int64_t d = 0;
    for (auto p : periods) d += p;
    nlohmann::json stage_params = nlohmann::json::object();
    for (const auto& p : config.policies) {
        if (p.id == "two_stage") stage_params = p.params;
    }
    for (Epoch T : config.horizons) {
        try {
            const auto ctx = PolicyContext::from_instance(base.with_horizon(T));
            const auto sp = resolve_stage_one(stage_one_from_json(stage_params), ctx);
            out.bounds.emplace_back(T, bound_overlay(T, d, static_cast<std::int64_t>(base.num_arms()), sp.n, sp.H,
                                                     config.envelope_constant));
        } catch (const std::exception&) {
            // horizon too short for stage one; no overlay
        }
    }
    return out;
}

// Replication r of every (policy, T) uses seed base_seed + r. Work is spread
// over threads; results land in fixed slots so output order never changes.
inline ExperimentResult monte_carlo(const ExperimentConfig& config) {
    config.validate();
    const auto base = instance_from_json(config.instance);
    const auto true_periods = base.periods();
    const std::size_t R = static_cast<std::size_t>(config.replications);
    const std::size_t per_policy = config.horizons.size() * R;
    const std::size_t total = config.policies.size() * per_policy;
    std::vector<ReplicationResult> results(total);

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= total) return;
            try {
                const auto& spec = config.policies[i / per_policy];
                const Epoch T = config.horizons[(i % per_policy) / R];
                const int r = static_cast<int>(i % R);
                const auto instance = base.with_horizon(T);
                auto policy = make_policy(spec.id, spec.params);
                const std::uint64_t seed = config.base_seed + static_cast<std::uint64_t>(r);
                const auto run = run_episode(instance, *policy, seed);
                ReplicationResult& out = results[i];
                out.policy = spec.id;
                out.horizon = T;
                out.replication = r;
                out.seed = seed;
                out.final_regret = run.final_regret();
                if (run.estimated_periods) out.periods_correct = *run.estimated_periods == true_periods;
                out.curve = sample_curve(run.cumulative_regret, config.curve_stride);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(total);
            }
        }
    };
    const unsigned n_threads = std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(total)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return summarize(config, std::move(results));
}

// ---------------------------------------------------------------- output

inline std::string regret_curves_csv(const ExperimentResult& result) {
    std::string out = "policy,T,replication,t,cum_regret\n";
    for (const auto& r : result.replications) {
        const std::string prefix = r.policy + "," + std::to_string(r.horizon) + "," + std::to_string(r.replication) + ",";
        for (const auto& [t, v] : r.curve) out += prefix + std::to_string(t) + "," + format_double(v) + "\n";
    }
    return out;
}

inline nlohmann::json summary_json(const ExperimentResult& result) {
    nlohmann::json stats = nlohmann::json::array();
    for (const auto& s : result.stats) {
        nlohmann::json row{{"policy", s.policy},
                           {"T", s.horizon},
                           {"replications", s.replications},
                           {"mean_regret", s.mean_regret},
                           {"std_error", s.std_error}};
        row["success_rate"] = s.success_rate ? nlohmann::json(*s.success_rate) : nlohmann::json(nullptr);
        stats.push_back(row);
    }
    nlohmann::json slopes = nlohmann::json::object();
    for (const auto& [id, fit] : result.slopes) {
        slopes[id] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"used_T", fit.used}, {"skipped_T", fit.skipped}};
    }
    nlohmann::json bounds = nlohmann::json::array();
    for (const auto& [T, b] : result.bounds) {
        bounds.push_back({{"T", T}, {"failure_bound", b.failure_bound}, {"rate_envelope", b.rate_envelope}});
    }
    return {{"config_hash", result.config_hash}, {"stats", stats}, {"loglog_slopes", slopes}, {"bounds", bounds}};
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path raw_file(const std::filesystem::path& dir, const std::string& policy, Epoch T) {
    return dir / "raw" / (policy + "_T" + std::to_string(T) + ".csv");
}

// One file per (policy, T): replication,seed,periods_correct,t,cum_regret.
inline void write_raw(const std::filesystem::path& dir, const ExperimentResult& result) {
    std::filesystem::create_directories(dir / "raw");
    std::map<std::pair<std::string, Epoch>, std::string> files;
    for (const auto& r : result.replications) {
        auto& text = files[{r.policy, r.horizon}];
        if (text.empty()) text = "replication,seed,periods_correct,t,cum_regret\n";
        const std::string pc = r.periods_correct ? (*r.periods_correct ? "1" : "0") : "NA";
        for (const auto& [t, v] : r.curve) {
            text += std::to_string(r.replication) + "," + std::to_string(r.seed) + "," + pc + "," + std::to_string(t) + "," +
                    format_double(v) + "\n";
        }
    }
    for (const auto& [key, text] : files) write_text(raw_file(dir, key.first, key.second), text);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

// Re-reads raw/ independently of the run that produced it.
inline std::vector<ReplicationResult> read_raw(const std::filesystem::path& dir, const ExperimentConfig& config) {
    std::vector<ReplicationResult> reps;
    for (const auto& p : config.policies) {
        for (Epoch T : config.horizons) {
            std::vector<ReplicationResult> block(static_cast<std::size_t>(config.replications));
            std::istringstream in(read_text(raw_file(dir, p.id, T)));
            std::string line;
            std::getline(in, line);
            while (std::getline(in, line)) {
                if (line.empty()) continue;
                const auto c = split_csv_line(line);
                if (c.size() != 5) throw std::runtime_error("malformed raw row: " + line);
                const auto r = parse_int(c[0]);
                if (r < 0 || r >= config.replications) throw std::runtime_error("raw row has bad replication: " + line);
                auto& rep = block[static_cast<std::size_t>(r)];
                rep.policy = p.id;
                rep.horizon = T;
                rep.replication = static_cast<int>(r);
                rep.seed = static_cast<std::uint64_t>(parse_int(c[1]));
                if (c[2] != "NA") rep.periods_correct = c[2] == "1";
                rep.curve.emplace_back(parse_int(c[3]), parse_double(c[4]));
            }
            for (auto& rep : block) {
                if (rep.curve.empty()) throw std::runtime_error("raw file lacks a replication: " + raw_file(dir, p.id, T).string());
                rep.final_regret = rep.curve.back().second;
                reps.push_back(std::move(rep));
            }
        }
    }
    return reps;
}

inline nlohmann::json run_meta_json(const ExperimentConfig& config, const ExperimentResult& result) {
    std::vector<std::uint64_t> seeds;
    for (int r = 0; r < config.replications; ++r) seeds.push_back(config.base_seed + static_cast<std::uint64_t>(r));
    return {{"config_hash", result.config_hash},
            {"seeds", seeds},
            {"threads", config.threads},
            {"versions",
             {{"pmab", kVersion},
              {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                                    "." + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
              {"compiler", __VERSION__},
              {"cplusplus", __cplusplus}}}};
}

// Writes regret_curves.csv, summary.json, run_meta.json, config.json and raw/.
inline void write_outputs(const std::filesystem::path& dir, const ExperimentConfig& config, const ExperimentResult& result) {
    std::filesystem::create_directories(dir);
    write_text(dir / "config.json", config.to_json().dump(2) + "\n");
    write_text(dir / "regret_curves.csv", regret_curves_csv(result));
    write_text(dir / "summary.json", summary_json(result).dump(2) + "\n");
    write_text(dir / "run_meta.json", run_meta_json(config, result).dump(2) + "\n");
    write_raw(dir, result);
}

// Rebuilds summary.json and regret_curves.csv from config.json and raw/.
inline ExperimentResult report(const std::filesystem::path& dir) {
    const auto config = ExperimentConfig::from_json(read_json_file((dir / "config.json").string()), dir);
    auto result = summarize(config, read_raw(dir, config));
    write_text(dir / "regret_curves.csv", regret_curves_csv(result));
    write_text(dir / "summary.json", summary_json(result).dump(2) + "\n");
    return result;
}

}  // namespace pmab
