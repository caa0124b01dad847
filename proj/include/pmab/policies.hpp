#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmab/elimination.hpp"
#include "pmab/policy.hpp"
#include "pmab/two_stage.hpp"
#include "pmab/ucb.hpp"

namespace pmab {

inline const std::vector<std::string>& policy_ids() {
    static const std::vector<std::string> ids{"two_stage", "oracle", "seq_elim", "per_phase_ucb", "stationary_ucb", "lcm_ucb"};
    return ids;
}

inline StageOneOverrides stage_one_from_json(const nlohmann::json& j) {
    StageOneOverrides o;
    if (j.contains("n")) o.n = j.at("n").get<std::int64_t>();
    if (j.contains("g")) o.g = j.at("g").get<std::int64_t>();
    if (j.contains("H")) o.H = j.at("H").get<double>();
    if (j.contains("t_max")) o.t_max = j.at("t_max").get<std::int64_t>();
    return o;
}

// Builds a policy by id. params holds that policy's own section, e.g.
// {"n": 80, "t_max": 6, "delta": 0.001} or {"scale": 0.5, "sigma_scaled": true}.
inline std::unique_ptr<Policy> make_policy(const std::string& id, const nlohmann::json& params = nlohmann::json::object()) {
    if (id == "two_stage" || id == "oracle") {
        TwoStageParams p;
        p.stage_one = stage_one_from_json(params);
        if (params.contains("delta")) p.delta = params.at("delta").get<double>();
        p.oracle = id == "oracle";
        return std::make_unique<TwoStagePolicy>(p);
    }
    if (id == "seq_elim") return std::make_unique<SequentialElimination>();
    const UcbParams ucb{params.value("scale", 1.0), params.value("sigma_scaled", false)};
    if (id == "per_phase_ucb") return std::make_unique<PerPhaseUcb>(ucb);
    if (id == "stationary_ucb") return std::make_unique<StationaryUcb>(ucb);
    if (id == "lcm_ucb") {
        LcmUcbParams p;
        p.stage_one = stage_one_from_json(params);
        p.ucb = ucb;
        return std::make_unique<LcmUcbPolicy>(p);
    }
    throw std::invalid_argument("unknown policy '" + id + "'");
}

}  // namespace pmab
