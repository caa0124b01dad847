#pragma once

#include <complex>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmab/environment.hpp"

namespace pmab {

using json = nlohmann::json;

namespace detail {

inline NoiseModel noise_from_json(const json& j) {
    NoiseModel m;
    if (j.contains("kind")) m.kind = noise_kind_from_string(j.at("kind").get<std::string>());
    m.sigma = j.value("sigma", m.sigma);
    m.validate();
    return m;
}

inline MeanProfile arm_from_json(const json& j) {
    if (j.is_number()) return MeanProfile::constant(j.get<double>());
    MeanProfile profile = MeanProfile::constant(0.0);
    if (j.contains("values")) {
        profile = MeanProfile(j.at("values").get<std::vector<double>>());
    } else if (j.contains("fourier")) {
        std::vector<std::complex<double>> coeffs;
        for (const auto& c : j.at("fourier")) {
            if (c.is_number()) {
                coeffs.emplace_back(c.get<double>(), 0.0);
            } else {
                coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
            }
        }
        profile = MeanProfile::from_fourier(std::move(coeffs));
    } else if (j.contains("constant")) {
        profile = MeanProfile::constant(j.at("constant").get<double>());
    } else {
        throw std::invalid_argument("instance: arm needs values, fourier or constant");
    }
    if (j.contains("period") && j.at("period").get<std::int64_t>() != profile.period()) {
        throw std::invalid_argument("instance: declared period " + j.at("period").dump() +
                                    " differs from the minimal period " + std::to_string(profile.period()));
    }
    return profile;
}

inline LowerBoundFamily family_from_string(const std::string& s) {
    if (s == "E1") return LowerBoundFamily::E1;
    if (s == "E2") return LowerBoundFamily::E2;
    if (s == "E3") return LowerBoundFamily::E3;
    throw std::invalid_argument("instance: unknown preset '" + s + "'");
}

}  // namespace detail

// Either {"arms": [...], "noise": {...}, "horizon": T} or a preset:
// {"preset": "worked_example", "n": 50, "sigma": 0.2} or
// {"preset": "E1"|"E2"|"E3", "horizon": T, ...}.
inline BanditInstance instance_from_json(const json& j) {
    if (j.contains("preset")) {
        const auto preset = j.at("preset").get<std::string>();
        if (preset == "worked_example") {
            return make_worked_example(j.value("n", std::int64_t{50}), j.value("sigma", 0.2));
        }
        LowerBoundParams p;
        p.horizon = j.value("horizon", p.horizon);
        if (j.contains("delta_gap")) p.delta_gap = j.at("delta_gap").get<double>();
        p.sign = j.value("sign", p.sign);
        p.period1 = j.value("period1", p.period1);
        if (j.contains("phase_signs")) p.phase_signs = j.at("phase_signs").get<std::vector<int>>();
        if (j.contains("other_periods")) p.other_periods = j.at("other_periods").get<std::vector<std::int64_t>>();
        p.perturbation = j.value("perturbation", p.perturbation);
        p.sigma = j.value("sigma", p.sigma);
        return make_lower_bound_instance(detail::family_from_string(preset), p);
    }
    std::vector<MeanProfile> arms;
    for (const auto& a : j.at("arms")) arms.push_back(detail::arm_from_json(a));
    const NoiseModel noise = j.contains("noise") ? detail::noise_from_json(j.at("noise")) : NoiseModel{};
    return BanditInstance(std::move(arms), noise, j.at("horizon").get<Epoch>());
}

inline json instance_to_json(const BanditInstance& instance) {
    json arms = json::array();
    for (const auto& a : instance.arms()) {
        arms.push_back({{"period", a.period()}, {"values", std::vector<double>(a.values().begin(), a.values().end())}});
    }
    return {{"arms", arms},
            {"noise", {{"kind", std::string(to_string(instance.noise().kind))}, {"sigma", instance.noise().sigma}}},
            {"horizon", instance.horizon()}};
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

}  // namespace pmab
