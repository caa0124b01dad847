#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pmab/pmab.hpp"

namespace {

using nlohmann::json;

struct Block {
    std::vector<double> samples;
    std::vector<std::int64_t> epochs;
};

// One column (samples, epochs 1..n) or two (epoch,sample); a header row is skipped.
Block read_samples(std::istream& in) {
    Block b;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = pmab::split_csv_line(line);
        try {
            if (cells.size() == 1) {
                b.samples.push_back(std::stod(cells[0]));
                b.epochs.push_back(static_cast<std::int64_t>(b.samples.size()));
            } else if (cells.size() == 2) {
                b.epochs.push_back(pmab::parse_int(cells[0]));
                b.samples.push_back(std::stod(cells[1]));
            } else {
                throw std::invalid_argument("expected 1 or 2 columns: " + line);
            }
        } catch (const std::invalid_argument&) {
            if (!first) throw std::invalid_argument("bad row: " + line);
        }
        first = false;
    }
    if (b.samples.empty()) throw std::invalid_argument("no samples");
    return b;
}

pmab::ExperimentConfig load_config(const std::string& path, std::optional<unsigned> threads) {
    const auto j = pmab::read_json_file(path);
    auto config = pmab::ExperimentConfig::from_json(j, std::filesystem::path(path).parent_path());
    if (threads) config.threads = *threads;
    return config;
}

void print_stats(const pmab::ExperimentResult& result) {
    for (const auto& s : result.stats) {
        std::cout << s.policy << " T=" << s.horizon << " mean_regret=" << s.mean_regret << " se=" << s.std_error;
        if (s.success_rate) std::cout << " success=" << *s.success_rate;
        std::cout << "\n";
    }
    for (const auto& [id, fit] : result.slopes) std::cout << id << " loglog_slope=" << fit.slope << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic multi-armed bandits: spectral period detection, policies and experiments"};
    app.require_subcommand(1);

    auto* constants = app.add_subcommand("constants", "Leakage constants, assumption coefficients and failure bound as JSON");
    std::int64_t c_n = 0, c_g = 0, c_k = 5;
    double c_sigma = 1.0;
    std::optional<double> c_h;
    constants->add_option("--n", c_n, "Block length")->required();
    constants->add_option("--g", c_g, "Neighbourhood size")->required();
    constants->add_option("--sigma", c_sigma, "Noise scale");
    constants->add_option("--H", c_h, "Noise multiplier (default sqrt(1 + log n))");
    constants->add_option("--K", c_k, "Number of arms for the failure bound");

    auto* detect = app.add_subcommand("detect", "Identify frequencies and the period of one sample block");
    std::string d_input = "-";
    std::optional<std::int64_t> d_g, d_tmax;
    std::optional<double> d_h;
    double d_sigma = 1.0;
    bool d_trace = false;
    detect->add_option("input", d_input, "CSV file (sample or epoch,sample per row); - for stdin");
    detect->add_option("--g", d_g, "Neighbourhood size (default ceil(sqrt(n)))");
    detect->add_option("--H", d_h, "Noise multiplier (default sqrt(1 + log n))");
    detect->add_option("--sigma", d_sigma, "Noise scale")->required();
    detect->add_option("--t-max", d_tmax, "Largest candidate denominator (default floor((n-1)/(2g)))");
    detect->add_flag("--trace", d_trace, "Include the peak-by-peak trace");

    std::string config_path, out_dir;
    std::optional<unsigned> threads;
    auto* simulate = app.add_subcommand("simulate", "Run the configured Monte Carlo experiment");
    simulate->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
    simulate->add_option("--out", out_dir, "Output directory")->required();
    simulate->add_option("--threads", threads, "Worker threads (does not change outputs)");

    auto* sweep = app.add_subcommand("sweep", "Run a horizon sweep and fit log-log regret slopes");
    sweep->add_option("--config", config_path, "Experiment JSON")->required()->check(CLI::ExistingFile);
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--threads", threads, "Worker threads (does not change outputs)");

    std::string in_dir;
    auto* report = app.add_subcommand("report", "Re-aggregate raw replication files into summary.json and regret_curves.csv");
    report->add_option("--in", in_dir, "Directory written by simulate or sweep")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*constants) {
            const double H = c_h.value_or(std::sqrt(1.0 + std::log(static_cast<double>(c_n))));
            const auto tc = pmab::spectral::make_threshold_constants(c_n, c_g, H, c_sigma);
            const auto strength = pmab::spectral::strength_coefficients(c_n, c_g, H);
            json row{{"n", c_n},
                     {"g", c_g},
                     {"H", H},
                     {"sigma", c_sigma},
                     {"K", c_k},
                     {"U1", tc.u1},
                     {"U2", tc.u2},
                     {"eps_bar", tc.eps_bar},
                     {"sigma_coeff", strength.sigma_coeff},
                     {"B_coeff", strength.B_coeff},
                     {"failure_probability", pmab::spectral::failure_probability_bound(c_n, c_k, H)}};
            std::cout << row.dump(2) << "\n";
        } else if (*detect) {
            Block b;
            if (d_input == "-") {
                b = read_samples(std::cin);
            } else {
                std::ifstream in(d_input);
                if (!in) throw std::runtime_error("cannot open " + d_input);
                b = read_samples(in);
            }
            const auto n = static_cast<std::int64_t>(b.samples.size());
            const auto derived = pmab::parameters_for_block(n);
            pmab::spectral::StageOneParams p;
            p.n = n;
            p.g = d_g.value_or(derived.g);
            p.H = d_h.value_or(derived.H);
            p.sigma = d_sigma;
            p.t_max = d_tmax;
            const auto tc = pmab::spectral::make_threshold_constants(p.n, p.g, p.H, p.sigma);
            const auto est = pmab::spectral::estimate_period(b.samples, b.epochs, p, tc);
            json ids = json::array();
            for (const auto& f : est.identified) ids.push_back(f.str());
            json out{{"n", n},
                     {"g", p.g},
                     {"H", p.H},
                     {"t_max", p.effective_t_max()},
                     {"identified", ids},
                     {"period", est.period_estimate},
                     {"threshold", est.threshold},
                     {"sup_magnitude", est.sup_magnitude},
                     {"failure_bound", p.H > 1.0 ? json(pmab::spectral::failure_probability_bound(n, 1, p.H)) : json(nullptr)}};
            if (d_trace) {
                json steps = json::array();
                for (const auto& s : est.trace) {
                    steps.push_back({{"peak", s.peak.str()},
                                     {"matched", s.matched.str()},
                                     {"accepted", s.accepted}});
                }
                out["trace"] = steps;
            }
            std::cout << out.dump(2) << "\n";
        } else if (*simulate || *sweep) {
            const auto config = load_config(config_path, threads);
            if (*sweep && config.horizons.size() < 2) throw std::invalid_argument("sweep needs at least two horizons");
            const auto result = pmab::monte_carlo(config);
            pmab::write_outputs(out_dir, config, result);
            print_stats(result);
            std::cout << "config_hash=" << result.config_hash << " written to " << out_dir << "\n";
        } else if (*report) {
            const auto result = pmab::report(in_dir);
            print_stats(result);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
