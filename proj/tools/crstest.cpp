// crstest — similarity testing for two-group competing-risks data.
//
// Subcommands: thresholds, simulate, test, scan, study.
// Exit codes: 0 = ran, 2 = input error, 3 = numerical failure.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "crs/errors.hpp"
#include "crs/io.hpp"
#include "crs/model.hpp"
#include "crs/scan.hpp"
#include "crs/simulate.hpp"
#include "crs/study.hpp"
#include "crs/testkit.hpp"

namespace {

unsigned default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

// "adm:<T>" or "exp:<rate>"; bare "exp" means the rate is estimated from
// the data (test/scan only).
crs::CensoringSpec parse_censoring(const std::string& text, bool allow_bare_exp) {
    const auto colon = text.find(':');
    const std::string kind = text.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
    auto value = [&](const char* what) {
        try {
            std::size_t used = 0;
            const double v = std::stod(arg, &used);
            if (used != arg.size()) throw std::invalid_argument(arg);
            return v;
        } catch (const std::exception&) {
            throw crs::input_error(std::string("censoring: invalid ") + what + " '" + arg + "'");
        }
    };
    if (kind == "adm") {
        if (arg.empty()) throw crs::input_error("censoring: adm needs a horizon, e.g. adm:90");
        return crs::CensoringSpec::administrative(value("horizon"));
    }
    if (kind == "exp") {
        if (arg.empty()) {
            if (!allow_bare_exp)
                throw crs::input_error("censoring: exp needs a rate here, e.g. exp:0.005");
            return crs::CensoringSpec::exponential(0.0);  // rate estimated from data
        }
        return crs::CensoringSpec::exponential(value("rate"));
    }
    throw crs::input_error("censoring must be adm:<T> or exp[:<rate>], got '" + text + "'");
}

crs::Measure parse_measure(const std::string& text) {
    if (text == "prob") return crs::Measure::TransitionProbabilities;
    if (text == "int") return crs::Measure::TransitionIntensities;
    throw crs::input_error("measure must be 'prob' or 'int', got '" + text + "'");
}

std::vector<double> parse_rates(const std::string& text) {
    std::vector<double> rates;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) rates.push_back(std::stod(item));
    return rates;
}

std::vector<double> make_grid(const std::string& spec) {
    double lo = 0.0, hi = 0.0, step = 0.0;
    if (std::sscanf(spec.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3 || step <= 0.0)
        throw crs::input_error("grid must be lo:hi:step, e.g. 0.01:0.30:0.01");
    std::vector<double> grid;
    for (double e = lo; e <= hi + 1e-12; e += step) grid.push_back(e);
    if (grid.empty()) throw crs::input_error("grid is empty");
    return grid;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw crs::input_error("cannot open output file '" + path + "'");
    out << text;
}

// Shared flags of the data-driven commands.
struct DataArgs {
    std::string data_path;
    std::string censoring = "adm:90";
    std::string measure = "prob";
    double alpha = 0.05;
    std::size_t bootstrap = 500;
    double tau = 0.0;
    std::uint64_t seed = 0;
    unsigned threads = default_threads();
    std::size_t causes = 0;
    std::string out;
};

void add_data_flags(CLI::App* cmd, DataArgs& args) {
    cmd->add_option("--data", args.data_path, "cohort CSV (group,time,state)")->required();
    cmd->add_option("--censoring", args.censoring,
                    "adm:<T> or exp (rate estimated per group)");
    cmd->add_option("--measure", args.measure, "prob | int");
    cmd->add_option("--alpha", args.alpha, "nominal level");
    cmd->add_option("--bootstrap", args.bootstrap, "bootstrap replicates B");
    cmd->add_option("--tau", args.tau, "time horizon (defaults to the adm horizon)");
    cmd->add_option("--seed", args.seed, "master seed");
    cmd->add_option("--threads", args.threads, "worker threads");
    cmd->add_option("--causes", args.causes, "cause count k (default: inferred)");
    cmd->add_option("--out", args.out, "write the JSON report here");
}

struct LoadedData {
    crs::ParsedCohorts cohorts;
    crs::CensoringSpec censoring;
    double tau;
};

LoadedData load_data(const DataArgs& args) {
    crs::ParsedCohorts cohorts = crs::parse_cohorts_file(args.data_path, args.causes);
    const crs::CensoringSpec cens = parse_censoring(args.censoring, /*allow_bare_exp=*/true);
    double tau = args.tau;
    if (tau <= 0.0) {
        if (cens.kind() != crs::CensoringKind::Administrative)
            throw crs::input_error("--tau is required with exponential censoring");
        tau = cens.horizon();
    }
    return LoadedData{std::move(cohorts), cens, tau};
}

int cmd_thresholds(double tau) {
    const auto table = crs::threshold_table(tau);
    std::cout << "censoring    eps_int   eps_sup\n";
    for (const auto& row : table) {
        std::cout << std::left << std::setw(12) << row.censoring << ' ' << std::setw(9)
                  << row.epsilon_int << ' ' << std::setprecision(6) << row.epsilon_sup << '\n';
    }
    return 0;
}

int cmd_simulate(const std::string& scenario_name, const std::string& censoring,
                 const std::string& alpha1, const std::string& alpha2, std::size_t n1,
                 std::size_t n2, std::uint64_t seed, const std::string& out) {
    std::optional<crs::ModelParams> g1, g2;
    crs::CensoringSpec cens = parse_censoring(censoring, /*allow_bare_exp=*/false);
    if (!scenario_name.empty()) {
        const crs::Scenario s =
            crs::find_scenario(scenario_name, crs::censoring_study_label(cens));
        g1 = s.group1;
        g2 = s.group2;
    } else {
        if (alpha1.empty() || alpha2.empty())
            throw crs::input_error("simulate needs --scenario or both --alpha1 and --alpha2");
        g1 = crs::ModelParams(parse_rates(alpha1));
        g2 = crs::ModelParams(parse_rates(alpha2));
    }
    const crs::RngStream root(seed, 0x51);
    const crs::Cohort c1 = crs::draw_cohort(*g1, cens, n1, root.child(1), 1);
    const crs::Cohort c2 = crs::draw_cohort(*g2, cens, n2, root.child(2), 2);
    std::ostringstream os;
    crs::write_cohorts_csv(os, c1, c2);
    if (out.empty() || out == "-")
        std::cout << os.str();
    else
        write_text(out, os.str());
    return 0;
}

int cmd_test(const DataArgs& args, double epsilon) {
    const LoadedData data = load_data(args);
    crs::TestConfig cfg;
    cfg.epsilon = epsilon;
    cfg.alpha = args.alpha;
    cfg.bootstrap = args.bootstrap;
    cfg.tau = data.tau;
    cfg.measure = parse_measure(args.measure);
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    const crs::TestReport report = crs::run_similarity_test(
        data.cohorts.group1, data.cohorts.group2, data.censoring, data.censoring, cfg);

    std::cout << "observed d = " << report.d_hat;
    if (cfg.measure == crs::Measure::TransitionProbabilities)
        std::cout << " (cause " << report.witness.arg_cause << ", t = " << report.witness.arg_time
                  << ")";
    else
        std::cout << " (cause " << report.witness.arg_cause << ")";
    std::cout << "\nthreshold epsilon = " << cfg.epsilon << "\nbootstrap parameters: "
              << (report.fits_constrained ? "constrained fit" : "unconstrained MLEs (d >= epsilon)")
              << "\nq_alpha = " << report.q_alpha << "  p = " << report.p_value
              << "\ndecision: " << (report.reject ? "similar (H0 rejected)" : "not similar (H0 kept)")
              << " at alpha = " << cfg.alpha << '\n';

    crs::RunMeta meta{"test",    cfg.measure,          cfg.epsilon,
                      cfg.alpha, cfg.bootstrap,        cfg.tau,
                      data.censoring.label(), data.censoring.label(),
                      cfg.seed,  cfg.threads};
    if (!args.out.empty()) write_text(args.out, crs::test_report_json(report, meta));
    return 0;
}

int cmd_scan(const DataArgs& args, const std::string& grid_spec, bool no_refine) {
    const LoadedData data = load_data(args);
    crs::ScanConfig cfg;
    cfg.alpha = args.alpha;
    cfg.bootstrap = args.bootstrap;
    cfg.tau = data.tau;
    cfg.measure = parse_measure(args.measure);
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    cfg.refine = !no_refine;
    const crs::ScanResult result =
        crs::min_epsilon(data.cohorts.group1, data.cohorts.group2, data.censoring,
                         data.censoring, make_grid(grid_spec), cfg);

    std::cout << "epsilon    p-value   reject\n";
    for (std::size_t i = 0; i < result.grid.size(); ++i)
        std::cout << std::left << std::setw(10) << result.grid[i] << ' ' << std::setw(9)
                  << result.p_values[i] << ' ' << (result.rejects[i] ? "yes" : "no") << '\n';
    if (result.epsilon_hat)
        std::cout << "smallest rejecting threshold: " << *result.epsilon_hat << '\n';
    else
        std::cout << "no threshold on the grid rejects\n";
    if (!result.monotonicity_violations.empty())
        std::cout << "warning: rejection not monotone at " << result.monotonicity_violations.size()
                  << " grid point(s)\n";

    crs::RunMeta meta{"scan",    cfg.measure,          0.0,
                      cfg.alpha, cfg.bootstrap,        cfg.tau,
                      data.censoring.label(), data.censoring.label(),
                      cfg.seed,  cfg.threads};
    if (!args.out.empty()) write_text(args.out, crs::scan_result_json(result, meta));
    return 0;
}

int cmd_study(const std::string& config_path, const crs::StudyConfig& overrides,
              bool have_config) {
    crs::StudyConfig cfg = overrides;
    if (have_config) {
        std::ifstream in(config_path);
        if (!in) throw crs::input_error("cannot open study config '" + config_path + "'");
        cfg = crs::parse_study_config(in);
        if (!overrides.out.empty()) cfg.out = overrides.out;
        if (overrides.threads != 0) cfg.threads = overrides.threads;
    }
    if (cfg.scenarios.empty())
        cfg.scenarios = {"Null", "Margin", "Alt1", "Alt2", "Alt3", "Alt4", "Alt5"};
    if (cfg.censorings.empty()) cfg.censorings = {"adm", "exp:0.002", "exp:0.005", "exp:0.01"};
    if (cfg.sizes.empty()) cfg.sizes = {{200, 200}};
    if (cfg.measures.empty()) cfg.measures = {"prob"};
    if (cfg.threads == 0) cfg.threads = default_threads();

    std::ostringstream csv;
    csv << crs::study_csv_header() << '\n';
    for (const std::string& cens_text : cfg.censorings) {
        // Scenario cells carry their own censoring; the flag only selects
        // which built-in setting to look up ("adm" or "exp:<rate>").
        const std::string label =
            cens_text == "adm" || cens_text.rfind("adm:", 0) == 0
                ? "adm"
                : crs::censoring_study_label(parse_censoring(cens_text, false));
        for (const std::string& name : cfg.scenarios) {
            const crs::Scenario s = crs::find_scenario(name, label);
            for (const auto& [n1, n2] : cfg.sizes) {
                for (const std::string& measure_text : cfg.measures) {
                    const crs::StudyResult r =
                        crs::run_scenario(s, n1, n2, cfg.n_sim, cfg.bootstrap, cfg.alpha,
                                          parse_measure(measure_text), cfg.seed, cfg.threads);
                    crs::append_study_csv_row(csv, r);
                    std::cerr << r.scenario << ' ' << r.censoring << " (" << n1 << ',' << n2
                              << ") " << r.measure << ": rate " << r.rejection_rate << " ["
                              << r.wall_time_s << " s]\n";
                }
            }
        }
    }
    if (cfg.out.empty() || cfg.out == "-")
        std::cout << csv.str();
    else
        write_text(cfg.out, csv.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Similarity tests for two-group competing-risks models"};
    app.require_subcommand(1);

    double thr_tau = 90.0;
    auto* thresholds = app.add_subcommand("thresholds", "print the test thresholds per censoring");
    thresholds->add_option("--tau", thr_tau, "time horizon");

    std::string sim_scenario, sim_censoring = "adm:90", sim_alpha1, sim_alpha2, sim_out;
    std::size_t sim_n1 = 200, sim_n2 = 200;
    std::uint64_t sim_seed = 0;
    auto* simulate = app.add_subcommand("simulate", "draw a synthetic two-group cohort CSV");
    simulate->add_option("--scenario", sim_scenario, "built-in scenario name (Null, Margin, Alt1..Alt5)");
    simulate->add_option("--censoring", sim_censoring, "adm:<T> or exp:<rate>");
    simulate->add_option("--alpha1", sim_alpha1, "custom group-1 intensities a,b,c");
    simulate->add_option("--alpha2", sim_alpha2, "custom group-2 intensities a,b,c");
    simulate->add_option("--n1", sim_n1, "group 1 size");
    simulate->add_option("--n2", sim_n2, "group 2 size");
    simulate->add_option("--seed", sim_seed, "master seed");
    simulate->add_option("--out", sim_out, "output CSV path (default stdout)");

    DataArgs test_args;
    double test_epsilon = 0.0;
    auto* test = app.add_subcommand("test", "run the similarity test at one threshold");
    add_data_flags(test, test_args);
    test->add_option("--epsilon", test_epsilon, "similarity threshold")->required();

    DataArgs scan_args;
    std::string scan_grid = "0.01:0.30:0.01";
    bool scan_no_refine = false;
    auto* scan = app.add_subcommand("scan", "find the smallest rejecting threshold");
    add_data_flags(scan, scan_args);
    scan->add_option("--grid", scan_grid, "threshold grid lo:hi:step");
    scan->add_flag("--no-refine", scan_no_refine, "skip the bisection refinement");

    std::string study_config;
    crs::StudyConfig study_overrides;
    study_overrides.threads = 0;
    std::string study_scenarios, study_censorings, study_sizes, study_measures;
    auto* study = app.add_subcommand("study", "run Monte Carlo scenario cells");
    study->add_option("--config", study_config, "key = value configuration file");
    study->add_option("--scenarios", study_scenarios, "comma list, e.g. Null,Margin,Alt3");
    study->add_option("--censorings", study_censorings, "comma list, e.g. adm:90,exp:0.005");
    study->add_option("--sizes", study_sizes, "comma list, e.g. 200x200,500x500");
    study->add_option("--measures", study_measures, "comma list: prob,int");
    study->add_option("--n-sim", study_overrides.n_sim, "simulation replicates per cell");
    study->add_option("--bootstrap", study_overrides.bootstrap, "bootstrap replicates B");
    study->add_option("--alpha", study_overrides.alpha, "nominal level");
    study->add_option("--seed", study_overrides.seed, "master seed");
    study->add_option("--threads", study_overrides.threads, "worker threads");
    study->add_option("--out", study_overrides.out, "results CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (thresholds->parsed()) return cmd_thresholds(thr_tau);
        if (simulate->parsed())
            return cmd_simulate(sim_scenario, sim_censoring, sim_alpha1, sim_alpha2, sim_n1,
                                sim_n2, sim_seed, sim_out);
        if (test->parsed()) return cmd_test(test_args, test_epsilon);
        if (scan->parsed()) return cmd_scan(scan_args, scan_grid, scan_no_refine);
        if (study->parsed()) {
            auto to_list = [](const std::string& s) {
                std::vector<std::string> out;
                std::stringstream ss(s);
                std::string item;
                while (std::getline(ss, item, ',')) out.push_back(item);
                return out;
            };
            if (!study_scenarios.empty()) study_overrides.scenarios = to_list(study_scenarios);
            if (!study_censorings.empty()) study_overrides.censorings = to_list(study_censorings);
            if (!study_measures.empty()) study_overrides.measures = to_list(study_measures);
            if (!study_sizes.empty()) {
                for (const auto& item : to_list(study_sizes)) {
                    const auto x = item.find('x');
                    if (x == std::string::npos)
                        throw crs::input_error("sizes must look like 200x200");
                    study_overrides.sizes.emplace_back(std::stoul(item.substr(0, x)),
                                                       std::stoul(item.substr(x + 1)));
                }
            }
            return cmd_study(study_config, study_overrides, !study_config.empty());
        }
    } catch (const crs::input_error& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const crs::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
