#include "crs/study.hpp"

#include <chrono>
#include <cmath>
#include <iterator>
#include <ostream>
#include <sstream>

#include "crs/errors.hpp"
#include "crs/parallel.hpp"
#include "crs/rng.hpp"
#include "crs/simulate.hpp"

namespace crs {

namespace {

struct ScenarioRow {
    const char* name;
    double g1[3];
    double g2[3];
};

// Model rows: one inside the null, the margin, five alternatives moving
// progressively further into similarity.
constexpr ScenarioRow kRows[] = {
    {"Null", {0.0028, 0.0011, 0.0004}, {0.0008, 0.0028, 0.0019}},
    {"Margin", {0.0023, 0.0011, 0.0004}, {0.0008, 0.0026, 0.0019}},
    {"Alt1", {0.0018, 0.0011, 0.0004}, {0.0008, 0.0021, 0.0014}},
    {"Alt2", {0.0013, 0.0011, 0.0004}, {0.0008, 0.0016, 0.0014}},
    {"Alt3", {0.0010, 0.0011, 0.0004}, {0.0008, 0.0013, 0.0009}},
    {"Alt4", {0.0009, 0.0011, 0.0004}, {0.0008, 0.0012, 0.0007}},
    {"Alt5", {0.0009, 0.0011, 0.0004}, {0.0008, 0.0012, 0.0005}},
};

constexpr double kHorizon = 90.0;
constexpr double kExpRates[] = {0.002, 0.005, 0.01};

ModelParams margin_group1() { return ModelParams({0.0023, 0.0011, 0.0004}); }
ModelParams margin_group2() { return ModelParams({0.0008, 0.0026, 0.0019}); }

std::string censoring_name(const CensoringSpec& c) {
    if (c.kind() == CensoringKind::Administrative) return "adm";
    std::ostringstream os;
    os << "Exp(" << c.rate() << ")";
    return os.str();
}

// FNV-1a; stable cell identity for stream keying.
std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

std::string Scenario::censoring_label() const { return censoring_name(censoring); }

std::string censoring_study_label(const CensoringSpec& censoring) {
    return censoring_name(censoring);
}

std::vector<ThresholdRow> threshold_table(double tau) {
    const ModelParams g1 = margin_group1();
    const ModelParams g2 = margin_group2();
    const double eps_int = intensity_distance(g1, g2);
    std::vector<ThresholdRow> table;
    std::vector<CensoringSpec> settings = {CensoringSpec::administrative(kHorizon)};
    for (double rate : kExpRates) settings.push_back(CensoringSpec::exponential(rate));
    for (const auto& c : settings) {
        const double eps_sup = sup_distance(g1, g2, c, c, tau).value;
        table.push_back(ThresholdRow{censoring_name(c), eps_int, eps_sup});
    }
    return table;
}

std::vector<Scenario> builtin_scenarios() {
    std::vector<CensoringSpec> settings = {CensoringSpec::administrative(kHorizon)};
    for (double rate : kExpRates) settings.push_back(CensoringSpec::exponential(rate));

    const ModelParams mg1 = margin_group1();
    const ModelParams mg2 = margin_group2();
    const double eps_int = intensity_distance(mg1, mg2);

    std::vector<Scenario> all;
    all.reserve(std::size(kRows) * settings.size());
    for (const auto& c : settings) {
        const double eps_sup = sup_distance(mg1, mg2, c, c, kHorizon).value;
        for (const auto& row : kRows) {
            Scenario s{row.name,
                       ModelParams({row.g1[0], row.g1[1], row.g1[2]}),
                       ModelParams({row.g2[0], row.g2[1], row.g2[2]}),
                       c,
                       kHorizon,
                       eps_int,
                       eps_sup};
            all.push_back(std::move(s));
        }
    }
    return all;
}

Scenario find_scenario(const std::string& name, const std::string& censoring_label) {
    for (const auto& s : builtin_scenarios())
        if (s.name == name && s.censoring_label() == censoring_label) return s;
    throw input_error("unknown scenario '" + name + "' with censoring '" + censoring_label + "'");
}

StudyResult run_scenario(const Scenario& s, std::size_t n1, std::size_t n2, std::size_t n_sim,
                         std::size_t bootstrap, double alpha, Measure measure,
                         std::uint64_t seed, unsigned threads) {
    if (n_sim == 0) throw input_error("run_scenario: n_sim must be >= 1");
    if (n1 == 0 || n2 == 0) throw input_error("run_scenario: sample sizes must be >= 1");

    StudyResult result;
    result.scenario = s.name;
    result.censoring = s.censoring_label();
    result.n1 = n1;
    result.n2 = n2;
    result.measure = measure_label(measure);
    result.n_sim = n_sim;
    result.bootstrap = bootstrap;
    result.alpha = alpha;
    result.seed = seed;

    // The cell key deliberately excludes the measure: the intensity- and
    // probability-based tests are compared on identical data replicates.
    std::ostringstream key;
    key << s.name << '|' << result.censoring << '|' << n1 << 'x' << n2;
    const RngStream cell = RngStream(seed, fnv1a(key.str()));

    const double epsilon =
        measure == Measure::TransitionProbabilities ? s.epsilon_sup : s.epsilon_int;

    std::vector<std::int8_t> outcome(n_sim, -1);  // 1 reject, 0 accept, -1 failed
    std::vector<std::string> errors(n_sim);

    const auto started = std::chrono::steady_clock::now();
    parallel_for(n_sim, threads, [&](std::size_t r) {
        const RngStream rep = cell.child(r);
        try {
            const Cohort c1 = draw_cohort(s.group1, s.censoring, n1, rep.child(1), 1);
            const Cohort c2 = draw_cohort(s.group2, s.censoring, n2, rep.child(2), 2);
            TestConfig tc;
            tc.epsilon = epsilon;
            tc.alpha = alpha;
            tc.bootstrap = bootstrap;
            tc.tau = s.tau;
            tc.measure = measure;
            tc.seed = rep.child(3).next_u64();
            tc.threads = 1;  // parallelism is over replicates here
            outcome[r] = run_similarity_test(c1, c2, s.censoring, s.censoring, tc).reject ? 1 : 0;
        } catch (const std::exception& e) {
            errors[r] = e.what();
        }
    });
    const auto finished = std::chrono::steady_clock::now();
    result.wall_time_s = std::chrono::duration<double>(finished - started).count();

    std::size_t failed = 0;
    for (std::size_t r = 0; r < n_sim; ++r) {
        if (outcome[r] < 0) {
            ++failed;
            result.failures.emplace_back(r, errors[r]);
        } else if (outcome[r] == 1) {
            ++result.rejections;
        }
    }
    if (static_cast<double>(failed) > 0.01 * static_cast<double>(n_sim)) {
        std::ostringstream os;
        os << "run_scenario: " << failed << " of " << n_sim
           << " replicates failed (> 1%); first error: " << result.failures.front().second;
        throw numeric_error(os.str());
    }
    result.rejection_rate = static_cast<double>(result.rejections) / static_cast<double>(n_sim);
    return result;
}

std::string study_csv_header() {
    return "scenario,censoring,n1,n2,measure,n_sim,B,alpha,rejections,rate,seed";
}

void append_study_csv_row(std::ostream& os, const StudyResult& r) {
    os << r.scenario << ',' << r.censoring << ',' << r.n1 << ',' << r.n2 << ',' << r.measure
       << ',' << r.n_sim << ',' << r.bootstrap << ',' << r.alpha << ',' << r.rejections << ','
       << r.rejection_rate << ',' << r.seed << '\n';
}

}  // namespace crs
