#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "crs/model.hpp"
#include "crs/testkit.hpp"

namespace crs {

/// One simulation cell definition: a named pair of models, a censoring
/// setting, and the thresholds at which the two tests run. Thresholds are
/// derived from the margin configuration, never hard-coded.
struct Scenario {
    std::string name;  ///< Null, Margin, Alt1..Alt5
    ModelParams group1;
    ModelParams group2;
    CensoringSpec censoring;  ///< applied to both groups
    double tau = 90.0;
    double epsilon_int = 0.0;  ///< threshold of the intensity-based test
    double epsilon_sup = 0.0;  ///< threshold of the probability-based test

    std::string censoring_label() const;  ///< "adm", "Exp(0.002)", ...
};

/// The built-in scenario grid: seven model rows crossed with the four
/// censoring settings (administrative at 90 and exponential rates 0.002,
/// 0.005, 0.01), horizon tau = 90.
std::vector<Scenario> builtin_scenarios();

/// Looks up a built-in scenario by name and censoring label; throws when
/// absent.
Scenario find_scenario(const std::string& name, const std::string& censoring_label);

/// The label the study tables use for a censoring setting.
std::string censoring_study_label(const CensoringSpec& censoring);

/// Thresholds of both tests per censoring setting, computed from the margin
/// configuration.
struct ThresholdRow {
    std::string censoring;
    double epsilon_int = 0.0;
    double epsilon_sup = 0.0;
};
std::vector<ThresholdRow> threshold_table(double tau = 90.0);

/// Empirical rejection rate of a scenario cell.
struct StudyResult {
    std::string scenario;
    std::string censoring;
    std::size_t n1 = 0, n2 = 0;
    std::string measure;
    std::size_t n_sim = 0;
    std::size_t bootstrap = 0;
    double alpha = 0.0;
    std::size_t rejections = 0;
    double rejection_rate = 0.0;
    double wall_time_s = 0.0;
    std::uint64_t seed = 0;
    /// Replicates that raised an error, with their messages. More than 1%
    /// of failures aborts the run instead.
    std::vector<std::pair<std::size_t, std::string>> failures;
};

/// Simulates n_sim data pairs from the scenario, runs the similarity test
/// on each, and counts rejections. Replicates get independent streams keyed
/// by (seed, cell, replicate, group); the data streams ignore the measure so
/// both tests see identical cohorts. Deterministic for any thread count.
StudyResult run_scenario(const Scenario& s, std::size_t n1, std::size_t n2, std::size_t n_sim,
                         std::size_t bootstrap, double alpha, Measure measure,
                         std::uint64_t seed, unsigned threads);

/// CSV schema used by the study command.
std::string study_csv_header();
void append_study_csv_row(std::ostream& os, const StudyResult& r);

}  // namespace crs
