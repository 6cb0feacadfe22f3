#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "crs/model.hpp"
#include "crs/scan.hpp"
#include "crs/simulate.hpp"
#include "crs/testkit.hpp"

namespace crs {

/// Two-group cohort file contents.
struct ParsedCohorts {
    Cohort group1;
    Cohort group2;
};

/// Parses the cohort CSV format: mandatory header `group,time,state`,
/// group in {1,2}, strictly positive times, states 0..k. k is inferred as
/// the largest state seen unless `k_override` > 0. Errors carry 1-based
/// line numbers.
ParsedCohorts parse_cohorts(std::istream& in, std::size_t k_override = 0);
ParsedCohorts parse_cohorts_file(const std::string& path, std::size_t k_override = 0);

/// Writes both cohorts in the same CSV format; round-trips exactly.
void write_cohorts_csv(std::ostream& os, const Cohort& c1, const Cohort& c2);

/// Run settings echoed into machine-readable reports.
struct RunMeta {
    std::string command;  ///< "test" or "scan"
    Measure measure = Measure::TransitionProbabilities;
    double epsilon = 0.0;  ///< single-threshold runs only
    double alpha = 0.05;
    std::size_t bootstrap = 0;
    double tau = 0.0;
    std::string censoring1;
    std::string censoring2;
    std::uint64_t seed = 0;
    unsigned threads = 1;
};

std::string test_report_json(const TestReport& report, const RunMeta& meta);
std::string scan_result_json(const ScanResult& result, const RunMeta& meta);

/// Study configuration file: `key = value` lines, `#` comments. Keys:
/// scenarios, censorings, sizes, measures (comma lists), n_sim, bootstrap,
/// alpha, seed, threads, out.
struct StudyConfig {
    std::vector<std::string> scenarios;   ///< e.g. Null, Margin, Alt3
    std::vector<std::string> censorings;  ///< "adm" or "exp:<rate>"
    std::vector<std::pair<std::size_t, std::size_t>> sizes;
    std::vector<std::string> measures;    ///< "prob", "int"
    std::size_t n_sim = 300;
    std::size_t bootstrap = 300;
    double alpha = 0.05;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out;
};

StudyConfig parse_study_config(std::istream& in);

}  // namespace crs
