#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "crs/inference.hpp"
#include "crs/model.hpp"
#include "crs/simulate.hpp"

namespace crs {

/// Settings of one similarity test run.
struct TestConfig {
    double epsilon = 0.0;  ///< similarity threshold, in (0, 1)
    double alpha = 0.05;   ///< nominal level, in (0, 0.5)
    std::size_t bootstrap = 500;
    double tau = 0.0;      ///< time horizon of the distance
    Measure measure = Measure::TransitionProbabilities;
    std::uint64_t seed = 0;
    unsigned threads = 1;

    void validate() const;
};

/// Everything a similarity test run produces.
struct TestReport {
    double d_hat = 0.0;
    /// Attaining point of the observed distance. For the intensity measure
    /// only `value`, `arg_cause` and `sign` are meaningful; `arg_time` is 0.
    SupDistanceWitness witness;
    FittedPair fits_unconstrained;
    /// Engaged only when the constrained branch ran (d_hat < epsilon);
    /// empty means the unconstrained MLEs were reused as bootstrap
    /// parameters.
    std::optional<ConstrainedFit> fits_constrained;
    std::vector<double> bootstrap_stats;  ///< replicate order, unsorted
    double q_alpha = 0.0;                 ///< floor(alpha * B)-th order statistic
    double p_value = 0.0;                 ///< share of replicates with d* <= d_hat
    bool reject = false;                  ///< d_hat < q_alpha
};

/// Constrained parametric bootstrap similarity test. Both censoring specs
/// must share their kind; under exponential censoring the rates are
/// estimated from the data and the bootstrap re-draws censoring times from
/// the constrained rates. Deterministic for a fixed seed, for any thread
/// count.
TestReport run_similarity_test(const Cohort& c1, const Cohort& c2, const CensoringSpec& cs1,
                               const CensoringSpec& cs2, const TestConfig& cfg);

/// floor(alpha * B)-th order statistic (1-indexed), no interpolation.
double bootstrap_quantile(std::span<const double> stats, double alpha);

/// Share of replicates at or below the observed statistic; ties count.
double bootstrap_p_value(std::span<const double> stats, double d_hat);

}  // namespace crs
