#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "crs/model.hpp"
#include "crs/simulate.hpp"

namespace crs {

/// Sufficient statistics of a cohort for the constant-intensity likelihood:
/// per-cause event counts, the censored count, and the total observed time.
struct SuffStats {
    std::vector<double> event_counts;  ///< size k, count of state == j
    double censored_count = 0.0;       ///< count of state == 0
    double total_time = 0.0;
    std::size_t n = 0;

    static SuffStats from_cohort(const Cohort& cohort);
};

/// Both groups' fitted parameters and the joint log-likelihood.
/// psi1/psi2 are present exactly when the censoring scheme is exponential.
struct FittedPair {
    ModelParams group1;
    ModelParams group2;
    std::optional<double> psi1;
    std::optional<double> psi2;
    double loglik = 0.0;
};

/// Result of the constrained maximum-likelihood fit under the equality
/// constraint distance(theta) = epsilon.
struct ConstrainedFit {
    FittedPair fitted;
    double epsilon = 0.0;
    double constraint_residual = 0.0;  ///< |distance(fitted) - epsilon|
    bool converged = false;
    double initializer_loglik = 0.0;   ///< log-likelihood of the feasible start
};

/// Closed-form MLE of the transition intensities:
/// alpha_j = (#events of cause j) / (total observed time).
/// Identical under administrative and random right censoring.
ModelParams mle_intensities(const Cohort& cohort);

/// Closed-form MLE of the exponential censoring rate:
/// psi = (#censored) / (total observed time).
double mle_censoring_rate(const Cohort& cohort);

/// Log-likelihood of the cohort. Administrative censoring:
///   -alpha_0 * sum(T_i) + sum_j N_j log(alpha_j).
/// Exponential censoring additionally has the censoring terms
///   N_0 log(psi) - psi * sum(T_i),
/// with psi taken from the censoring spec. No parameter-free constants are
/// dropped. Throws if a rate whose log term is needed is zero.
double log_likelihood(const Cohort& cohort, const ModelParams& params,
                      const CensoringSpec& censoring);

/// Unconstrained MLEs for both groups plus the joint log-likelihood.
/// For exponential censoring the rates psi are estimated from the data;
/// the spec's stored rate is ignored here.
FittedPair fit_unconstrained(const Cohort& c1, const Cohort& c2, const CensoringSpec& cs1,
                             const CensoringSpec& cs2);

/// Joint MLE of both groups' parameters under the equality constraint
/// d(theta) = epsilon, where d is the sup-norm transition-probability
/// distance over [0, tau] (with psi free per group under exponential
/// censoring) or the max intensity difference.
///
/// Implemented as a quadratic-penalty homotopy over a local simplex
/// optimizer in log-space, started from a feasible point found by ray
/// bisection, followed by an exact projection back onto the constraint.
/// Deterministic: multistart jitter uses fixed internal seeding.
ConstrainedFit constrained_fit(const Cohort& c1, const Cohort& c2, const CensoringSpec& cs1,
                               const CensoringSpec& cs2, double epsilon, double tau,
                               Measure measure = Measure::TransitionProbabilities);

}  // namespace crs
