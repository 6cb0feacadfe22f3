#include "crs/testkit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crs/errors.hpp"
#include "crs/parallel.hpp"
#include "crs/rng.hpp"

namespace crs {

namespace {

// Stream ids inside one test run.
constexpr std::uint64_t kBootstrapStream = 0xb007;

double measured_distance(Measure measure, const ModelParams& m1, const ModelParams& m2,
                         double psi1, double psi2, double tau, SupDistanceWitness* witness) {
    if (measure == Measure::TransitionIntensities) {
        SupDistanceWitness w;
        w.value = -1.0;
        for (std::size_t j = 1; j <= m1.num_causes(); ++j) {
            const double diff = m1.intensities()[j - 1] - m2.intensities()[j - 1];
            if (std::abs(diff) > w.value) {
                w.value = std::abs(diff);
                w.arg_cause = j;
                w.arg_time = 0.0;
                w.sign = diff < 0.0 ? -1 : +1;
            }
        }
        if (witness) *witness = w;
        return w.value;
    }
    const SupDistanceWitness w =
        sup_distance_rates(m1.intensities(), m2.intensities(), psi1, psi2, tau);
    if (witness) *witness = w;
    return w.value;
}

}  // namespace

void TestConfig::validate() const {
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw input_error("TestConfig: epsilon must lie in (0, 1)");
    if (!(alpha > 0.0) || !(alpha < 0.5))
        throw input_error("TestConfig: alpha must lie in (0, 0.5)");
    if (bootstrap < 100) throw input_error("TestConfig: bootstrap replicate count must be >= 100");
    if (std::floor(alpha * static_cast<double>(bootstrap) + 1e-9) < 1.0)
        throw input_error("TestConfig: alpha * B must be >= 1");
    if (!(tau > 0.0)) throw input_error("TestConfig: tau must be positive");
}

double bootstrap_quantile(std::span<const double> stats, double alpha) {
    // The 1e-9 nudge keeps exact-integer products like 0.05 * 500 from
    // landing one order statistic low through binary rounding.
    const auto b = static_cast<std::size_t>(
        std::floor(alpha * static_cast<double>(stats.size()) + 1e-9));
    if (b < 1) throw input_error("bootstrap_quantile: floor(alpha * B) is zero");
    std::vector<double> sorted(stats.begin(), stats.end());
    std::nth_element(sorted.begin(), sorted.begin() + (b - 1), sorted.end());
    return sorted[b - 1];
}

double bootstrap_p_value(std::span<const double> stats, double d_hat) {
    if (stats.empty()) throw input_error("bootstrap_p_value: no replicates");
    std::size_t count = 0;
    for (double d : stats)
        if (d <= d_hat) ++count;
    return static_cast<double>(count) / static_cast<double>(stats.size());
}

TestReport run_similarity_test(const Cohort& c1, const Cohort& c2, const CensoringSpec& cs1,
                               const CensoringSpec& cs2, const TestConfig& cfg) {
    cfg.validate();
    if (c1.num_causes != c2.num_causes)
        throw input_error("run_similarity_test: cohorts have different numbers of causes");
    if (cs1.kind() != cs2.kind())
        throw input_error("run_similarity_test: censoring kinds must match across groups");
    const bool exp_cens = cs1.kind() == CensoringKind::Exponential;

    TestReport report;

    // Step 1: unconstrained MLEs and the observed statistic.
    report.fits_unconstrained = fit_unconstrained(c1, c2, cs1, cs2);
    const FittedPair& up = report.fits_unconstrained;
    report.d_hat =
        measured_distance(cfg.measure, up.group1, up.group2, up.psi1.value_or(0.0),
                          up.psi2.value_or(0.0), cfg.tau, &report.witness);

    // Step 2: constrained estimators, or the MLEs when those already
    // satisfy the null.
    const FittedPair* boot_params = &report.fits_unconstrained;
    if (report.d_hat < cfg.epsilon) {
        report.fits_constrained =
            constrained_fit(c1, c2, cs1, cs2, cfg.epsilon, cfg.tau, cfg.measure);
        if (!report.fits_constrained->converged) {
            std::ostringstream os;
            os << "constrained fit did not converge (|d - epsilon| = "
               << report.fits_constrained->constraint_residual << ")";
            throw numeric_error(os.str());
        }
        boot_params = &report.fits_constrained->fitted;
    }

    // Step 3: bootstrap replicates. Exponential censoring is re-drawn from
    // the constrained rates; administrative censoring keeps its horizon.
    const CensoringSpec boot_cens1 =
        exp_cens ? CensoringSpec::exponential(boot_params->psi1.value_or(0.0)) : cs1;
    const CensoringSpec boot_cens2 =
        exp_cens ? CensoringSpec::exponential(boot_params->psi2.value_or(0.0)) : cs2;
    const std::size_t n1 = c1.observations.size();
    const std::size_t n2 = c2.observations.size();

    report.bootstrap_stats.assign(cfg.bootstrap, 0.0);
    const RngStream boot_root = RngStream(cfg.seed, kBootstrapStream);
    parallel_for(cfg.bootstrap, cfg.threads, [&](std::size_t b) {
        try {
            const RngStream rep = boot_root.child(b);
            const Cohort b1 =
                draw_cohort(boot_params->group1, boot_cens1, n1, rep.child(1), c1.label);
            const Cohort b2 =
                draw_cohort(boot_params->group2, boot_cens2, n2, rep.child(2), c2.label);
            const ModelParams a1 = mle_intensities(b1);
            const ModelParams a2 = mle_intensities(b2);
            const double psi1 = exp_cens ? mle_censoring_rate(b1) : 0.0;
            const double psi2 = exp_cens ? mle_censoring_rate(b2) : 0.0;
            report.bootstrap_stats[b] =
                measured_distance(cfg.measure, a1, a2, psi1, psi2, cfg.tau, nullptr);
        } catch (const std::exception& e) {
            std::ostringstream os;
            os << "bootstrap replicate " << b << ": " << e.what();
            throw numeric_error(os.str());
        }
    });

    // Steps 4 and 5: quantile and decision.
    report.q_alpha = bootstrap_quantile(report.bootstrap_stats, cfg.alpha);
    report.p_value = bootstrap_p_value(report.bootstrap_stats, report.d_hat);
    report.reject = report.d_hat < report.q_alpha;
    return report;
}

}  // namespace crs
