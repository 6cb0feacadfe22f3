#include "crs/inference.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>
#include <utility>

#include "crs/errors.hpp"
#include "crs/rng.hpp"

namespace crs {

SuffStats SuffStats::from_cohort(const Cohort& cohort) {
    if (cohort.observations.empty()) throw input_error("cohort is empty");
    if (cohort.num_causes == 0) throw input_error("cohort has no causes (k = 0)");
    SuffStats s;
    s.event_counts.assign(cohort.num_causes, 0.0);
    s.n = cohort.observations.size();
    for (const auto& obs : cohort.observations) {
        if (obs.state > cohort.num_causes)
            throw input_error("observation state exceeds the cohort's number of causes");
        s.total_time += obs.time;
        if (obs.state == 0)
            s.censored_count += 1.0;
        else
            s.event_counts[obs.state - 1] += 1.0;
    }
    if (!(s.total_time > 0.0)) throw input_error("total observed time is zero");
    return s;
}

namespace {

// Shared likelihood kernel for the closed-form, unconstrained and
// constrained paths. Terms whose count is zero are skipped, so zero rates
// are valid when the matching events are absent.
double loglik_stats(const SuffStats& s, std::span<const double> alpha,
                    bool exponential_censoring, double psi) {
    double hazard = 0.0;
    for (double a : alpha) hazard += a;
    double ll = -hazard * s.total_time;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        if (s.event_counts[j] <= 0.0) continue;
        if (!(alpha[j] > 0.0)) {
            std::ostringstream os;
            os << "log_likelihood: cause " << (j + 1) << " has " << s.event_counts[j]
               << " events but a zero rate";
            throw input_error(os.str());
        }
        ll += s.event_counts[j] * std::log(alpha[j]);
    }
    if (exponential_censoring) {
        ll -= psi * s.total_time;
        if (s.censored_count > 0.0) {
            if (!(psi > 0.0))
                throw input_error(
                    "log_likelihood: censored observations present but censoring rate is zero");
            ll += s.censored_count * std::log(psi);
        }
    }
    return ll;
}

}  // namespace

ModelParams mle_intensities(const Cohort& cohort) {
    const SuffStats s = SuffStats::from_cohort(cohort);
    std::vector<double> alpha(s.event_counts.size());
    for (std::size_t j = 0; j < alpha.size(); ++j) alpha[j] = s.event_counts[j] / s.total_time;
    return ModelParams::from_estimates(std::move(alpha));
}

double mle_censoring_rate(const Cohort& cohort) {
    const SuffStats s = SuffStats::from_cohort(cohort);
    return s.censored_count / s.total_time;
}

double log_likelihood(const Cohort& cohort, const ModelParams& params,
                      const CensoringSpec& censoring) {
    if (params.num_causes() != cohort.num_causes)
        throw input_error("log_likelihood: params and cohort disagree on the number of causes");
    const SuffStats s = SuffStats::from_cohort(cohort);
    const bool exp_cens = censoring.kind() == CensoringKind::Exponential;
    return loglik_stats(s, params.intensities(), exp_cens, exp_cens ? censoring.rate() : 0.0);
}

FittedPair fit_unconstrained(const Cohort& c1, const Cohort& c2, const CensoringSpec& cs1,
                             const CensoringSpec& cs2) {
    if (c1.num_causes != c2.num_causes)
        throw input_error("fit_unconstrained: cohorts have different numbers of causes");
    const SuffStats s1 = SuffStats::from_cohort(c1);
    const SuffStats s2 = SuffStats::from_cohort(c2);
    auto rates = [](const SuffStats& s) {
        std::vector<double> a(s.event_counts.size());
        for (std::size_t j = 0; j < a.size(); ++j) a[j] = s.event_counts[j] / s.total_time;
        return a;
    };
    const bool exp1 = cs1.kind() == CensoringKind::Exponential;
    const bool exp2 = cs2.kind() == CensoringKind::Exponential;
    std::vector<double> a1 = rates(s1), a2 = rates(s2);
    const double psi1 = s1.censored_count / s1.total_time;
    const double psi2 = s2.censored_count / s2.total_time;
    FittedPair pair{ModelParams::from_estimates(a1), ModelParams::from_estimates(a2),
                    exp1 ? std::optional<double>(psi1) : std::nullopt,
                    exp2 ? std::optional<double>(psi2) : std::nullopt, 0.0};
    pair.loglik = loglik_stats(s1, a1, exp1, psi1) + loglik_stats(s2, a2, exp2, psi2);
    return pair;
}

// ---------------------------------------------------------------------------
// Constrained maximum likelihood
// ---------------------------------------------------------------------------

namespace {

constexpr double kRateFloor = 1e-12;    // optimizer domain floor (natural scale)
constexpr double kRateCeil = 1e10;      // optimizer domain ceiling
constexpr double kReportZero = 1e-10;   // estimates below this are reported as 0
constexpr double kConstraintTol = 1e-6; // residual bound for `converged`
constexpr double kProjectTol = 1e-9;    // bisection target on |d - eps|
constexpr double kEpsilonCeil = 0.9999; // largest supported threshold

const double kLogFloor = std::log(kRateFloor);
const double kLogCeil = std::log(kRateCeil);

struct Point {
    std::vector<double> alpha1, alpha2;
    double psi1 = 0.0, psi2 = 0.0;  // extra decay rates; 0 under administrative censoring
};

// Optimization vector layout (log scale):
//   [0, k)    log alpha^(1)
//   [k, 2k)   log alpha^(2)
//   then log psi1, log psi2 for each free censoring rate.
struct Problem {
    SuffStats s1, s2;
    std::size_t k = 0;
    Measure measure = Measure::TransitionProbabilities;
    bool exp_cens1 = false, exp_cens2 = false;
    bool psi1_free = false, psi2_free = false;
    double psi1_fixed = 0.0, psi2_fixed = 0.0;
    double epsilon = 0.0;
    double tau = 0.0;

    std::size_t dim() const {
        return 2 * k + (psi1_free ? 1 : 0) + (psi2_free ? 1 : 0);
    }
};

double distance_of(const Problem& pb, const Point& p) {
    if (pb.measure == Measure::TransitionIntensities) {
        double best = 0.0;
        for (std::size_t j = 0; j < pb.k; ++j)
            best = std::max(best, std::abs(p.alpha1[j] - p.alpha2[j]));
        return best;
    }
    return sup_distance_rates(p.alpha1, p.alpha2, p.psi1, p.psi2, pb.tau).value;
}

// Non-throwing likelihood for optimizer-internal points: a zero rate whose
// log term is needed values the point at -inf instead of raising. Ray
// projections can clamp coordinates to exact zero; such points simply lose
// the best-of comparison.
double loglik_stats_safe(const SuffStats& s, std::span<const double> alpha,
                         bool exponential_censoring, double psi) {
    constexpr double kMinusInf = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < alpha.size(); ++j)
        if (s.event_counts[j] > 0.0 && !(alpha[j] > 0.0)) return kMinusInf;
    if (exponential_censoring && s.censored_count > 0.0 && !(psi > 0.0)) return kMinusInf;
    return loglik_stats(s, alpha, exponential_censoring, psi);
}

double loglik_of(const Problem& pb, const Point& p) {
    return loglik_stats_safe(pb.s1, p.alpha1, pb.exp_cens1, p.psi1) +
           loglik_stats_safe(pb.s2, p.alpha2, pb.exp_cens2, p.psi2);
}

void encode(const Problem& pb, const Point& p, gsl_vector* x) {
    auto put = [&](std::size_t i, double v) {
        gsl_vector_set(x, i, std::log(std::clamp(v, kRateFloor, kRateCeil)));
    };
    for (std::size_t j = 0; j < pb.k; ++j) put(j, p.alpha1[j]);
    for (std::size_t j = 0; j < pb.k; ++j) put(pb.k + j, p.alpha2[j]);
    std::size_t i = 2 * pb.k;
    if (pb.psi1_free) put(i++, p.psi1);
    if (pb.psi2_free) put(i++, p.psi2);
}

Point decode(const Problem& pb, const gsl_vector* x) {
    Point p;
    p.alpha1.resize(pb.k);
    p.alpha2.resize(pb.k);
    for (std::size_t j = 0; j < pb.k; ++j) p.alpha1[j] = std::exp(gsl_vector_get(x, j));
    for (std::size_t j = 0; j < pb.k; ++j) p.alpha2[j] = std::exp(gsl_vector_get(x, pb.k + j));
    std::size_t i = 2 * pb.k;
    p.psi1 = pb.psi1_free ? std::exp(gsl_vector_get(x, i++)) : pb.psi1_fixed;
    p.psi2 = pb.psi2_free ? std::exp(gsl_vector_get(x, i++)) : pb.psi2_fixed;
    return p;
}

struct PenaltyCtx {
    const Problem* pb;
    double lambda;
};

double penalty_objective(const gsl_vector* x, void* params) {
    const auto& ctx = *static_cast<const PenaltyCtx*>(params);
    double outside = 0.0;
    for (std::size_t i = 0; i < x->size; ++i) {
        const double v = gsl_vector_get(x, i);
        outside += std::max(0.0, kLogFloor - v) + std::max(0.0, v - kLogCeil);
    }
    if (outside > 0.0) return 1e10 * (1.0 + outside);
    try {
        const Point p = decode(*ctx.pb, x);
        const double gap = distance_of(*ctx.pb, p) - ctx.pb->epsilon;
        return -(loglik_of(*ctx.pb, p) - ctx.lambda * gap * gap);
    } catch (...) {
        return 1e12;
    }
}

// One Nelder-Mead stage, warm-started at `start`; never returns a point
// whose penalty objective is worse than the start's.
Point nm_stage(const Problem& pb, const Point& start, double lambda, double step,
               std::size_t max_iter) {
    static const int gsl_handler_off = [] {
        gsl_set_error_handler_off();
        return 0;
    }();
    (void)gsl_handler_off;

    const std::size_t dim = pb.dim();
    PenaltyCtx ctx{&pb, lambda};
    gsl_multimin_function f{&penalty_objective, dim, &ctx};
    gsl_vector* x0 = gsl_vector_alloc(dim);
    gsl_vector* ss = gsl_vector_alloc(dim);
    encode(pb, start, x0);
    gsl_vector_set_all(ss, step);
    gsl_multimin_fminimizer* mz =
        gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, dim);
    gsl_multimin_fminimizer_set(mz, &f, x0, ss);
    int status = GSL_CONTINUE;
    for (std::size_t iter = 0; iter < max_iter && status == GSL_CONTINUE; ++iter) {
        if (gsl_multimin_fminimizer_iterate(mz) != 0) break;
        status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(mz), 1e-8);
    }
    Point best = decode(pb, mz->x);
    if (mz->fval > penalty_objective(x0, &ctx)) best = start;  // x0 still encodes the start
    gsl_multimin_fminimizer_free(mz);
    gsl_vector_free(ss);
    gsl_vector_free(x0);
    return best;
}

// Bisects d(path(s)) = epsilon on [lo, hi]; requires a sign change of
// d - epsilon between the endpoints.
Point bisect_path(const Problem& pb, const std::function<Point(double)>& path, double lo,
                  double hi, double d_lo) {
    const bool below_at_lo = d_lo < pb.epsilon;
    Point best = path(lo);
    for (int iter = 0; iter < 200; ++iter) {
        const double mid = 0.5 * (lo + hi);
        const Point p = path(mid);
        const double gap = distance_of(pb, p) - pb.epsilon;
        best = p;
        if (std::abs(gap) <= kProjectTol) return p;
        if ((gap < 0.0) == below_at_lo)
            lo = mid;
        else
            hi = mid;
    }
    return best;
}

Point lerp_vec(const std::vector<double>& from, const std::vector<double>& to, double u,
               const Point& base, bool group1) {
    Point p = base;
    auto& target = group1 ? p.alpha1 : p.alpha2;
    for (std::size_t j = 0; j < from.size(); ++j)
        target[j] = (1.0 - u) * from[j] + u * to[j];
    return p;
}

// Moves `start` onto the constraint surface d = epsilon along a continuous
// path, preferring small moves of group 2 away from / toward group 1 and
// falling back to paths whose endpoints bracket any epsilon in (0, 1).
Point project_to_constraint(const Problem& pb, const Point& start) {
    const double d0 = distance_of(pb, start);
    if (std::abs(d0 - pb.epsilon) <= kProjectTol) return start;

    if (d0 > pb.epsilon) {
        // Pull group 2 onto group 1; at u = 1 the two models coincide.
        auto pull = [&](double u) {
            Point p = lerp_vec(start.alpha2, start.alpha1, u, start, false);
            if (pb.measure == Measure::TransitionProbabilities && pb.psi2_free)
                p.psi2 = (1.0 - u) * start.psi2 + u * start.psi1;
            return p;
        };
        if (distance_of(pb, pull(1.0)) < pb.epsilon)
            return bisect_path(pb, pull, 0.0, 1.0, d0);
        // Residual distance from unequal fixed censoring rates: shrink both
        // intensity vectors toward zero instead; d -> 0 as u -> 1.
        const std::vector<double> floor1(pb.k, kRateFloor), floor2(pb.k, kRateFloor);
        auto shrink = [&](double u) {
            Point p = lerp_vec(start.alpha1, floor1, u, start, true);
            return lerp_vec(start.alpha2, floor2, u, p, false);
        };
        return bisect_path(pb, shrink, 0.0, 1.0, d0);
    }

    // Push group 2 along the separation ray, coordinates clamped at zero.
    auto ray = [&](double s) {
        Point p = start;
        for (std::size_t j = 0; j < pb.k; ++j)
            p.alpha2[j] = std::max(0.0, start.alpha2[j] + s * (start.alpha2[j] - start.alpha1[j]));
        return p;
    };
    double prev = 0.0;
    for (double s = 1.0; s <= 1.1e9; s *= 2.0) {
        if (distance_of(pb, ray(s)) >= pb.epsilon)
            return bisect_path(pb, [&](double t) { return ray(t); }, prev, s, d0);
        prev = s;
    }
    // Scale group 2 upward.
    auto scaled = [&](double c) {
        Point p = start;
        for (std::size_t j = 0; j < pb.k; ++j) p.alpha2[j] = c * start.alpha2[j];
        return p;
    };
    prev = 1.0;
    for (double c = 2.0; c <= 1.1e9; c *= 2.0) {
        if (distance_of(pb, scaled(c)) >= pb.epsilon)
            return bisect_path(pb, [&](double t) { return scaled(t); }, prev, c, d0);
        prev = c;
    }
    // Last resort: drive group 1 to the floor and concentrate group 2 on one
    // cause with a very large rate; the endpoint distance is 1 up to 1e-7.
    std::size_t j_star = 0;
    for (std::size_t j = 1; j < pb.k; ++j)
        if (start.alpha2[j] > start.alpha2[j_star]) j_star = j;
    const double big = std::max({1e7 * (1.0 + start.psi2), 50.0 / std::max(pb.tau, 1e-9), 1.0});
    std::vector<double> low(pb.k, kRateFloor);
    std::vector<double> spike(pb.k, kRateFloor);
    spike[j_star] = big;
    auto extreme = [&](double u) {
        Point p = lerp_vec(start.alpha1, low, u, start, true);
        return lerp_vec(start.alpha2, spike, u, p, false);
    };
    if (distance_of(pb, extreme(1.0)) < pb.epsilon)
        throw numeric_error("constrained fit: could not bracket the constraint surface");
    return bisect_path(pb, extreme, 0.0, 1.0, d0);
}

std::vector<double> snap_zeros(std::vector<double> v) {
    for (double& x : v)
        if (x < kReportZero) x = 0.0;
    return v;
}

}  // namespace

ConstrainedFit constrained_fit(const Cohort& c1, const Cohort& c2, const CensoringSpec& cs1,
                               const CensoringSpec& cs2, double epsilon, double tau,
                               Measure measure) {
    if (c1.num_causes != c2.num_causes)
        throw input_error("constrained_fit: cohorts have different numbers of causes");
    if (!(epsilon > 0.0) || epsilon > kEpsilonCeil)
        throw input_error("constrained_fit: epsilon must lie in (0, 0.9999]");
    if (measure == Measure::TransitionProbabilities && !(tau > 0.0))
        throw input_error("constrained_fit: tau must be positive");

    Problem pb;
    pb.s1 = SuffStats::from_cohort(c1);
    pb.s2 = SuffStats::from_cohort(c2);
    pb.k = c1.num_causes;
    pb.measure = measure;
    pb.epsilon = epsilon;
    pb.tau = tau;
    pb.exp_cens1 = cs1.kind() == CensoringKind::Exponential;
    pb.exp_cens2 = cs2.kind() == CensoringKind::Exponential;

    const double psi1_hat = pb.exp_cens1 ? pb.s1.censored_count / pb.s1.total_time : 0.0;
    const double psi2_hat = pb.exp_cens2 ? pb.s2.censored_count / pb.s2.total_time : 0.0;
    // The censoring rate is part of the constrained optimization only when
    // it reaches the constraint (probability measure) and its MLE is
    // interior; a group without censored observations has the boundary MLE
    // psi = 0, which stays optimal under the constraint.
    const bool psi_in_constraint = measure == Measure::TransitionProbabilities;
    pb.psi1_free = pb.exp_cens1 && psi_in_constraint && pb.s1.censored_count > 0.0;
    pb.psi2_free = pb.exp_cens2 && psi_in_constraint && pb.s2.censored_count > 0.0;
    pb.psi1_fixed = pb.psi1_free ? 0.0 : psi1_hat;
    pb.psi2_fixed = pb.psi2_free ? 0.0 : psi2_hat;

    Point mle;
    mle.alpha1.resize(pb.k);
    mle.alpha2.resize(pb.k);
    for (std::size_t j = 0; j < pb.k; ++j) {
        mle.alpha1[j] = pb.s1.event_counts[j] / pb.s1.total_time;
        mle.alpha2[j] = pb.s2.event_counts[j] / pb.s2.total_time;
    }
    mle.psi1 = psi1_hat;
    mle.psi2 = psi2_hat;

    auto assemble = [&](const Point& p, double initializer_loglik) {
        const std::vector<double> a1 = snap_zeros(p.alpha1);
        const std::vector<double> a2 = snap_zeros(p.alpha2);
        const double psi1 = p.psi1 < kReportZero ? 0.0 : p.psi1;
        const double psi2 = p.psi2 < kReportZero ? 0.0 : p.psi2;
        Point reported{a1, a2, psi1, psi2};
        const double d = distance_of(pb, reported);
        ConstrainedFit fit;
        fit.fitted = FittedPair{ModelParams::from_estimates(a1), ModelParams::from_estimates(a2),
                                pb.exp_cens1 ? std::optional<double>(psi1) : std::nullopt,
                                pb.exp_cens2 ? std::optional<double>(psi2) : std::nullopt,
                                loglik_of(pb, reported)};
        fit.epsilon = epsilon;
        fit.constraint_residual = std::abs(d - epsilon);
        fit.converged = fit.constraint_residual <= kConstraintTol;
        fit.initializer_loglik = initializer_loglik;
        return fit;
    };

    // The unconstrained optimum on the surface is the global optimum there.
    const double d_mle = distance_of(pb, mle);
    if (std::abs(d_mle - epsilon) <= 1e-9) return assemble(mle, loglik_of(pb, mle));

    const Point init = project_to_constraint(pb, mle);
    const double init_ll = loglik_of(pb, init);

    Point best = init;
    double best_ll = init_ll;

    constexpr int kStarts = 5;
    const double lambdas[] = {1e2, 1e3, 1e4, 1e5, 1e6, 1e7, 1e8};
    for (int start = 0; start < kStarts; ++start) {
        Point cur = init;
        if (start > 0) {
            RngStream jitter = RngStream(0x1f2e3d4c5b6a7988ULL, static_cast<std::uint64_t>(start));
            const double sigma = 0.05 * start;
            auto wiggle = [&](double v) {
                return std::max(kRateFloor, v * std::exp(sigma * (2.0 * jitter.next_unit() - 1.0)));
            };
            for (double& a : cur.alpha1) a = wiggle(a);
            for (double& a : cur.alpha2) a = wiggle(a);
            if (pb.psi1_free) cur.psi1 = wiggle(cur.psi1);
            if (pb.psi2_free) cur.psi2 = wiggle(cur.psi2);
            cur = project_to_constraint(pb, cur);
        }
        double step = 0.3;
        for (double lambda : lambdas) {
            cur = nm_stage(pb, cur, lambda, step, 250 * pb.dim());
            step = std::max(0.02, 0.5 * step);
        }
        const Point polished = project_to_constraint(pb, cur);
        const double ll = loglik_of(pb, polished);
        if (ll > best_ll) {
            best = polished;
            best_ll = ll;
        }
    }
    return assemble(best, init_ll);
}

}  // namespace crs
