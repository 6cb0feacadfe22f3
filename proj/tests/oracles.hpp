// Test-only oracles, deliberately independent of the library's computation
// paths: plain-exp formulas, quadrature, grid search, golden-section.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracles {

// P_{0j}(t) by Simpson quadrature of the defining integral
//   int_0^t alpha_j * exp(-(alpha_0 + psi) s) ds,
// no closed form involved.
inline double cif_by_quadrature(const std::vector<double>& alpha, std::size_t cause_1based,
                                double t, double psi = 0.0, std::size_t intervals = 20000) {
    double alpha0 = 0.0;
    for (double a : alpha) alpha0 += a;
    const double decay = alpha0 + psi;
    const double aj = alpha[cause_1based - 1];
    auto integrand = [&](double s) { return aj * std::exp(-decay * s); };
    if (intervals % 2 == 1) ++intervals;
    const double h = t / static_cast<double>(intervals);
    double sum = integrand(0.0) + integrand(t);
    for (std::size_t i = 1; i < intervals; ++i)
        sum += integrand(h * static_cast<double>(i)) * (i % 2 == 1 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

// Direct evaluation of P_{0j}(t) used by the grid oracle below.
inline double cif_direct(double alpha_j, double decay, double t) {
    if (decay <= 0.0) return 0.0;
    return alpha_j / decay * (1.0 - std::exp(-decay * t));
}

struct GridMax {
    double value = 0.0;
    double arg_time = 0.0;
    std::size_t arg_cause = 1;
};

// Brute-force sup over an equispaced time grid and all causes.
inline GridMax sup_distance_grid(const std::vector<double>& alpha1,
                                 const std::vector<double>& alpha2, double psi1, double psi2,
                                 double tau, std::size_t points = 100000) {
    double total1 = 0.0, total2 = 0.0;
    for (double a : alpha1) total1 += a;
    for (double a : alpha2) total2 += a;
    const double decay1 = total1 + psi1;
    const double decay2 = total2 + psi2;
    GridMax best;
    for (std::size_t i = 0; i < points; ++i) {
        const double t = tau * static_cast<double>(i) / static_cast<double>(points - 1);
        const double e1 = decay1 > 0.0 ? std::exp(-decay1 * t) : 1.0;
        const double e2 = decay2 > 0.0 ? std::exp(-decay2 * t) : 1.0;
        for (std::size_t j = 0; j < alpha1.size(); ++j) {
            const double p1 = decay1 > 0.0 ? alpha1[j] / decay1 * (1.0 - e1) : 0.0;
            const double p2 = decay2 > 0.0 ? alpha2[j] / decay2 * (1.0 - e2) : 0.0;
            const double d = std::abs(p1 - p2);
            if (d > best.value) {
                best.value = d;
                best.arg_time = t;
                best.arg_cause = j + 1;
            }
        }
    }
    return best;
}

// Lipschitz constant of the per-cause difference curves: |f_j'| is bounded
// by the larger of the two cause intensities.
inline double sup_difference_lipschitz(const std::vector<double>& alpha1,
                                       const std::vector<double>& alpha2) {
    double lip = 0.0;
    for (std::size_t j = 0; j < alpha1.size(); ++j)
        lip = std::max(lip, std::max(alpha1[j], alpha2[j]));
    return lip;
}

// Golden-section maximizer for a concave function on [lo, hi].
inline double golden_max(const std::function<double(double)>& f, double lo, double hi,
                         std::size_t iters = 200) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (std::size_t i = 0; i < iters; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
    }
    return 0.5 * (a + b);
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double F = cdf(sample[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - F));
        d = std::max(d, std::abs(F - static_cast<double>(i) / n));
    }
    return d;
}

// Asymptotic critical value of sqrt(n) * D at level 0.01.
constexpr double kKsCritical01 = 1.6276;

}  // namespace oracles
