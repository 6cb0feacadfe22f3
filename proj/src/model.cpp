#include "crs/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "crs/errors.hpp"

namespace crs {

namespace {

void check_entries(const std::vector<double>& intensities) {
    if (intensities.empty()) throw input_error("ModelParams: needs at least one cause");
    for (std::size_t j = 0; j < intensities.size(); ++j) {
        const double a = intensities[j];
        if (!std::isfinite(a) || a < 0.0) {
            std::ostringstream os;
            os << "ModelParams: intensity for cause " << (j + 1) << " is " << a
               << "; rates must be finite and non-negative";
            throw input_error(os.str());
        }
    }
}

}  // namespace

ModelParams::ModelParams(std::vector<double> intensities)
    : ModelParams(std::move(intensities), estimates_tag{}) {
    if (total_ <= 0.0) throw input_error("ModelParams: all intensities are zero");
}

ModelParams ModelParams::from_estimates(std::vector<double> intensities) {
    return ModelParams(std::move(intensities), estimates_tag{});
}

ModelParams::ModelParams(std::vector<double> intensities, estimates_tag)
    : intensities_(std::move(intensities)) {
    check_entries(intensities_);
    total_ = 0.0;
    for (double a : intensities_) total_ += a;
}

double ModelParams::intensity(std::size_t cause) const {
    if (cause < 1 || cause > intensities_.size()) {
        std::ostringstream os;
        os << "cause index " << cause << " out of range 1.." << intensities_.size();
        throw input_error(os.str());
    }
    return intensities_[cause - 1];
}

CensoringSpec CensoringSpec::administrative(double horizon) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw input_error("administrative censoring horizon must be positive");
    return CensoringSpec(CensoringKind::Administrative, horizon);
}

CensoringSpec CensoringSpec::exponential(double rate) {
    if (!(rate >= 0.0) || !std::isfinite(rate))
        throw input_error("exponential censoring rate must be finite and >= 0");
    return CensoringSpec(CensoringKind::Exponential, rate);
}

double CensoringSpec::horizon() const {
    if (kind_ != CensoringKind::Administrative)
        throw input_error("censoring spec has no horizon (not administrative)");
    return value_;
}

double CensoringSpec::rate() const {
    if (kind_ != CensoringKind::Exponential)
        throw input_error("censoring spec has no rate (not exponential)");
    return value_;
}

std::string CensoringSpec::label() const {
    std::ostringstream os;
    os << (kind_ == CensoringKind::Administrative ? "adm:" : "exp:") << value_;
    return os.str();
}

double transition_probability(const ModelParams& params, std::size_t cause, double t,
                              double censor_rate) {
    if (t < 0.0) throw input_error("transition_probability: t must be >= 0");
    if (censor_rate < 0.0) throw input_error("transition_probability: censor_rate must be >= 0");
    const double alpha_j = params.intensity(cause);  // validates the index
    const double decay = params.all_cause_hazard() + censor_rate;
    if (decay <= 0.0) return 0.0;  // all rates zero: 0 by continuity
    return alpha_j / decay * (-std::expm1(-decay * t));
}

namespace {

// P_{0j}(t) from a single cause intensity and the total decay rate.
inline double cif(double alpha_j, double decay, double t) {
    if (decay <= 0.0) return 0.0;
    return alpha_j / decay * (-std::expm1(-decay * t));
}

}  // namespace

SupDistanceWitness sup_distance_rates(std::span<const double> alpha1,
                                      std::span<const double> alpha2,
                                      double extra1, double extra2, double tau) {
    if (alpha1.size() != alpha2.size())
        throw input_error("sup_distance: models have different numbers of causes");
    if (!(tau > 0.0)) throw input_error("sup_distance: tau must be positive");

    double total1 = 0.0, total2 = 0.0;
    for (double a : alpha1) total1 += a;
    for (double a : alpha2) total2 += a;
    const double decay1 = total1 + extra1;
    const double decay2 = total2 + extra2;

    SupDistanceWitness best;
    best.value = -1.0;
    auto consider = [&](double t, std::size_t cause_1based) {
        const double diff = cif(alpha1[cause_1based - 1], decay1, t) -
                            cif(alpha2[cause_1based - 1], decay2, t);
        if (std::abs(diff) > best.value) {
            best.value = std::abs(diff);
            best.arg_time = t;
            best.arg_cause = cause_1based;
            best.sign = diff < 0.0 ? -1 : +1;
        }
    };

    for (std::size_t j = 1; j <= alpha1.size(); ++j) {
        const double a1 = alpha1[j - 1];
        const double a2 = alpha2[j - 1];
        consider(tau, j);
        // The per-cause difference has at most one interior stationary point,
        // at t* with a1 e^{-decay1 t*} = a2 e^{-decay2 t*}. Whenever that
        // point does not exist in (0, tau) the difference is monotone and the
        // endpoint already covers the cause.
        if (a1 > 0.0 && a2 > 0.0 && decay1 != decay2) {
            const double t_star = std::log(a1 / a2) / (decay1 - decay2);
            if (std::isfinite(t_star) && t_star > 0.0 && t_star < tau) consider(t_star, j);
        }
    }
    if (best.value < 0.0) best = SupDistanceWitness{};  // unreachable: k >= 1
    return best;
}

SupDistanceWitness sup_distance(const ModelParams& m1, const ModelParams& m2,
                                const CensoringSpec& c1, const CensoringSpec& c2,
                                double tau) {
    return sup_distance_rates(m1.intensities(), m2.intensities(), c1.effective_rate(),
                              c2.effective_rate(), tau);
}

double intensity_distance(const ModelParams& m1, const ModelParams& m2) {
    if (m1.num_causes() != m2.num_causes())
        throw input_error("intensity_distance: models have different numbers of causes");
    double best = 0.0;
    for (std::size_t j = 0; j < m1.num_causes(); ++j)
        best = std::max(best, std::abs(m1.intensities()[j] - m2.intensities()[j]));
    return best;
}

const char* measure_label(Measure m) {
    return m == Measure::TransitionProbabilities ? "prob" : "int";
}

}  // namespace crs
