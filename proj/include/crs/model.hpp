#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace crs {

/// Constant cause-specific transition intensities of one competing-risks
/// model: one non-negative rate per cause 1..k, leaving the initial state.
class ModelParams {
public:
    /// Empty placeholder (k = 0); any computation on it throws. Exists so
    /// report structs can be default-constructed.
    ModelParams() = default;

    /// Rejects empty vectors, negative or non-finite rates, and the all-zero
    /// vector (a model without any event intensity).
    explicit ModelParams(std::vector<double> intensities);

    /// Same validation except that an all-zero vector is accepted. Fitted
    /// estimates can legitimately be all-zero (a sample without events);
    /// downstream formulas treat that case by continuity.
    static ModelParams from_estimates(std::vector<double> intensities);

    std::size_t num_causes() const noexcept { return intensities_.size(); }

    /// Cause-specific intensity, 1-based cause index.
    double intensity(std::size_t cause) const;

    const std::vector<double>& intensities() const noexcept { return intensities_; }

    /// Sum of all cause-specific intensities.
    double all_cause_hazard() const noexcept { return total_; }

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    struct estimates_tag {};
    ModelParams(std::vector<double> intensities, estimates_tag);

    std::vector<double> intensities_;
    double total_ = 0.0;
};

enum class CensoringKind { Administrative, Exponential };

/// Censoring mechanism: administrative at a fixed horizon, or independent
/// exponential censoring times with a given rate.
class CensoringSpec {
public:
    static CensoringSpec administrative(double horizon);
    static CensoringSpec exponential(double rate);

    CensoringKind kind() const noexcept { return kind_; }
    double horizon() const;  ///< Administrative only.
    double rate() const;     ///< Exponential only.

    /// Rate the censoring mechanism adds to the decay of the observed
    /// transition probabilities: the exponential rate, or 0 for
    /// administrative censoring.
    double effective_rate() const noexcept {
        return kind_ == CensoringKind::Exponential ? value_ : 0.0;
    }

    std::string label() const;  ///< "adm:<T>" or "exp:<rate>".

    friend bool operator==(const CensoringSpec&, const CensoringSpec&) = default;

private:
    CensoringSpec(CensoringKind kind, double value) : kind_(kind), value_(value) {}
    CensoringKind kind_;
    double value_;
};

/// Location and value of the largest absolute difference between two
/// models' transition probabilities over causes and times.
struct SupDistanceWitness {
    double value = 0.0;        ///< the distance, in [0, 1]
    double arg_time = 0.0;     ///< attaining time in [0, tau]
    std::size_t arg_cause = 1; ///< attaining cause, 1-based
    int sign = +1;             ///< sign of (P1 - P2) at the witness point
};

/// Probability of having transitioned to `cause` by time t, for constant
/// intensities and an extra exponential decay `censor_rate` (pass 0 for the
/// uncensored / administrative formula):
///   P_{0j}(t) = alpha_j / (alpha_0 + psi) * (1 - exp(-(alpha_0 + psi) t)).
/// When alpha_0 + psi = 0 the value is 0 by continuity.
double transition_probability(const ModelParams& params, std::size_t cause, double t,
                              double censor_rate = 0.0);

/// Exact sup-norm distance between the two models' transition probability
/// curves over causes 1..k and t in [0, tau]. Each group's censoring enters
/// through its effective decay rate. Computed from the closed-form candidate
/// set (per-cause interior stationary point and the endpoint tau), not from
/// a grid.
SupDistanceWitness sup_distance(const ModelParams& m1, const ModelParams& m2,
                                const CensoringSpec& c1, const CensoringSpec& c2,
                                double tau);

/// Low-level variant of sup_distance on raw intensity spans plus each
/// group's extra decay rate.
SupDistanceWitness sup_distance_rates(std::span<const double> alpha1,
                                      std::span<const double> alpha2,
                                      double extra1, double extra2, double tau);

/// Largest absolute per-cause difference of the transition intensities.
double intensity_distance(const ModelParams& m1, const ModelParams& m2);

/// Which similarity measure a test is based on.
enum class Measure { TransitionProbabilities, TransitionIntensities };

const char* measure_label(Measure m);  ///< "prob" or "int"

}  // namespace crs
