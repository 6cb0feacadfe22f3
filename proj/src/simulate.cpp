#include "crs/simulate.hpp"

#include <cmath>
#include <limits>

#include "crs/errors.hpp"

namespace crs {

namespace {

// Cause of the latent event: categorical with weights alpha_j / alpha_0.
unsigned draw_cause(const ModelParams& params, double u) {
    const auto& alpha = params.intensities();
    const double target = u * params.all_cause_hazard();
    double cum = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t j = 0; j < alpha.size(); ++j) {
        if (alpha[j] <= 0.0) continue;
        cum += alpha[j];
        last_positive = j + 1;
        if (target < cum) return static_cast<unsigned>(j + 1);
    }
    return static_cast<unsigned>(last_positive);  // guards the u ~ 1 edge
}

}  // namespace

Observation draw_pathway(const ModelParams& params, const CensoringSpec& censoring,
                         RngStream& rng) {
    // Fixed draw order: event time, cause, then (exponential only) the
    // censoring time. Every draw is consumed even when unused so a stream
    // position maps to the same role for any parameter values.
    const double u_event = rng.next_unit();
    const double u_cause = rng.next_unit();
    const double hazard = params.all_cause_hazard();
    const double event_time =
        hazard > 0.0 ? -std::log(u_event) / hazard : std::numeric_limits<double>::infinity();

    if (censoring.kind() == CensoringKind::Administrative) {
        const double horizon = censoring.horizon();
        if (event_time >= horizon) return Observation{horizon, 0};
        return Observation{event_time, draw_cause(params, u_cause)};
    }

    const double u_cens = rng.next_unit();
    const double rate = censoring.rate();
    const double censor_time =
        rate > 0.0 ? -std::log(u_cens) / rate : std::numeric_limits<double>::infinity();
    if (hazard <= 0.0 && rate <= 0.0)
        throw input_error("draw_pathway: no event intensity and no censoring; nothing to observe");
    if (censor_time < event_time) return Observation{censor_time, 0};
    return Observation{event_time, draw_cause(params, u_cause)};
}

Cohort draw_cohort(const ModelParams& params, const CensoringSpec& censoring, std::size_t n,
                   const RngStream& stream, int label) {
    if (n == 0) throw input_error("draw_cohort: n must be >= 1");
    Cohort cohort;
    cohort.num_causes = params.num_causes();
    cohort.label = label;
    cohort.observations.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        RngStream individual = stream.child(i);
        cohort.observations.push_back(draw_pathway(params, censoring, individual));
    }
    return cohort;
}

}  // namespace crs
