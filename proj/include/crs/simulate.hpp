#pragma once

#include <cstddef>
#include <vector>

#include "crs/model.hpp"
#include "crs/rng.hpp"

namespace crs {

/// One observed pathway: event-or-censoring time and the terminal state.
/// State 0 means censored before any event; states 1..k name the cause.
struct Observation {
    double time = 0.0;
    unsigned state = 0;
    friend bool operator==(const Observation&, const Observation&) = default;
};

/// An observed sample from one group.
struct Cohort {
    std::vector<Observation> observations;
    std::size_t num_causes = 0;  ///< k
    int label = 1;               ///< group identifier, 1 or 2
    friend bool operator==(const Cohort&, const Cohort&) = default;
};

/// Draws one pathway: a latent all-cause exponential event time, a
/// multinomial cause, and the censoring mechanism applied on top.
/// Consumes two uniforms (administrative) or three (exponential) from `rng`.
Observation draw_pathway(const ModelParams& params, const CensoringSpec& censoring,
                         RngStream& rng);

/// Draws n independent pathways. Individual i uses the substream
/// `stream.child(i)`, so the result depends only on the stream identity and
/// n, never on chunking or thread scheduling; the caller's stream is not
/// advanced.
Cohort draw_cohort(const ModelParams& params, const CensoringSpec& censoring, std::size_t n,
                   const RngStream& stream, int label = 1);

}  // namespace crs
