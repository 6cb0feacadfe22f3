#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "crs/errors.hpp"
#include "crs/simulate.hpp"
#include "oracles.hpp"

using namespace crs;

namespace {

ModelParams margin_g1() { return ModelParams({0.0023, 0.0011, 0.0004}); }
ModelParams margin_g2() { return ModelParams({0.0008, 0.0026, 0.0019}); }

double censored_fraction(const Cohort& c) {
    std::size_t censored = 0;
    for (const auto& obs : c.observations) censored += obs.state == 0;
    return static_cast<double>(censored) / static_cast<double>(c.observations.size());
}

}  // namespace

TEST_SUITE_BEGIN("simulate");

TEST_CASE("rng streams are reproducible and distinct") {
    RngStream a(42, 7);
    RngStream b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    RngStream c(42, 8);
    CHECK(c.next_u64() != RngStream(42, 7).next_u64());
    // Child derivation ignores the parent's position.
    RngStream parent(9, 1);
    RngStream child_before = parent.child(3);
    parent.next_u64();
    parent.next_u64();
    RngStream child_after = parent.child(3);
    for (int i = 0; i < 10; ++i) CHECK(child_before.next_u64() == child_after.next_u64());
}

TEST_CASE("uniforms stay inside the open interval") {
    RngStream rng(5, 5);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.next_unit();
        CHECK(u > 0.0);
        CHECK(u < 1.0);
    }
    CHECK(rng.next_exponential(0.0) == doctest::Approx(INFINITY));
    CHECK(rng.next_exponential(2.0) > 0.0);
}

TEST_CASE("single cause with a far horizon always ends in state 1") {
    const ModelParams m({1.0});
    const CensoringSpec cens = CensoringSpec::administrative(1e9);
    RngStream rng(13, 0);
    for (int i = 0; i < 1000; ++i) {
        const Observation obs = draw_pathway(m, cens, rng);
        CHECK(obs.state == 1);
        CHECK(obs.time > 0.0);
    }
}

TEST_CASE("administrative censoring fraction matches the survivor function") {
    // exp(-0.0038 * 90) = 0.7103
    const Cohort c = draw_cohort(margin_g1(), CensoringSpec::administrative(90.0), 100000,
                                 RngStream(2025, 11));
    CHECK(std::abs(censored_fraction(c) - 0.71) < 0.01);
    for (const auto& obs : c.observations)
        if (obs.state == 0) CHECK(obs.time == 90.0);
}

TEST_CASE("exponential censoring fraction matches psi / (hazard + psi)") {
    // group 2: 0.01 / 0.0153 = 0.6536
    const Cohort c = draw_cohort(margin_g2(), CensoringSpec::exponential(0.01), 100000,
                                 RngStream(2025, 12));
    CHECK(std::abs(censored_fraction(c) - 0.65) < 0.01);
    const Cohort balanced = draw_cohort(ModelParams({0.01}), CensoringSpec::exponential(0.01),
                                        10000, RngStream(2025, 13));
    CHECK(std::abs(censored_fraction(balanced) - 0.5) < 0.02);
}

TEST_CASE("per-cause event fractions match the transition probabilities") {
    const ModelParams m = margin_g1();
    const Cohort c =
        draw_cohort(m, CensoringSpec::administrative(90.0), 100000, RngStream(99, 1));
    const double n = static_cast<double>(c.observations.size());
    const double expected[] = {0.1754, 0.0839, 0.0305};  // P_{0j}(90)
    for (unsigned j = 1; j <= 3; ++j) {
        const double count = static_cast<double>(
            std::count_if(c.observations.begin(), c.observations.end(),
                          [&](const Observation& o) { return o.state == j; }));
        CHECK(std::abs(count / n - expected[j - 1]) < 0.005);
        CHECK(std::abs(count / n - transition_probability(m, j, 90.0)) < 0.005);
    }
}

TEST_CASE("cohorts are deterministic and chunk-invariant") {
    const ModelParams m = margin_g1();
    const CensoringSpec cens = CensoringSpec::exponential(0.005);
    const RngStream stream(7, 77);
    const Cohort a = draw_cohort(m, cens, 5, stream);
    const Cohort b = draw_cohort(m, cens, 5, stream);
    CHECK(a == b);
    // Assembling individuals by hand, in reverse, reproduces the cohort.
    const Cohort big = draw_cohort(m, cens, 100, stream);
    for (std::size_t i = 100; i-- > 0;) {
        RngStream individual = stream.child(i);
        CHECK(draw_pathway(m, cens, individual) == big.observations[i]);
    }
    // A prefix stays a prefix when n grows.
    const Cohort bigger = draw_cohort(m, cens, 150, stream);
    for (std::size_t i = 0; i < 100; ++i) CHECK(big.observations[i] == bigger.observations[i]);
}

TEST_CASE("pooled observed times are exponential under exponential censoring") {
    const ModelParams m = margin_g1();
    const double psi = 0.005;
    const Cohort c = draw_cohort(m, CensoringSpec::exponential(psi), 100000, RngStream(31337, 2));
    std::vector<double> times;
    times.reserve(c.observations.size());
    double min_time = 1e300;
    for (const auto& obs : c.observations) {
        times.push_back(obs.time);
        min_time = std::min(min_time, obs.time);
    }
    CHECK(min_time > 0.0);
    const double rate = m.all_cause_hazard() + psi;
    const double d = oracles::ks_statistic(
        std::move(times), [&](double t) { return 1.0 - std::exp(-rate * t); });
    CHECK(std::sqrt(100000.0) * d < oracles::kKsCritical01);
}

TEST_CASE("degenerate parameter handling") {
    const ModelParams none = ModelParams::from_estimates({0.0, 0.0});
    RngStream rng(1, 1);
    // No events, administrative horizon: everyone is censored at the horizon.
    const Observation obs = draw_pathway(none, CensoringSpec::administrative(90.0), rng);
    CHECK(obs.state == 0);
    CHECK(obs.time == 90.0);
    // No events and no censoring: nothing can ever be observed.
    CHECK_THROWS_AS(draw_pathway(none, CensoringSpec::exponential(0.0), rng), input_error);
    CHECK_THROWS_AS(draw_cohort(margin_g1(), CensoringSpec::administrative(90.0), 0,
                                RngStream(0, 0)),
                    input_error);
}

TEST_SUITE_END();
