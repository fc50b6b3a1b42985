#include <doctest.h>

#include <cmath>
#include <numbers>

#include "maczac/errors.hpp"
#include "maczac/feedback.hpp"
#include "maczac/link.hpp"

using namespace maczac;

namespace {

/// Error probability of |-> for a residual interferometer phase.
double er_for_phase(double phase) {
    const double p = std::clamp(std::pow(std::sin(phase / 2), 2), 1e-12, 1 - 1e-12);
    return er_db_from_perr(p);
}

double wrapped(double phi) { return std::remainder(phi, 2 * std::numbers::pi); }

}  // namespace

TEST_CASE("fixed point without drift") {
    DriftModel none{0.0, 0.0, 0.0, 86400.0};
    auto state = make_drift_state(none, FeedbackConfig{});
    Rng rng(1);
    double max_correction = 0.0;
    for (int i = 0; i < 2000; ++i) {
        state = step_feedback(state, er_for_phase(state.phase_offset()), 1.0, rng);
        if (i > 200) max_correction = std::max(max_correction, std::abs(state.operating_current));
    }
    CHECK(max_correction < 0.02);
    CHECK(std::abs(state.phase_drift) == 0.0);
}

TEST_CASE("constant drift is tracked with a bounded phase error") {
    DriftModel ramp{0.0, 2e-4, 0.0, 86400.0};
    auto state = make_drift_state(ramp, FeedbackConfig{});
    Rng rng(2);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        state = step_feedback(state, er_for_phase(state.phase_offset()), 1.0, rng);
        if (i > 100) worst = std::max(worst, std::abs(wrapped(state.phase_offset())));
    }
    CHECK(worst < 0.3);
    CHECK(std::abs(state.operating_current) < FeedbackConfig{}.max_current);
}

TEST_CASE("without feedback the phase random-walks away") {
    FeedbackConfig off;
    off.enabled = false;
    double mean_qber = 0.0;
    const int runs = 20;
    for (int r = 0; r < runs; ++r) {
        auto state = make_drift_state(DriftModel{}, off);
        Rng rng(100 + r);
        for (int i = 0; i < 3600; ++i) state = step_feedback(state, 0.0, 1.0, rng);
        CHECK(state.peltier_current == 0.0);
        mean_qber += std::pow(std::sin(state.phase_offset() / 2), 2) / runs;
    }
    CHECK(mean_qber > 0.2);
}

TEST_CASE("current limit is respected") {
    FeedbackConfig c;
    c.kp = 50.0;
    auto state = make_drift_state(DriftModel{0.0, 0.05, 0.0, 86400.0}, c);
    Rng rng(3);
    for (int i = 0; i < 5000; ++i) {
        state = step_feedback(state, er_for_phase(state.phase_offset()), 1.0, rng);
        CHECK(std::abs(state.peltier_current) <= c.max_current + 1e-12);
    }
}

TEST_CASE("feedback configuration checks") {
    FeedbackConfig c;
    c.dither_current = 3.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    auto state = make_drift_state(DriftModel{}, FeedbackConfig{});
    Rng rng(4);
    CHECK_THROWS_AS(advance_drift(state, 0.0, rng), ConfigError);
}
