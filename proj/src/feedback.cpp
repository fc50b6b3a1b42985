#include "maczac/feedback.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "maczac/errors.hpp"
#include "maczac/link.hpp"

namespace maczac {

void FeedbackConfig::validate() const {
    if (!(max_current > 0.0)) throw ConfigError("max_current must be positive");
    if (!(dither_current >= 0.0 && dither_current < max_current)) {
        throw ConfigError("dither_current must lie in [0, max_current)");
    }
    if (!(thermal_time_constant > 0.0)) throw ConfigError("thermal time constant must be positive");
    if (!std::isfinite(kp) || !std::isfinite(kd) || !std::isfinite(thermal_gain)) {
        throw ConfigError("feedback gains must be finite");
    }
}

DriftState make_drift_state(const DriftModel& drift, const FeedbackConfig& control,
                            double initial_phase) {
    control.validate();
    DriftState state;
    state.drift = drift;
    state.control = control;
    state.phase_drift = initial_phase;
    if (control.enabled) state.peltier_current = control.dither_current;
    return state;
}

DriftState update_controller(DriftState state, double measured_er_minus_db) {
    const FeedbackConfig& c = state.control;
    if (!c.enabled) {
        state.peltier_current = state.operating_current;
        return state;
    }
    const double objective = perr_from_er_db(measured_er_minus_db);
    if (state.last_objective && c.dither_current > 0.0) {
        // The last two measurements straddle the operating point by
        // +-dither_current; their difference is a central-difference gradient.
        const double gradient =
            state.dither_sign * (objective - *state.last_objective) / (2.0 * c.dither_current);
        const double correction = c.kp * gradient + c.kd * (gradient - state.last_gradient);
        const double limit = c.max_current - c.dither_current;
        state.operating_current = std::clamp(state.operating_current - correction, -limit, limit);
        state.last_gradient = gradient;
    }
    state.last_objective = objective;
    state.dither_sign = -state.dither_sign;
    state.peltier_current = state.operating_current + state.dither_sign * c.dither_current;
    return state;
}

DriftState advance_drift(DriftState state, double dt, Rng& rng) {
    if (!(dt > 0.0)) throw ConfigError("feedback step must be positive");
    const DriftModel& d = state.drift;
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double t0 = state.time;
    const double t1 = t0 + dt;
    double step = d.rate * dt;
    if (d.sigma > 0.0) step += d.sigma * std::sqrt(dt) * gauss(rng);
    if (d.sine_amplitude != 0.0) {
        const double w = 2.0 * std::numbers::pi / d.sine_period;
        step += d.sine_amplitude * (std::sin(w * t1) - std::sin(w * t0));
    }
    state.phase_drift += step;

    const double target = state.control.thermal_gain * state.peltier_current;
    const double relax = -std::expm1(-dt / state.control.thermal_time_constant);
    state.thermal_phase += (target - state.thermal_phase) * relax;
    state.time = t1;
    return state;
}

DriftState step_feedback(DriftState state, double measured_er_minus_db, double dt, Rng& rng) {
    return advance_drift(update_controller(std::move(state), measured_er_minus_db), dt, rng);
}

}  // namespace maczac
