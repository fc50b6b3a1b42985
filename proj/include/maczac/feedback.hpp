#pragma once

#include <optional>

#include "maczac/random.hpp"

namespace maczac {

/// Environmental phase drift of the receiver interferometer: a Wiener process
/// with optional constant rate and a slow sinusoid (thermal day cycle).
struct DriftModel {
    double sigma = 0.05;  // rad / sqrt(s)
    double rate = 0.0;    // rad / s
    double sine_amplitude = 0.0;  // rad
    double sine_period = 86400.0;  // s
};

/// Peltier loop on the receiver interferometer.
///
/// The loop minimises the error probability of |-> (equivalently maximises
/// its extinction ratio). It dithers the Peltier current by +-dither_current
/// on alternate steps, estimates the local gradient from consecutive
/// measurements, and moves the operating current against it with a
/// proportional and a derivative term. The Peltier shifts the arm phase by
/// thermal_gain * current with a first-order lag.
struct FeedbackConfig {
    bool enabled = true;
    double kp = 0.15;               // A^2 per unit error probability
    double kd = 0.05;
    double dither_current = 0.03;   // A
    double thermal_gain = 3.0;      // rad / A
    double thermal_time_constant = 1.0;  // s
    double max_current = 2.0;       // A

    void validate() const;
};

struct DriftState {
    double phase_drift = 0.0;    // environmental contribution, rad
    double thermal_phase = 0.0;  // Peltier contribution, rad
    double peltier_current = 0.0;  // applied current including dither, A
    double operating_current = 0.0;
    double time = 0.0;
    int dither_sign = 1;
    std::optional<double> last_objective;
    double last_gradient = 0.0;
    DriftModel drift;
    FeedbackConfig control;

    /// Receiver phase offset added by drift and compensation together.
    double phase_offset() const { return phase_drift + thermal_phase; }
};

/// Fresh state with the first dither step already applied.
DriftState make_drift_state(const DriftModel& drift, const FeedbackConfig& control,
                            double initial_phase = 0.0);

/// Controller update from one measured |-> extinction ratio (dB).
DriftState update_controller(DriftState state, double measured_er_minus_db);

/// Advances drift and thermal response by dt with the current already set.
DriftState advance_drift(DriftState state, double dt, Rng& rng);

/// One feedback period: controller update followed by dt of drift.
DriftState step_feedback(DriftState state, double measured_er_minus_db, double dt, Rng& rng);

}  // namespace maczac
