#pragma once

#include <iosfwd>
#include <vector>

#include "maczac/optics.hpp"
#include "maczac/protocol.hpp"

namespace maczac {

/// Two-comparator DAC driving the single phase modulator.
///
/// Comparator outputs are summed by a resistive network, so the analog pulse
/// is the sum of the supply levels of the comparators that fired. Slot times
/// are measured from the start of the 100 ns laser period.
struct DacConfig {
    double v1_el = 0.0;  // volts, key-basis comparator 1
    double v2_el = 0.0;  // volts, key-basis comparator 2
    double v1_c = 0.0;   // volts, control comparator 1
    double v2_c = 0.0;   // volts, control comparator 2
    double v_pi = 1.0;   // volts for a pi phase shift
    double pulse_width = 4e-9;
    double t_early = 50e-9;
    double t_late = 60e-9;
    double t_minus = 20e-9;
    double period = 100e-9;
    double sample_interval = 0.1e-9;

    double slot_time(Slot slot) const;
    void validate() const;
};

struct DigitalPattern {
    bool d_el_1 = false;
    bool d_el_2 = false;
    bool d_c_1 = false;
    bool d_c_2 = false;
    Slot slot = Slot::control();

    bool fires_key() const { return d_el_1 || d_el_2; }
    bool fires_control() const { return d_c_1 || d_c_2; }
    void validate() const;
    friend bool operator==(const DigitalPattern&, const DigitalPattern&) = default;
};

/// Voltage sampled on a uniform grid covering one period.
struct Waveform {
    double sample_interval = 0.1e-9;
    std::vector<double> volts;

    double time_of(std::size_t i) const { return static_cast<double>(i) * sample_interval; }
    double at(double t) const;
};

DigitalPattern pattern_for(const SymbolPlan& plan);
Waveform waveform_for(const DigitalPattern& pattern, const DacConfig& cfg);

/// Reads the modulator voltage at each slot and converts it with
/// phi = pi V / V_pi. Throws TimingError if a pulse sits more than half a
/// pulse width away from every slot.
PhaseSchedule phases_from_waveform(const Waveform& w, const DacConfig& cfg);

/// Supply voltages that realise alpha_mu, alpha_nu, beta_mu, beta_nu.
DacConfig calibrate_voltages(const DecoyLevels& levels, const DacConfig& cfg);

void write_waveform_csv(std::ostream& os, const Waveform& w);

}  // namespace maczac
