#include "maczac/electronics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <ostream>
#include <string>

#include "maczac/errors.hpp"

namespace maczac {

namespace {

std::size_t sample_count(const DacConfig& cfg) {
    return static_cast<std::size_t>(std::llround(cfg.period / cfg.sample_interval));
}

}  // namespace

double DacConfig::slot_time(Slot slot) const {
    switch (slot.index) {
        case Slot::kControl: return t_minus;
        case 0: return t_early;
        case 1: return t_late;
        default: throw DimensionError("DAC drives qubit slots only, got slot " +
                                      std::to_string(slot.index));
    }
}

void DacConfig::validate() const {
    for (double v : {v1_el, v2_el, v1_c, v2_c}) {
        if (!(v >= 0.0)) throw ConfigError("comparator supply voltages must be >= 0");
    }
    if (!(v_pi > 0.0)) throw ConfigError("v_pi must be positive");
    if (!(sample_interval > 0.0) || !(period > 0.0)) {
        throw ConfigError("period and sample interval must be positive");
    }
    if (!(pulse_width > 0.0)) throw ConfigError("pulse width must be positive");
    if (!(pulse_width < std::abs(t_late - t_early))) {
        throw ConfigError("pulse width must be shorter than the bin spacing T_L - T_E");
    }
    const std::array<double, 3> slots{t_minus, t_early, t_late};
    for (double t : slots) {
        if (t - 0.5 * pulse_width < 0.0 || t + 0.5 * pulse_width > period) {
            throw ConfigError("slot pulse does not fit inside the period");
        }
    }
    for (std::size_t i = 0; i < slots.size(); ++i) {
        for (std::size_t j = i + 1; j < slots.size(); ++j) {
            if (std::abs(slots[i] - slots[j]) < pulse_width) {
                throw ConfigError("slot pulses overlap: slots must be at least one pulse width apart");
            }
        }
    }
}

void DigitalPattern::validate() const {
    if (fires_key() && fires_control()) {
        throw ConfigError("key-basis and control channels cannot fire in the same period");
    }
}

double Waveform::at(double t) const {
    const auto i = static_cast<long long>(std::llround(t / sample_interval));
    if (i < 0 || static_cast<std::size_t>(i) >= volts.size()) return 0.0;
    return volts[static_cast<std::size_t>(i)];
}

DigitalPattern pattern_for(const SymbolPlan& plan) {
    plan.validate();
    if (plan.dimension != 2) throw DimensionError("the DAC only drives qubit symbols");
    const bool high = plan.decoy == Decoy::Mu;
    DigitalPattern p;
    if (plan.is_superposition()) {
        p.d_c_1 = true;
        p.d_c_2 = high;
        p.slot = Slot::control();
    } else {
        p.d_el_1 = true;
        p.d_el_2 = high;
        p.slot = Slot{plan.bin};
    }
    return p;
}

Waveform waveform_for(const DigitalPattern& pattern, const DacConfig& cfg) {
    cfg.validate();
    pattern.validate();
    Waveform w;
    w.sample_interval = cfg.sample_interval;
    w.volts.assign(sample_count(cfg), 0.0);

    double amplitude = 0.0;
    if (pattern.d_el_1) amplitude += cfg.v1_el;
    if (pattern.d_el_2) amplitude += cfg.v2_el;
    if (pattern.d_c_1) amplitude += cfg.v1_c;
    if (pattern.d_c_2) amplitude += cfg.v2_c;
    if (amplitude == 0.0) return w;

    const double centre = cfg.slot_time(pattern.slot);
    const double half = 0.5 * cfg.pulse_width;
    for (std::size_t i = 0; i < w.volts.size(); ++i) {
        const double t = w.time_of(i);
        if (t >= centre - half && t < centre + half) w.volts[i] = amplitude;
    }
    return w;
}

PhaseSchedule phases_from_waveform(const Waveform& w, const DacConfig& cfg) {
    cfg.validate();
    const std::array<Slot, 3> slots{Slot::control(), Slot::early(), Slot::late()};

    // Every contiguous pulse must be centred on one of the slots.
    std::size_t i = 0;
    while (i < w.volts.size()) {
        if (w.volts[i] == 0.0) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        while (i < w.volts.size() && w.volts[i] != 0.0) ++i;
        const double centre = 0.5 * (w.time_of(start) + w.time_of(i - 1));
        const bool aligned = std::any_of(slots.begin(), slots.end(), [&](Slot s) {
            return std::abs(centre - cfg.slot_time(s)) <= 0.5 * cfg.pulse_width;
        });
        if (!aligned) {
            throw TimingError("voltage pulse centred at " + std::to_string(centre * 1e9) +
                              " ns does not match any modulator slot");
        }
    }

    const double scale = std::numbers::pi / cfg.v_pi;
    PhaseSchedule ph;
    ph.phi_c = scale * w.at(cfg.t_minus);
    ph.phi_arm = {scale * w.at(cfg.t_early), scale * w.at(cfg.t_late)};
    return ph;
}

DacConfig calibrate_voltages(const DecoyLevels& levels, const DacConfig& cfg) {
    const double a_mu = levels.alpha_mu;
    const double a_nu = alpha_nu(levels);
    const double b_mu = beta_for(a_mu);
    const double b_nu = beta_for(a_nu);
    const double volts_per_rad = cfg.v_pi / std::numbers::pi;

    DacConfig out = cfg;
    out.v1_el = a_nu * volts_per_rad;
    out.v2_el = (a_mu - a_nu) * volts_per_rad;
    out.v1_c = b_nu * volts_per_rad;
    out.v2_c = (b_mu - b_nu) * volts_per_rad;
    if (out.v1_el < 0.0 || out.v2_el < 0.0 || out.v1_c < 0.0 || out.v2_c < 0.0) {
        throw CalibrationError("requested decoy phases need a negative comparator voltage");
    }
    return out;
}

void write_waveform_csv(std::ostream& os, const Waveform& w) {
    os << "time_s,volts\n";
    for (std::size_t i = 0; i < w.volts.size(); ++i) {
        os << w.time_of(i) << ',' << w.volts[i] << '\n';
    }
}

}  // namespace maczac
