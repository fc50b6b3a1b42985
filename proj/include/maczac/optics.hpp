#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace maczac {

using ComplexAmp = std::complex<double>;

/// Lossless 2x2 beamsplitter. The reflected port picks up a factor i.
struct BeamSplitterSpec {
    double t = 0.5;

    double r() const { return 1.0 - t; }
    void validate() const;
};

/// Complex amplitudes of one pulse over d time bins (bin 0 = early).
struct TimeBinField {
    std::vector<ComplexAmp> amps;
    double bin_spacing = 10e-9;  // seconds

    std::size_t dimension() const { return amps.size(); }
    double intensity(std::size_t bin) const { return std::norm(amps.at(bin)); }
    double total_intensity() const;
};

/// The device under simulation.
///
/// `splitters` holds BS1 (the Sagnac input), BS2 and BS3 (the unbalanced
/// Mach-Zehnder). Imperfect splitters are only modelled for d = 2; for d > 2
/// all three must be 50/50 and stand for the ideal multiport tree.
///
/// `modulator_extinction` is the fraction of a phase applied in one CCW bin
/// slot that bleeds onto the other CCW bin slot (finite pulse isolation of the
/// single modulator). Zero means perfect isolation.
struct EncoderConfig {
    std::vector<BeamSplitterSpec> splitters{{0.5}, {0.5}, {0.5}};
    int dimension = 2;
    double omega_tau = 0.0;  // residual arm phase, radians
    double modulator_extinction = 0.0;

    static EncoderConfig ideal(int dimension = 2);
    bool is_ideal() const;
    void validate() const;
};

/// Phases applied by the modulator: phi_c on the CW pass and one phase per
/// CCW time bin (for d = 2: phi_arm[0] = phi_e, phi_arm[1] = phi_l).
struct PhaseSchedule {
    double phi_c = 0.0;
    std::vector<double> phi_arm{0.0, 0.0};

    static PhaseSchedule qubit(double phi_c, double phi_e, double phi_l) {
        return {phi_c, {phi_e, phi_l}};
    }
    std::size_t dimension() const { return phi_arm.size(); }
    void validate() const;
};

struct LoopAmplitudes {
    TimeBinField cw;
    TimeBinField ccw;
};

std::pair<ComplexAmp, ComplexAmp> split_input(ComplexAmp e0, const BeamSplitterSpec& bs1);

/// Phases as actually seen by the light, after modulator bleed between the
/// CCW bin slots.
PhaseSchedule effective_phases(const EncoderConfig& cfg, const PhaseSchedule& ph);

/// Amplitudes of the e/l pulses in both loop directions just before they
/// recombine on BS1 (d = 2 only).
LoopAmplitudes loop_amplitudes(ComplexAmp e0, const EncoderConfig& cfg, const PhaseSchedule& ph);

/// Output field of the qubit encoder, obtained by recombining the loop
/// amplitudes on BS1 (d = 2 only).
TimeBinField encoder_output(ComplexAmp e0, const EncoderConfig& cfg, const PhaseSchedule& ph);

/// Closed-form output amplitudes of the ideal d-arm encoder:
/// E_k = (i e0 / d) exp(i (phi_c + phi_k) / 2) sin((phi_c - phi_k) / 2).
TimeBinField qudit_output(ComplexAmp e0, const EncoderConfig& cfg, const PhaseSchedule& ph);

/// Per-bin intensity transmittances from the closed forms. Ideal splitters use
/// (1/d^2) sin^2((phi_c - phi_k) / 2); imperfect qubit splitters use the
/// general T2 T3 (T1^2 + R1^2 - 2 T1 R1 cos(phi_c - phi_e)) family.
std::vector<double> transmittances(const EncoderConfig& cfg, const PhaseSchedule& ph);

/// Ideal closed form for one bin of a d-dimensional encoder.
double ideal_transmittance(double phi_c, double phi_k, int dimension);

/// General imperfect-splitter closed form for the qubit encoder, returns
/// {T_e, T_l}.
std::pair<double, double> general_transmittances(const BeamSplitterSpec& bs1,
                                                 const BeamSplitterSpec& bs2,
                                                 const BeamSplitterSpec& bs3, double phi_c,
                                                 double phi_e, double phi_l);

/// Early-bin transmittance floor with BS2 = BS3 = 50/50 and no modulation.
double min_transmittance(double t1);
/// Lowest achievable time-of-arrival error for a given BS1 transmittance.
double min_qber(double t1);

/// Numerically minimises the general early-bin transmittance over the phase
/// difference (coarse grid followed by Brent refinement).
double numeric_min_transmittance(double t1);

}  // namespace maczac
