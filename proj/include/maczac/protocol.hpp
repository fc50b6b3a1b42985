#pragma once

#include <numbers>
#include <string>

#include "maczac/optics.hpp"

namespace maczac {

enum class Decoy { Mu, Nu };

/// Modulator time slot. Arm slots are the instants at which CCW bin k crosses
/// the modulator; the control slot is the single CW pass (T_minus).
struct Slot {
    static constexpr int kControl = -1;
    int index = kControl;

    static Slot early() { return {0}; }
    static Slot late() { return {1}; }
    static Slot control() { return {kControl}; }
    bool is_control() const { return index == kControl; }
    friend bool operator==(const Slot&, const Slot&) = default;
};

/// Logical symbol and decoy level. For qubits bin 0 is |E>, bin 1 is |L>;
/// kSuperposition is |-> (or the uniform d-bin superposition for qudits).
struct SymbolPlan {
    static constexpr int kSuperposition = -1;
    int bin = 0;
    Decoy decoy = Decoy::Mu;
    int dimension = 2;

    static constexpr SymbolPlan early(Decoy level = Decoy::Mu) { return {0, level, 2}; }
    static constexpr SymbolPlan late(Decoy level = Decoy::Mu) { return {1, level, 2}; }
    static constexpr SymbolPlan minus(Decoy level = Decoy::Mu) { return {kSuperposition, level, 2}; }

    constexpr bool is_superposition() const { return bin == kSuperposition; }
    void validate() const;
    std::string name() const;
    friend bool operator==(const SymbolPlan&, const SymbolPlan&) = default;
};

/// Mean photon numbers of the two intensities, the phase used for the high
/// level, and the probability of sending the high level.
struct DecoyLevels {
    double mu = 0.5;
    double nu = 0.15;
    double alpha_mu = std::numbers::pi;
    double p_mu = 0.7;

    void validate() const;
};

struct ScheduledPhases {
    PhaseSchedule phases;
    Slot slot;
};

/// Phase alpha_nu with sin^2(alpha_nu / 2) = (nu / mu) sin^2(alpha_mu / 2).
double alpha_nu(const DecoyLevels& levels);

/// Control-slot phase that gives a d-bin superposition the same mean photon
/// number as a single-bin state prepared with `alpha`:
/// sin^2(beta / 2) = (1 / d) sin^2(alpha / 2). d = 2 is the qubit |-> case.
double beta_for(double alpha, int dimension = 2);

ScheduledPhases schedule_for(const SymbolPlan& plan, const DecoyLevels& levels);

/// Mean photon number leaving the encoder for `plan` when the source emits
/// `source_mean` photons per pulse.
double mean_photon_of(const SymbolPlan& plan, const DecoyLevels& levels, const EncoderConfig& cfg,
                      double source_mean);

/// Source intensity that puts exactly mu photons per pulse on the |E>, mu
/// state of `cfg`.
double calibrated_source_mean(const DecoyLevels& levels, const EncoderConfig& cfg);

}  // namespace maczac
