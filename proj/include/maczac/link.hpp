#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "maczac/optics.hpp"
#include "maczac/protocol.hpp"
#include "maczac/random.hpp"

namespace maczac {

double db_to_transmittance(double loss_db);

struct ChannelModel {
    double length_km = 50.0;
    double attenuation_db_per_km = 0.2;
    double excess_loss_db = 6.4;  // connectors and detector inefficiency

    double total_loss_db() const { return length_km * attenuation_db_per_km + excess_loss_db; }
    double transmittance() const { return db_to_transmittance(total_loss_db()); }
    void validate() const;
};

struct DetectorModel {
    double efficiency = 1.0;  // folded into the channel loss by default
    double dark_rate = 200.0;
    double jitter_sigma = 30e-12;
    double dead_time = 5e-9;  // shorter than the bin spacing: slots are detected independently
    double timetag_resolution = 1e-12;

    void validate() const;
};

/// Passive basis choice followed by a direct time-of-arrival detector (Z) and
/// an unbalanced Faraday-Michelson interferometer with one detector per output
/// port (X).
struct ReceiverModel {
    double basis_split = 0.79;  // probability of routing to Z
    double interferometer_delay = 10e-9;
    double phase_bob = 0.0;
    double arm_loss_db = 0.0;  // extra loss of the X arm

    void validate() const;
};

/// Arrival slots inside one laser period. Slot k is centred on
/// first_bin + k * bin_spacing and is window_width wide.
struct PulseTiming {
    double period = 100e-9;
    double first_bin = 20e-9;
    double bin_spacing = 10e-9;
    double window_width = 1e-9;

    double slot_centre(int slot) const { return first_bin + slot * bin_spacing; }
    /// Slot containing the in-period time of `timestamp`, or -1.
    int slot_of(double timestamp, int slot_count) const;
    void validate() const;
};

enum class DetectorId : int { Z = 0, XPlus = 1, XMinus = 2 };
inline constexpr std::array<DetectorId, 3> kAllDetectors{DetectorId::Z, DetectorId::XPlus,
                                                         DetectorId::XMinus};
const char* to_string(DetectorId id);

/// Mean photon number arriving at `detector` in arrival slot `slot`.
struct ArrivalWindow {
    DetectorId detector = DetectorId::Z;
    int slot = 0;
    double mean_photons = 0.0;
};

struct ClickRecord {
    DetectorId detector = DetectorId::Z;
    double timestamp = 0.0;  // seconds, quantised to the time-tag resolution
    std::optional<SymbolPlan> truth;
};

struct EmittedPulse {
    TimeBinField field;
    double mean_photons = 0.0;
    SymbolPlan plan;
};

/// Encoder output for `plan` with the source set to `source_mean` photons per
/// pulse. When `phase_rng` is given the pulse gets a uniformly random global
/// phase (phase-randomised weak coherent pulse); photon statistics do not
/// depend on it.
EmittedPulse emit_pulse(const SymbolPlan& plan, const DecoyLevels& levels, const EncoderConfig& cfg,
                        double source_mean, Rng* phase_rng = nullptr);

/// Splits the channel output between the Z detector and the two X ports.
/// `receiver_phase` is the total phase of the long interferometer arm
/// relative to the encoder (phi_B plus drift and thermal correction).
///
/// Z sees slot k with |a_k|^2. Each X port s = +1/-1 sees |a_0|^2/4 in slot 0,
/// |a_0 e^{i phase} + s a_1|^2/4 in slot 1 and |a_1|^2/4 in slot 2.
std::vector<ArrivalWindow> receiver_windows(const TimeBinField& field, const ChannelModel& ch,
                                            const DetectorModel& det, const ReceiverModel& rcv,
                                            double receiver_phase);

/// Characterisation setup: the attenuated encoder output goes straight to a
/// single detector (reported as DetectorId::Z).
std::vector<ArrivalWindow> direct_windows(const TimeBinField& field, const ChannelModel& ch,
                                          const DetectorModel& det);

/// Expected clicks per period on one detector, ignoring dark counts.
double expected_signal_clicks(std::span<const ArrivalWindow> windows, DetectorId detector,
                              const DetectorModel& det, const PulseTiming& timing);

/// Photon-level click generator for threshold detectors with Poissonian
/// light, Poissonian dark counts, Gaussian jitter, time-tag quantisation and
/// non-paralysable dead time. Each detector draws from its own stream.
class ClickGenerator {
  public:
    ClickGenerator(DetectorModel det, PulseTiming timing, std::uint64_t seed);

    /// One laser period with index `pulse_index`; clicks are appended to `out`.
    void pulse(std::uint64_t pulse_index, std::span<const ArrivalWindow> windows,
               const std::optional<SymbolPlan>& truth, std::vector<ClickRecord>& out);

    /// `count` identical periods starting at `first_pulse` on the listed
    /// detectors. Clicks are delivered detector by detector, in time order
    /// within each detector. Geometric skipping keeps the cost proportional to
    /// the number of clicks.
    void pulse_train(std::uint64_t first_pulse, std::uint64_t count,
                     std::span<const ArrivalWindow> windows, const std::optional<SymbolPlan>& truth,
                     const std::function<void(const ClickRecord&)>& sink,
                     std::span<const DetectorId> detectors = kAllDetectors);

    const DetectorModel& detector() const { return det_; }
    const PulseTiming& timing() const { return timing_; }

  private:
    struct Channel {
        Rng rng;
        double last_click = -1.0;
        bool has_clicked = false;
    };

    Channel& channel(DetectorId id) { return channels_[static_cast<std::size_t>(id)]; }
    std::optional<double> register_click(Channel& ch, double raw_time);

    DetectorModel det_;
    PulseTiming timing_;
    std::array<Channel, 3> channels_;
};

/// Receiver-side detection of one emitted pulse. Convenience wrapper around
/// receiver_windows and ClickGenerator::pulse.
std::vector<ClickRecord> detect(const TimeBinField& field, const ChannelModel& ch,
                                const ReceiverModel& rcv, double drift_phase,
                                ClickGenerator& gen, std::uint64_t pulse_index,
                                const std::optional<SymbolPlan>& truth = std::nullopt);

/// Which arrival slots count as correct and wrong on which detector.
struct WindowAssignment {
    PulseTiming timing;
    DetectorId detector = DetectorId::Z;
    int correct_slot = 0;
    int wrong_slot = 1;
    int slot_count = 2;
};

struct ErrorMetrics {
    std::uint64_t n_correct = 0;
    std::uint64_t n_wrong = 0;
    double p_err = 0.0;
    double er_db = 0.0;
    double p_err_sigma = 0.0;  // binomial standard error
    double er_db_sigma = 0.0;
};

double er_db_from_perr(double p_err);
double perr_from_er_db(double er_db);

ErrorMetrics perr_from_counts(std::uint64_t n_wrong, std::uint64_t n_correct);
ErrorMetrics perr_from_clicks(std::span<const ClickRecord> clicks, const WindowAssignment& windows);

/// Time-of-arrival histogram folded onto one period.
class ArrivalHistogram {
  public:
    ArrivalHistogram(double period, double bin_width);

    void add(double timestamp);
    const std::vector<std::uint64_t>& counts() const { return counts_; }
    double bin_width() const { return bin_width_; }
    double bin_time(std::size_t i) const { return (static_cast<double>(i) + 0.5) * bin_width_; }

  private:
    double period_;
    double bin_width_;
    std::vector<std::uint64_t> counts_;
};

/// Mean photon number mu such that a source sending mu with probability p_mu
/// and nu = nu_ratio * mu otherwise yields `detection_rate` clicks per second
/// through `loss_db` at `repetition_rate`, with 1 - exp(-mean * eta) per pulse.
double fit_mean_photon(double detection_rate, double repetition_rate, double loss_db, double p_mu,
                       double nu_ratio);

}  // namespace maczac
