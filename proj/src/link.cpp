#include "maczac/link.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/tools/roots.hpp>

#include "maczac/errors.hpp"

namespace maczac {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double click_probability(double mean_photons) { return -std::expm1(-mean_photons); }

Stream stream_of(DetectorId id) {
    switch (id) {
        case DetectorId::Z: return Stream::DetectorZ;
        case DetectorId::XPlus: return Stream::DetectorXPlus;
        case DetectorId::XMinus: return Stream::DetectorXMinus;
    }
    return Stream::DetectorZ;
}

}  // namespace

double db_to_transmittance(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

void ChannelModel::validate() const {
    if (!(length_km >= 0.0) || !(attenuation_db_per_km >= 0.0)) {
        throw ConfigError("channel length and attenuation must be >= 0");
    }
    if (!(total_loss_db() >= 0.0)) throw ConfigError("total channel loss must be >= 0 dB");
}

void DetectorModel::validate() const {
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw ConfigError("detector efficiency must lie in [0, 1]");
    }
    if (!(dark_rate >= 0.0) || !(jitter_sigma >= 0.0) || !(dead_time >= 0.0) ||
        !(timetag_resolution >= 0.0)) {
        throw ConfigError("detector rates and times must be >= 0");
    }
}

void ReceiverModel::validate() const {
    if (!(basis_split > 0.0 && basis_split < 1.0)) {
        throw ConfigError("receiver basis_split must lie in (0, 1)");
    }
    if (!(interferometer_delay > 0.0)) throw ConfigError("interferometer delay must be positive");
    if (!(arm_loss_db >= 0.0)) throw ConfigError("receiver arm loss must be >= 0 dB");
    if (!std::isfinite(phase_bob)) throw ConfigError("phase_bob must be finite");
}

int PulseTiming::slot_of(double timestamp, int slot_count) const {
    double t = std::fmod(timestamp, period);
    if (t < 0.0) t += period;
    for (int k = 0; k < slot_count; ++k) {
        if (std::abs(t - slot_centre(k)) <= 0.5 * window_width) return k;
    }
    return -1;
}

void PulseTiming::validate() const {
    if (!(period > 0.0) || !(bin_spacing > 0.0) || !(window_width > 0.0)) {
        throw ConfigError("pulse timing values must be positive");
    }
    if (!(window_width < bin_spacing)) {
        throw ConfigError("arrival windows must be narrower than the bin spacing");
    }
    if (first_bin - 0.5 * window_width < 0.0 ||
        slot_centre(2) + 0.5 * window_width > period) {
        throw ConfigError("arrival slots do not fit inside the laser period");
    }
}

const char* to_string(DetectorId id) {
    switch (id) {
        case DetectorId::Z: return "Z";
        case DetectorId::XPlus: return "X+";
        case DetectorId::XMinus: return "X-";
    }
    return "?";
}

EmittedPulse emit_pulse(const SymbolPlan& plan, const DecoyLevels& levels, const EncoderConfig& cfg,
                        double source_mean, Rng* phase_rng) {
    if (!(source_mean > 0.0)) throw ConfigError("source mean photon number must be positive");
    const auto schedule = schedule_for(plan, levels);
    ComplexAmp e0{std::sqrt(source_mean), 0.0};
    if (phase_rng != nullptr) {
        std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
        e0 = std::polar(std::sqrt(source_mean), u(*phase_rng));
    }
    EmittedPulse out;
    out.field = cfg.dimension == 2 ? encoder_output(e0, cfg, schedule.phases)
                                   : qudit_output(e0, cfg, schedule.phases);
    out.mean_photons = out.field.total_intensity();
    out.plan = plan;
    return out;
}

std::vector<ArrivalWindow> receiver_windows(const TimeBinField& field, const ChannelModel& ch,
                                            const DetectorModel& det, const ReceiverModel& rcv,
                                            double receiver_phase) {
    if (field.dimension() != 2) throw DimensionError("the receiver measures qubits only");
    const double eta = ch.transmittance() * det.efficiency;
    const double z_gain = eta * rcv.basis_split;
    const double x_gain = eta * (1.0 - rcv.basis_split) * db_to_transmittance(rcv.arm_loss_db);
    const ComplexAmp a0 = field.amps[0];
    const ComplexAmp a1 = field.amps[1];
    const ComplexAmp long_arm = std::polar(1.0, receiver_phase);

    std::vector<ArrivalWindow> out;
    out.reserve(8);
    out.push_back({DetectorId::Z, 0, z_gain * std::norm(a0)});
    out.push_back({DetectorId::Z, 1, z_gain * std::norm(a1)});
    for (auto [id, sign] : {std::pair{DetectorId::XPlus, 1.0}, std::pair{DetectorId::XMinus, -1.0}}) {
        out.push_back({id, 0, x_gain * 0.25 * std::norm(a0)});
        out.push_back({id, 1, x_gain * 0.25 * std::norm(a0 * long_arm + sign * a1)});
        out.push_back({id, 2, x_gain * 0.25 * std::norm(a1 * long_arm)});
    }
    return out;
}

std::vector<ArrivalWindow> direct_windows(const TimeBinField& field, const ChannelModel& ch,
                                          const DetectorModel& det) {
    const double eta = ch.transmittance() * det.efficiency;
    std::vector<ArrivalWindow> out;
    for (std::size_t k = 0; k < field.dimension(); ++k) {
        out.push_back({DetectorId::Z, static_cast<int>(k), eta * field.intensity(k)});
    }
    return out;
}

double expected_signal_clicks(std::span<const ArrivalWindow> windows, DetectorId detector,
                              const DetectorModel& det, const PulseTiming& timing) {
    double total = 0.0;
    double independent = 0.0;
    int lo = std::numeric_limits<int>::max();
    int hi = std::numeric_limits<int>::min();
    for (const auto& w : windows) {
        if (w.detector != detector) continue;
        total += w.mean_photons;
        independent += click_probability(w.mean_photons);
        lo = std::min(lo, w.slot);
        hi = std::max(hi, w.slot);
    }
    if (lo > hi) return 0.0;
    // One click per period when the dead time covers every slot of the detector.
    if (det.dead_time >= (hi - lo) * timing.bin_spacing + timing.window_width) {
        return click_probability(total);
    }
    return independent;
}

ClickGenerator::ClickGenerator(DetectorModel det, PulseTiming timing, std::uint64_t seed)
    : det_(det),
      timing_(timing),
      channels_{Channel{make_stream(seed, stream_of(DetectorId::Z))},
                Channel{make_stream(seed, stream_of(DetectorId::XPlus))},
                Channel{make_stream(seed, stream_of(DetectorId::XMinus))}} {
    det_.validate();
    timing_.validate();
}

std::optional<double> ClickGenerator::register_click(Channel& ch, double raw_time) {
    double t = raw_time;
    if (det_.jitter_sigma > 0.0) {
        std::normal_distribution<double> jitter(0.0, det_.jitter_sigma);
        t += jitter(ch.rng);
    }
    if (det_.timetag_resolution > 0.0) {
        t = std::round(t / det_.timetag_resolution) * det_.timetag_resolution;
    }
    if (ch.has_clicked && t - ch.last_click < det_.dead_time) return std::nullopt;
    ch.has_clicked = true;
    ch.last_click = t;
    return t;
}

void ClickGenerator::pulse(std::uint64_t pulse_index, std::span<const ArrivalWindow> windows,
                           const std::optional<SymbolPlan>& truth, std::vector<ClickRecord>& out) {
    const double start = static_cast<double>(pulse_index) * timing_.period;
    std::vector<double> candidates;
    for (DetectorId id : kAllDetectors) {
        Channel& ch = channel(id);
        candidates.clear();
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (const auto& w : windows) {
            if (w.detector != id) continue;
            if (u(ch.rng) < click_probability(w.mean_photons)) {
                candidates.push_back(start + timing_.slot_centre(w.slot));
            }
        }
        if (det_.dark_rate > 0.0) {
            std::poisson_distribution<int> darks(det_.dark_rate * timing_.period);
            const int n = darks(ch.rng);
            for (int i = 0; i < n; ++i) candidates.push_back(start + u(ch.rng) * timing_.period);
        }
        std::sort(candidates.begin(), candidates.end());
        for (double raw : candidates) {
            if (auto t = register_click(ch, raw)) out.push_back({id, *t, truth});
        }
    }
}

void ClickGenerator::pulse_train(std::uint64_t first_pulse, std::uint64_t count,
                                 std::span<const ArrivalWindow> windows,
                                 const std::optional<SymbolPlan>& truth,
                                 const std::function<void(const ClickRecord&)>& sink,
                                 std::span<const DetectorId> detectors) {
    const std::uint64_t end_pulse = first_pulse + count;
    const double end_time = static_cast<double>(end_pulse) * timing_.period;

    for (DetectorId id : detectors) {
        Channel& ch = channel(id);

        // Each arrival slot is an independent Bernoulli stream over periods.
        struct SlotStream {
            double offset;
            double p;
            std::uint64_t next;  // pulse index of the next photon, end_pulse when exhausted
        };
        std::vector<SlotStream> slots;
        auto advance = [&](SlotStream& s, std::uint64_t from) {
            if (s.p <= 0.0) {
                s.next = end_pulse;
                return;
            }
            std::uint64_t skip = 0;
            if (s.p < 1.0) {
                std::geometric_distribution<std::uint64_t> geo(s.p);
                skip = geo(ch.rng);
            }
            s.next = (skip >= end_pulse - std::min(from, end_pulse)) ? end_pulse : from + skip;
        };
        for (const auto& w : windows) {
            if (w.detector != id) continue;
            slots.push_back({timing_.slot_centre(w.slot), click_probability(w.mean_photons), 0});
            advance(slots.back(), first_pulse);
        }

        double next_dark = kInf;
        std::exponential_distribution<double> dark_gap(det_.dark_rate > 0.0 ? det_.dark_rate : 1.0);
        if (det_.dark_rate > 0.0) {
            next_dark = static_cast<double>(first_pulse) * timing_.period + dark_gap(ch.rng);
        }

        while (true) {
            double best = kInf;
            SlotStream* source = nullptr;
            for (auto& s : slots) {
                if (s.next >= end_pulse) continue;
                const double t = static_cast<double>(s.next) * timing_.period + s.offset;
                if (t < best) {
                    best = t;
                    source = &s;
                }
            }
            const bool dark = next_dark < end_time && next_dark < best;
            if (dark) best = next_dark;
            if (!(best < kInf)) break;

            if (auto t = register_click(ch, best)) sink({id, *t, truth});

            if (dark) {
                next_dark += dark_gap(ch.rng);
            } else {
                advance(*source, source->next + 1);
            }
        }
    }
}

std::vector<ClickRecord> detect(const TimeBinField& field, const ChannelModel& ch,
                                const ReceiverModel& rcv, double drift_phase,
                                ClickGenerator& gen, std::uint64_t pulse_index,
                                const std::optional<SymbolPlan>& truth) {
    const auto windows =
        receiver_windows(field, ch, gen.detector(), rcv, rcv.phase_bob + drift_phase);
    std::vector<ClickRecord> out;
    gen.pulse(pulse_index, windows, truth, out);
    return out;
}

double er_db_from_perr(double p_err) {
    if (!(p_err >= 0.0 && p_err <= 1.0)) throw MetricError("P_err must lie in [0, 1]");
    if (p_err == 0.0) return kInf;
    if (p_err == 1.0) return -kInf;
    return 10.0 * std::log10(1.0 / p_err - 1.0);
}

double perr_from_er_db(double er_db) {
    if (std::isnan(er_db)) throw MetricError("extinction ratio is NaN");
    if (er_db == kInf) return 0.0;
    return 1.0 / (1.0 + std::pow(10.0, er_db / 10.0));
}

ErrorMetrics perr_from_counts(std::uint64_t n_wrong, std::uint64_t n_correct) {
    const std::uint64_t total = n_wrong + n_correct;
    if (total == 0) throw MetricError("P_err is undefined without any click in the analysed windows");
    ErrorMetrics m;
    m.n_wrong = n_wrong;
    m.n_correct = n_correct;
    m.p_err = static_cast<double>(n_wrong) / static_cast<double>(total);
    m.er_db = er_db_from_perr(m.p_err);
    m.p_err_sigma = std::sqrt(m.p_err * (1.0 - m.p_err) / static_cast<double>(total));
    if (m.p_err > 0.0 && m.p_err < 1.0) {
        m.er_db_sigma = 10.0 / std::numbers::ln10 * m.p_err_sigma / (m.p_err * (1.0 - m.p_err));
    }
    return m;
}

ErrorMetrics perr_from_clicks(std::span<const ClickRecord> clicks, const WindowAssignment& windows) {
    std::uint64_t correct = 0;
    std::uint64_t wrong = 0;
    for (const auto& c : clicks) {
        if (c.detector != windows.detector) continue;
        const int slot = windows.timing.slot_of(c.timestamp, windows.slot_count);
        if (slot == windows.correct_slot) ++correct;
        else if (slot == windows.wrong_slot) ++wrong;
    }
    return perr_from_counts(wrong, correct);
}

ArrivalHistogram::ArrivalHistogram(double period, double bin_width)
    : period_(period), bin_width_(bin_width) {
    if (!(period > 0.0) || !(bin_width > 0.0)) throw ConfigError("histogram needs positive widths");
    counts_.assign(static_cast<std::size_t>(std::ceil(period / bin_width)), 0);
}

void ArrivalHistogram::add(double timestamp) {
    double t = std::fmod(timestamp, period_);
    if (t < 0.0) t += period_;
    auto i = static_cast<std::size_t>(t / bin_width_);
    if (i >= counts_.size()) i = counts_.size() - 1;
    ++counts_[i];
}

double fit_mean_photon(double detection_rate, double repetition_rate, double loss_db, double p_mu,
                       double nu_ratio) {
    if (!(detection_rate > 0.0 && detection_rate < repetition_rate)) {
        throw ConfigError("detection rate must lie between 0 and the repetition rate");
    }
    const double eta = db_to_transmittance(loss_db);
    auto rate = [&](double mu) {
        const double nu = nu_ratio * mu;
        return repetition_rate *
                   (p_mu * click_probability(mu * eta) + (1.0 - p_mu) * click_probability(nu * eta)) -
               detection_rate;
    };
    double hi = 1.0;
    while (rate(hi) < 0.0) {
        hi *= 2.0;
        if (hi > 1e9) throw ConfigError("detection rate unreachable at this loss");
    }
    std::uintmax_t iterations = 200;
    const auto [lo_root, hi_root] = boost::math::tools::toms748_solve(
        rate, 0.0, hi, boost::math::tools::eps_tolerance<double>(50), iterations);
    return 0.5 * (lo_root + hi_root);
}

}  // namespace maczac
