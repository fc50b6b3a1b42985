#include "maczac/session.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "maczac/errors.hpp"

namespace maczac {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wrap_phase(double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(phi + std::numbers::pi, two_pi);
    if (w < 0.0) w += two_pi;
    return w - std::numbers::pi;
}

std::uint64_t draw_binomial(Rng& rng, std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    std::binomial_distribution<std::uint64_t> b(n, p);
    return b(rng);
}

/// Multinomial split of n trials over `probs` (remaining mass is "none").
template <std::size_t N>
std::array<std::uint64_t, N> draw_multinomial(Rng& rng, std::uint64_t n,
                                              const std::array<double, N>& probs) {
    std::array<std::uint64_t, N> out{};
    double remaining = 1.0;
    for (std::size_t i = 0; i < N && n > 0; ++i) {
        const double p = remaining > 0.0 ? std::clamp(probs[i] / remaining, 0.0, 1.0) : 0.0;
        out[i] = draw_binomial(rng, n, p);
        n -= out[i];
        remaining -= probs[i];
    }
    return out;
}

constexpr std::array<SymbolPlan, 6> kClasses{
    SymbolPlan::early(Decoy::Mu), SymbolPlan::early(Decoy::Nu), SymbolPlan::late(Decoy::Mu),
    SymbolPlan::late(Decoy::Nu),  SymbolPlan::minus(Decoy::Mu), SymbolPlan::minus(Decoy::Nu)};

constexpr int kMaxSlots = 3;

struct DetectorTally {
    std::array<std::uint64_t, kMaxSlots> in_window{};
    std::uint64_t total = 0;
};

class SessionRunner {
  public:
    SessionRunner(const SessionConfig& cfg, std::uint64_t seed)
        : cfg_(cfg),
          alice_(make_stream(seed, Stream::Alice)),
          drift_rng_(make_stream(seed, Stream::Drift)),
          background_(make_stream(seed, Stream::BackgroundDarks)),
          detectors_{make_stream(seed, Stream::DetectorZ), make_stream(seed, Stream::DetectorXPlus),
                     make_stream(seed, Stream::DetectorXMinus)} {
        const double source = calibrated_source_mean(cfg.levels, cfg.encoder);
        for (std::size_t c = 0; c < kClasses.size(); ++c) {
            fields_[c] = emit_pulse(kClasses[c], cfg.levels, cfg.encoder, source).field;
        }
        const double pz = cfg.p_z_alice;
        const double pm = cfg.levels.p_mu;
        class_probs_ = {0.5 * pz * pm, 0.5 * pz * (1 - pm), 0.5 * pz * pm,
                        0.5 * pz * (1 - pm), (1 - pz) * pm, (1 - pz) * (1 - pm)};
        const double w = cfg.timing.window_width;
        dark_in_window_ = cfg.detector.dark_rate * w;
        jitter_keep_ = cfg.detector.jitter_sigma > 0.0
                           ? std::erf(0.5 * w / (cfg.detector.jitter_sigma * std::numbers::sqrt2))
                           : 1.0;
    }

    SessionResult run() {
        SessionResult result;
        const double dt = cfg_.feedback_interval;
        const auto steps = static_cast<std::uint64_t>(std::llround(cfg_.duration / dt));
        const auto steps_per_block =
            std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(cfg_.block_duration / dt)));
        const auto pulses = static_cast<std::uint64_t>(std::llround(dt * cfg_.repetition_rate()));

        DriftState state = make_drift_state(cfg_.drift, cfg_.feedback);
        Block block;
        for (std::uint64_t s = 0; s < steps; ++s) {
            const double phase = cfg_.receiver.phase_bob + state.phase_offset();
            const Step step = simulate_step(pulses, phase);
            block.add(step, std::abs(wrap_phase(phase)));

            const double perr = (step.x_err + 0.5) / (step.x_err + step.x_ok + 1.0);
            state = step_feedback(std::move(state), er_db_from_perr(perr), dt, drift_rng_);
            const double x_total = static_cast<double>(step.x_err + step.x_ok);
            result.steps.push_back({state.time, wrap_phase(cfg_.receiver.phase_bob + state.phase_offset()),
                                    state.peltier_current,
                                    x_total > 0.0 ? static_cast<double>(step.x_err) / x_total : kNaN});

            if ((s + 1) % steps_per_block == 0 || s + 1 == steps) {
                const double t0 = static_cast<double>(s + 1 - block.steps) * dt;
                result.blocks.push_back(block.finish(t0, static_cast<double>(block.steps) * dt, cfg_));
                block = Block{};
            }
        }
        return result;
    }

  private:
    struct Step {
        // Per intensity (0 = mu, 1 = nu).
        std::array<std::uint64_t, 2> z_ok{}, z_err{}, x_ok_k{}, x_err_k{};
        std::uint64_t x_ok = 0, x_err = 0, clicks = 0;
    };

    struct Block {
        std::array<double, 2> z_ok{}, z_err{}, x_ok{}, x_err{};
        double clicks = 0.0;
        double phase_error_sum = 0.0;
        std::uint64_t steps = 0;

        void add(const Step& s, double phase_error) {
            for (int k = 0; k < 2; ++k) {
                z_ok[k] += static_cast<double>(s.z_ok[k]);
                z_err[k] += static_cast<double>(s.z_err[k]);
                x_ok[k] += static_cast<double>(s.x_ok_k[k]);
                x_err[k] += static_cast<double>(s.x_err_k[k]);
            }
            clicks += static_cast<double>(s.clicks);
            phase_error_sum += phase_error;
            ++steps;
        }

        BlockMetrics finish(double t0, double length, const SessionConfig& cfg) const {
            BlockMetrics m;
            m.t_start = t0;
            m.duration = length;
            BlockCounts& c = m.counts;
            c.n_z_mu = z_ok[0] + z_err[0];
            c.n_z_nu = z_ok[1] + z_err[1];
            c.n_x_mu = x_ok[0] + x_err[0];
            c.n_x_nu = x_ok[1] + x_err[1];
            c.m_x_mu = x_err[0];
            c.m_x_nu = x_err[1];
            c.block_size = c.n_z();
            c.qber_z = c.n_z() > 0.0 ? (z_err[0] + z_err[1]) / c.n_z() : 0.0;
            m.qber_z = c.qber_z;
            m.qber_x = c.n_x() > 0.0 ? c.m_x() / c.n_x() : 0.0;
            m.det_rate_hz = clicks / length;
            m.sifted_bps = c.n_z() / length;
            m.skr_bps = 0.0;
            if (c.n_z() > 0.0) {
                const double bits = secret_key_length(c, cfg.levels, cfg.security);
                m.skr_bps = std::min(bits, c.n_z()) / length;
            }
            m.mean_phase_error = steps > 0 ? phase_error_sum / static_cast<double>(steps) : 0.0;
            return m;
        }
    };

    /// Clicks of `n` identical periods on one detector given the signal in
    /// each of its arrival slots.
    DetectorTally tally(Rng& rng, std::uint64_t n, const std::array<double, kMaxSlots>& signal,
                        int slot_count) {
        DetectorTally t;
        std::array<double, kMaxSlots> lambda{};
        for (int s = 0; s < slot_count; ++s) lambda[s] = signal[s] + dark_in_window_;

        const double span = (slot_count - 1) * cfg_.timing.bin_spacing + cfg_.timing.window_width;
        std::array<std::uint64_t, kMaxSlots> raw{};
        if (cfg_.detector.dead_time >= span) {
            // At most one click per period: the first non-empty slot wins.
            std::array<double, kMaxSlots> first{};
            double survive = 1.0;
            for (int s = 0; s < slot_count; ++s) {
                first[s] = survive * -std::expm1(-lambda[s]);
                survive *= std::exp(-lambda[s]);
            }
            raw = draw_multinomial(rng, n, first);
        } else {
            for (int s = 0; s < slot_count; ++s) raw[s] = draw_binomial(rng, n, -std::expm1(-lambda[s]));
        }
        for (int s = 0; s < slot_count; ++s) {
            t.in_window[s] = draw_binomial(rng, raw[s], jitter_keep_);
            t.total += raw[s];
        }
        return t;
    }

    Step simulate_step(std::uint64_t pulses, double receiver_phase) {
        Step step;
        const auto counts = draw_multinomial(alice_, pulses, class_probs_);
        for (std::size_t c = 0; c < kClasses.size(); ++c) {
            const SymbolPlan& plan = kClasses[c];
            const int k = plan.decoy == Decoy::Mu ? 0 : 1;
            const auto windows = receiver_windows(fields_[c], cfg_.channel, cfg_.detector,
                                                  cfg_.receiver, receiver_phase);
            for (DetectorId id : kAllDetectors) {
                std::array<double, kMaxSlots> signal{};
                for (const auto& w : windows) {
                    if (w.detector == id) signal[static_cast<std::size_t>(w.slot)] = w.mean_photons;
                }
                const int slots = id == DetectorId::Z ? 2 : 3;
                const DetectorTally t =
                    tally(detectors_[static_cast<std::size_t>(id)], counts[c], signal, slots);
                step.clicks += t.total;
                if (id == DetectorId::Z && !plan.is_superposition()) {
                    step.z_ok[k] += t.in_window[static_cast<std::size_t>(plan.bin)];
                    step.z_err[k] += t.in_window[static_cast<std::size_t>(1 - plan.bin)];
                } else if (id == DetectorId::XMinus && plan.is_superposition()) {
                    step.x_ok_k[k] += t.in_window[1];
                } else if (id == DetectorId::XPlus && plan.is_superposition()) {
                    step.x_err_k[k] += t.in_window[1];
                }
            }
        }
        step.x_ok = step.x_ok_k[0] + step.x_ok_k[1];
        step.x_err = step.x_err_k[0] + step.x_err_k[1];
        // Dark counts outside the arrival windows only add to the raw rate.
        const double outside = cfg_.detector.dark_rate *
                               (3.0 * cfg_.timing.period - 8.0 * cfg_.timing.window_width) *
                               static_cast<double>(pulses);
        if (outside > 0.0) {
            std::poisson_distribution<std::uint64_t> extra(outside);
            step.clicks += extra(background_);
        }
        return step;
    }

    const SessionConfig& cfg_;
    Rng alice_;
    Rng drift_rng_;
    Rng background_;
    std::array<Rng, 3> detectors_;
    std::array<TimeBinField, kClasses.size()> fields_;
    std::array<double, kClasses.size()> class_probs_{};
    double dark_in_window_ = 0.0;
    double jitter_keep_ = 1.0;
};

MeanStd mean_std(const std::vector<BlockMetrics>& blocks, double BlockMetrics::*field) {
    MeanStd out;
    if (blocks.empty()) return out;
    for (const auto& b : blocks) out.mean += b.*field;
    out.mean /= static_cast<double>(blocks.size());
    if (blocks.size() > 1) {
        double ss = 0.0;
        for (const auto& b : blocks) ss += (b.*field - out.mean) * (b.*field - out.mean);
        out.stddev = std::sqrt(ss / static_cast<double>(blocks.size() - 1));
    }
    return out;
}

}  // namespace

void SessionConfig::validate() const {
    encoder.validate();
    if (encoder.dimension != 2) throw ConfigError("QKD sessions use the qubit encoder (d = 2)");
    levels.validate();
    if (!(p_z_alice > 0.0 && p_z_alice < 1.0)) throw ConfigError("p_z_alice must lie in (0, 1)");
    channel.validate();
    detector.validate();
    receiver.validate();
    timing.validate();
    feedback.validate();
    security.validate();
    if (std::abs(receiver.interferometer_delay - timing.bin_spacing) > 1e-15) {
        throw ConfigError("receiver interferometer delay must equal the encoder bin spacing");
    }
    if (!(drift.sigma >= 0.0) || !(drift.sine_period > 0.0)) {
        throw ConfigError("drift sigma must be >= 0 and sine period positive");
    }
    if (!(feedback_interval > 0.0) || !(block_duration >= feedback_interval) ||
        !(duration >= block_duration)) {
        throw ConfigError("need 0 < feedback_interval <= block_duration <= duration");
    }
}

SessionResult run_session(const SessionConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    SessionRunner runner(cfg, seed);
    return runner.run();
}

SessionSummary summarize(const std::vector<BlockMetrics>& blocks) {
    SessionSummary s;
    s.det_rate_hz = mean_std(blocks, &BlockMetrics::det_rate_hz);
    s.sifted_bps = mean_std(blocks, &BlockMetrics::sifted_bps);
    s.qber_z = mean_std(blocks, &BlockMetrics::qber_z);
    s.qber_x = mean_std(blocks, &BlockMetrics::qber_x);
    s.skr_bps = mean_std(blocks, &BlockMetrics::skr_bps);
    return s;
}

void write_time_series_csv(std::ostream& os, const std::vector<BlockMetrics>& blocks) {
    os << "t_s,qber_z,qber_x,det_rate_hz,sifted_bps,skr_bps\n";
    for (const auto& b : blocks) {
        os << b.t_start << ',' << b.qber_z << ',' << b.qber_x << ',' << b.det_rate_hz << ','
           << b.sifted_bps << ',' << b.skr_bps << '\n';
    }
}

void write_step_trace_csv(std::ostream& os, const std::vector<StepTrace>& steps) {
    os << "t_s,phase_error_rad,peltier_current_a,qber_x\n";
    for (const auto& s : steps) {
        os << s.t << ',' << s.phase_error << ',' << s.peltier_current << ',' << s.qber_x << '\n';
    }
}

void write_summary_csv(std::ostream& os, const SessionSummary& s) {
    os << "metric,mean,stddev\n";
    os << "det_rate_hz," << s.det_rate_hz.mean << ',' << s.det_rate_hz.stddev << '\n';
    os << "sifted_bps," << s.sifted_bps.mean << ',' << s.sifted_bps.stddev << '\n';
    os << "qber_z," << s.qber_z.mean << ',' << s.qber_z.stddev << '\n';
    os << "qber_x," << s.qber_x.mean << ',' << s.qber_x.stddev << '\n';
    os << "skr_bps," << s.skr_bps.mean << ',' << s.skr_bps.stddev << '\n';
}

std::vector<KeyBlockRow> key_rows(const std::vector<BlockMetrics>& blocks) {
    std::vector<KeyBlockRow> rows;
    rows.reserve(blocks.size());
    for (const auto& b : blocks) rows.push_back({b.t_start, b.duration, b.counts});
    return rows;
}

}  // namespace maczac
