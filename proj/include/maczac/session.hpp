#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "maczac/feedback.hpp"
#include "maczac/keyrate.hpp"
#include "maczac/link.hpp"
#include "maczac/optics.hpp"
#include "maczac/protocol.hpp"

namespace maczac {

/// Everything needed to run a three-state decoy QKD session.
struct SessionConfig {
    EncoderConfig encoder;
    DecoyLevels levels;
    double p_z_alice = 0.9;  // probability of sending |E> or |L>
    ChannelModel channel;
    DetectorModel detector;
    ReceiverModel receiver;
    PulseTiming timing;
    DriftModel drift;
    FeedbackConfig feedback;
    SecurityParams security;
    double duration = 3600.0;        // s
    double block_duration = 60.0;    // s
    double feedback_interval = 1.0;  // s

    double repetition_rate() const { return 1.0 / timing.period; }
    void validate() const;
};

struct BlockMetrics {
    double t_start = 0.0;
    double duration = 0.0;
    double qber_z = 0.0;
    double qber_x = 0.0;
    double det_rate_hz = 0.0;
    double sifted_bps = 0.0;
    double skr_bps = 0.0;
    double mean_phase_error = 0.0;  // rad, mean |receiver phase error| over the block
    BlockCounts counts;
};

/// State of the receiver phase loop at the end of each feedback interval.
struct StepTrace {
    double t = 0.0;
    double phase_error = 0.0;  // wrapped to (-pi, pi]
    double peltier_current = 0.0;
    double qber_x = 0.0;  // NaN when no conclusive X click was seen
};

struct SessionResult {
    std::vector<BlockMetrics> blocks;
    std::vector<StepTrace> steps;
};

/// Block-level Monte-Carlo of a full session. Each feedback interval draws
/// the number of pulses of every (symbol, intensity) class, then per class
/// and detector the number of first clicks in each arrival window (signal
/// plus dark counts), with the receiver phase frozen for the interval.
///
/// Alice, each detector and the drift have separate random streams, so the
/// Z-basis outcome does not depend on the receiver phase for a fixed seed.
SessionResult run_session(const SessionConfig& cfg, std::uint64_t seed);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

struct SessionSummary {
    MeanStd det_rate_hz;
    MeanStd sifted_bps;
    MeanStd qber_z;
    MeanStd qber_x;
    MeanStd skr_bps;
};

SessionSummary summarize(const std::vector<BlockMetrics>& blocks);

/// t_s,qber_z,qber_x,det_rate_hz,sifted_bps,skr_bps
void write_time_series_csv(std::ostream& os, const std::vector<BlockMetrics>& blocks);
/// t_s,phase_error_rad,peltier_current_a,qber_x
void write_step_trace_csv(std::ostream& os, const std::vector<StepTrace>& steps);
/// metric,mean,stddev
void write_summary_csv(std::ostream& os, const SessionSummary& summary);

std::vector<KeyBlockRow> key_rows(const std::vector<BlockMetrics>& blocks);

}  // namespace maczac
