#pragma once

#include <cstdint>
#include <vector>

#include "maczac/link.hpp"

namespace maczac {

/// Time-of-arrival measurement of the encoder output on a single detector,
/// with the attenuation set so that |E>, mu gives `detection_rate` clicks/s.
struct CharacterizationSetup {
    EncoderConfig encoder;
    DecoyLevels levels;
    DetectorModel detector;
    PulseTiming timing;
    double detection_rate = 140e3;  // Hz
    double duration = 60.0;         // s
    double histogram_bin = 10e-12;  // s
    std::size_t keep_clicks = 0;    // number of raw clicks to return

    void validate() const;
};

struct CharacterizationResult {
    /// Correct window is the prepared bin; for |-> the early bin is taken as
    /// "correct", so P_err measures the bin balance.
    ErrorMetrics metrics;
    ArrivalHistogram histogram{100e-9, 1e-9};
    std::uint64_t total_clicks = 0;
    double detection_rate_hz = 0.0;
    std::vector<ClickRecord> clicks;
};

CharacterizationResult characterize(const CharacterizationSetup& setup, const SymbolPlan& plan,
                                    std::uint64_t seed);

}  // namespace maczac
