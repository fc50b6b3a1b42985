#include "maczac/characterize.hpp"

#include <array>
#include <cmath>

#include "maczac/errors.hpp"

namespace maczac {

void CharacterizationSetup::validate() const {
    encoder.validate();
    levels.validate();
    detector.validate();
    timing.validate();
    const double rep = 1.0 / timing.period;
    if (!(detection_rate > 0.0 && detection_rate < rep)) {
        throw ConfigError("characterisation detection rate must lie between 0 and the repetition rate");
    }
    if (!(duration > 0.0)) throw ConfigError("characterisation duration must be positive");
    if (!(histogram_bin > 0.0)) throw ConfigError("histogram bin must be positive");
}

CharacterizationResult characterize(const CharacterizationSetup& setup, const SymbolPlan& plan,
                                    std::uint64_t seed) {
    setup.validate();
    if (setup.encoder.dimension != 2) {
        throw DimensionError("characterisation measures qubit states");
    }
    const double rep = 1.0 / setup.timing.period;
    const double source = calibrated_source_mean(setup.levels, setup.encoder);
    const auto pulse = emit_pulse(plan, setup.levels, setup.encoder, source);

    // Detected photons per pulse that give the requested rate for |E>, mu.
    const double reference = -std::log1p(-setup.detection_rate / rep);
    const double scale = reference / setup.levels.mu;
    std::vector<ArrivalWindow> windows;
    for (std::size_t k = 0; k < pulse.field.dimension(); ++k) {
        windows.push_back({DetectorId::Z, static_cast<int>(k), scale * pulse.field.intensity(k)});
    }

    WindowAssignment assign;
    assign.timing = setup.timing;
    assign.detector = DetectorId::Z;
    assign.correct_slot = plan.is_superposition() ? 0 : plan.bin;
    assign.wrong_slot = 1 - assign.correct_slot;
    assign.slot_count = 2;

    CharacterizationResult result;
    result.histogram = ArrivalHistogram(setup.timing.period, setup.histogram_bin);
    std::uint64_t correct = 0;
    std::uint64_t wrong = 0;

    ClickGenerator gen(setup.detector, setup.timing, seed);
    const auto pulses = static_cast<std::uint64_t>(std::llround(setup.duration * rep));
    constexpr std::array<DetectorId, 1> kSingle{DetectorId::Z};
    gen.pulse_train(0, pulses, windows, plan, [&](const ClickRecord& c) {
        ++result.total_clicks;
        result.histogram.add(c.timestamp);
        const int slot = setup.timing.slot_of(c.timestamp, assign.slot_count);
        if (slot == assign.correct_slot) ++correct;
        else if (slot == assign.wrong_slot) ++wrong;
        if (result.clicks.size() < setup.keep_clicks) result.clicks.push_back(c);
    }, kSingle);
    result.metrics = perr_from_counts(wrong, correct);
    result.detection_rate_hz = static_cast<double>(result.total_clicks) / setup.duration;
    return result;
}

}  // namespace maczac
