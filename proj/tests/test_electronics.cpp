#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "maczac/electronics.hpp"
#include "maczac/errors.hpp"

using namespace maczac;
using std::numbers::pi;

namespace {

const SymbolPlan kAll[] = {SymbolPlan::early(Decoy::Mu), SymbolPlan::early(Decoy::Nu),
                           SymbolPlan::late(Decoy::Mu),  SymbolPlan::late(Decoy::Nu),
                           SymbolPlan::minus(Decoy::Mu), SymbolPlan::minus(Decoy::Nu)};

DigitalPattern pattern(bool a, bool b, bool c, bool d, Slot s) { return {a, b, c, d, s}; }

}  // namespace

TEST_CASE("digital patterns per symbol") {
    CHECK(pattern_for(SymbolPlan::early(Decoy::Mu)) == pattern(1, 1, 0, 0, Slot::early()));
    CHECK(pattern_for(SymbolPlan::early(Decoy::Nu)) == pattern(1, 0, 0, 0, Slot::early()));
    CHECK(pattern_for(SymbolPlan::late(Decoy::Mu)) == pattern(1, 1, 0, 0, Slot::late()));
    CHECK(pattern_for(SymbolPlan::late(Decoy::Nu)) == pattern(1, 0, 0, 0, Slot::late()));
    CHECK(pattern_for(SymbolPlan::minus(Decoy::Mu)) == pattern(0, 0, 1, 1, Slot::control()));
    CHECK(pattern_for(SymbolPlan::minus(Decoy::Nu)) == pattern(0, 0, 1, 0, Slot::control()));
    for (const auto& p : kAll) {
        const auto d = pattern_for(p);
        CHECK(d.fires_key() != d.fires_control());
    }
    CHECK_THROWS_AS(pattern(1, 0, 1, 0, Slot::early()).validate(), ConfigError);
    CHECK_THROWS(pattern_for({0, Decoy::Mu, 4}));
}

TEST_CASE("waveform amplitude is the sum of the fired comparators") {
    DacConfig cfg;
    cfg.v1_el = 0.3;
    cfg.v2_el = 0.4;
    cfg.v1_c = 0.2;
    cfg.v2_c = 0.1;
    const auto both = waveform_for(pattern(1, 1, 0, 0, Slot::early()), cfg);
    CHECK(both.at(cfg.t_early) == doctest::Approx(0.7).epsilon(1e-15));
    CHECK(both.at(cfg.t_late) == 0.0);
    const auto ctrl = waveform_for(pattern(0, 0, 1, 0, Slot::control()), cfg);
    CHECK(ctrl.at(cfg.t_minus) == doctest::Approx(0.2).epsilon(1e-15));
    const auto none = waveform_for(pattern(0, 0, 0, 0, Slot::early()), cfg);
    for (double v : none.volts) CHECK(v == 0.0);

    const auto a = waveform_for(pattern(1, 0, 0, 0, Slot::late()), cfg);
    const auto b = waveform_for(pattern(0, 1, 0, 0, Slot::late()), cfg);
    const auto ab = waveform_for(pattern(1, 1, 0, 0, Slot::late()), cfg);
    REQUIRE(a.volts.size() == ab.volts.size());
    int nonzero = 0;
    for (std::size_t i = 0; i < ab.volts.size(); ++i) {
        CHECK(std::abs(ab.volts[i] - a.volts[i] - b.volts[i]) < 1e-15);
        CHECK(ab.volts[i] >= 0.0);
        if (ab.volts[i] > 0.0) ++nonzero;
    }
    CHECK(nonzero == doctest::Approx(cfg.pulse_width / cfg.sample_interval).epsilon(0.05));
}

TEST_CASE("overlapping slots are a configuration error") {
    DacConfig cfg;
    cfg.t_late = cfg.t_early + 0.5 * cfg.pulse_width;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_THROWS_AS(waveform_for(pattern(1, 0, 0, 0, Slot::early()), cfg), ConfigError);
    DacConfig neg;
    neg.v1_el = -0.1;
    CHECK_THROWS_AS(neg.validate(), ConfigError);
}

TEST_CASE("voltage to phase conversion") {
    DacConfig cfg;
    cfg.v1_el = 1.0;
    cfg.v1_c = 0.5;
    const auto e = phases_from_waveform(waveform_for(pattern(1, 0, 0, 0, Slot::early()), cfg), cfg);
    CHECK(e.phi_arm[0] == doctest::Approx(pi).epsilon(1e-14));
    CHECK(e.phi_arm[1] == 0.0);
    CHECK(e.phi_c == 0.0);
    const auto z = phases_from_waveform(waveform_for(pattern(0, 0, 0, 0, Slot::early()), cfg), cfg);
    CHECK(z.phi_c == 0.0);
    CHECK(z.phi_arm[0] == 0.0);
    CHECK(z.phi_arm[1] == 0.0);
    const auto c = phases_from_waveform(waveform_for(pattern(0, 0, 1, 0, Slot::control()), cfg), cfg);
    CHECK(c.phi_c == doctest::Approx(pi / 2).epsilon(1e-14));
}

TEST_CASE("misaligned pulses raise a timing error") {
    DacConfig cfg;
    cfg.v1_el = 1.0;
    auto w = waveform_for(pattern(1, 0, 0, 0, Slot::early()), cfg);
    DacConfig shifted = cfg;
    shifted.t_early = cfg.t_early + 0.8 * cfg.pulse_width;
    shifted.t_late = shifted.t_early + 10e-9;
    CHECK_THROWS_AS(phases_from_waveform(w, shifted), TimingError);
}

TEST_CASE("calibration solves the comparator levels") {
    DacConfig base;
    const auto cal = calibrate_voltages({1.0, 0.5, pi, 0.7}, base);
    CHECK(cal.v1_el == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cal.v2_el == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(cal.v1_c == doctest::Approx(1.0 / 3).epsilon(1e-14));
    CHECK(cal.v2_c == doctest::Approx(1.0 / 6).epsilon(1e-14));

    const auto degenerate = calibrate_voltages({1.0, 1.0 - 1e-15, pi, 0.7}, base);
    CHECK(std::abs(degenerate.v2_el) < 1e-6);
    CHECK_THROWS_AS(calibrate_voltages({1.0, 1.0, pi, 0.7}, base), NoSolutionError);
}

TEST_CASE("pattern to waveform to phase round trip") {
    for (double ratio : {0.1, 0.3, 0.5, 0.9}) {
        for (double alpha : {0.4, 1.5, pi}) {
            const DecoyLevels lv{0.5, 0.5 * ratio, alpha, 0.7};
            DacConfig base;
            base.v_pi = 3.7;
            const auto cal = calibrate_voltages(lv, base);
            for (const auto& plan : kAll) {
                const auto ph = phases_from_waveform(waveform_for(pattern_for(plan), cal), cal);
                const auto ref = schedule_for(plan, lv).phases;
                CHECK(std::abs(ph.phi_c - ref.phi_c) < 1e-12);
                CHECK(std::abs(ph.phi_arm[0] - ref.phi_arm[0]) < 1e-12);
                CHECK(std::abs(ph.phi_arm[1] - ref.phi_arm[1]) < 1e-12);
            }
        }
    }
}

TEST_CASE("waveform CSV export") {
    DacConfig cfg;
    cfg.v1_c = 0.25;
    std::ostringstream os;
    write_waveform_csv(os, waveform_for(pattern(0, 0, 1, 0, Slot::control()), cfg));
    const auto text = os.str();
    CHECK(text.rfind("time_s,volts\n", 0) == 0);
    CHECK(text.find(",0.25") != std::string::npos);
}
