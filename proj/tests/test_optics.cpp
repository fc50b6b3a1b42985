#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "maczac/errors.hpp"
#include "maczac/optics.hpp"
#include "oracles.hpp"

using namespace maczac;
using std::numbers::pi;

namespace {

EncoderConfig imperfect(double t1, double t2 = 0.5, double t3 = 0.5) {
    EncoderConfig cfg;
    cfg.splitters = {{t1}, {t2}, {t3}};
    return cfg;
}

}  // namespace

TEST_CASE("split_input divides the input field") {
    auto [cw, ccw] = split_input(1.0, {0.5});
    CHECK(cw.real() == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));
    CHECK(cw.imag() == 0.0);
    CHECK(ccw.real() == 0.0);
    CHECK(ccw.imag() == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-15));

    auto [cw1, ccw1] = split_input(1.0, {1.0});
    CHECK(cw1 == ComplexAmp{1.0, 0.0});
    CHECK(std::abs(ccw1) == 0.0);

    auto [cw2, ccw2] = split_input(1.0, {0.45});
    CHECK(std::norm(cw2) == doctest::Approx(0.45).epsilon(1e-14));
    CHECK(std::norm(ccw2) == doctest::Approx(0.55).epsilon(1e-14));
    CHECK(std::norm(cw2) + std::norm(ccw2) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("beamsplitter transmittance outside [0, 1] is rejected") {
    CHECK_THROWS_AS(BeamSplitterSpec{1.2}.validate(), ConfigError);
    CHECK_THROWS_AS(BeamSplitterSpec{-0.1}.validate(), ConfigError);
    CHECK_THROWS_AS(split_input(1.0, {1.5}), ConfigError);
}

TEST_CASE("loop amplitudes of the ideal device") {
    const auto cfg = EncoderConfig::ideal();
    const auto loop = loop_amplitudes(1.0, cfg, PhaseSchedule::qubit(0, 0, 0));
    const double expected = 1 / (2 * std::sqrt(2.0));
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(std::abs(loop.cw.amps[k]) == doctest::Approx(expected).epsilon(1e-14));
        CHECK(std::abs(loop.ccw.amps[k]) == doctest::Approx(expected).epsilon(1e-14));
    }

    const auto flipped = loop_amplitudes(1.0, cfg, PhaseSchedule::qubit(pi, 0, 0));
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(std::abs(flipped.cw.amps[k] + loop.cw.amps[k]) < 1e-15);
        CHECK(std::abs(flipped.ccw.amps[k] - loop.ccw.amps[k]) < 1e-15);
    }
}

TEST_CASE("loop amplitudes with an imperfect input splitter") {
    const auto loop = loop_amplitudes(1.0, imperfect(0.45), PhaseSchedule::qubit(0, 0, 0));
    CHECK(std::norm(loop.cw.amps[0]) == doctest::Approx(0.45 * 0.25).epsilon(1e-14));
    CHECK(std::norm(loop.ccw.amps[0]) == doctest::Approx(0.55 * 0.25).epsilon(1e-14));
    CHECK_THROWS_AS(loop_amplitudes(1.0, EncoderConfig::ideal(), PhaseSchedule{0, {0, 0, 0}}),
                    DimensionError);
}

TEST_CASE("encoder output for the three protocol states") {
    const auto cfg = EncoderConfig::ideal();
    const auto minus = encoder_output(1.0, cfg, PhaseSchedule::qubit(pi, 0, 0));
    CHECK(minus.intensity(0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(minus.intensity(1) == doctest::Approx(0.25).epsilon(1e-14));
    // |-> carries a relative phase of pi between the bins.
    CHECK(std::abs(minus.amps[0] + minus.amps[1]) < 1e-14);

    const auto dark = encoder_output(1.0, cfg, PhaseSchedule::qubit(0.7, 0.7, 0.7));
    CHECK(dark.total_intensity() < 1e-30);

    const auto early = encoder_output(1.0, cfg, PhaseSchedule::qubit(0, pi, 0));
    CHECK(early.intensity(0) == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(early.intensity(1) < 1e-30);
}

TEST_CASE("encoder output agrees with the explicit path sum") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> phase(-2 * pi, 2 * pi), split(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const double t1 = split(rng), t2 = split(rng), t3 = split(rng);
        const double c = phase(rng), e = phase(rng), l = phase(rng), w = phase(rng);
        auto cfg = imperfect(t1, t2, t3);
        cfg.omega_tau = w;
        const auto out = encoder_output(1.0, cfg, PhaseSchedule::qubit(c, e, l));
        const auto ref = oracle::path_sum(t1, t2, t3, c, e, l, w);
        CHECK(std::abs(out.amps[0] - ref[0]) < 1e-13);
        CHECK(std::abs(out.amps[1] - ref[1]) < 1e-13);
    }
}

TEST_CASE("transmittance closed forms") {
    const auto ideal2 = EncoderConfig::ideal(2);
    CHECK(transmittances(ideal2, PhaseSchedule::qubit(pi, 0, 0))[0] ==
          doctest::Approx(0.25).epsilon(1e-14));
    CHECK(ideal_transmittance(pi, 0, 4) == doctest::Approx(1.0 / 16).epsilon(1e-14));

    const auto t = transmittances(imperfect(0.45), PhaseSchedule::qubit(0.3, 0.3, 0.3));
    CHECK(t[0] == doctest::Approx(0.0025).epsilon(1e-12));
    CHECK(t[0] == doctest::Approx(oracle::general_t(0.45, 0.25, 0.3, 0.3)).epsilon(1e-12));
}

TEST_CASE("transmittances match the field intensities") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> phase(-pi, 3 * pi), split(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        const auto cfg = imperfect(split(rng), split(rng), split(rng));
        const auto ph = PhaseSchedule::qubit(phase(rng), phase(rng), phase(rng));
        const auto t = transmittances(cfg, ph);
        const auto f = encoder_output(1.0, cfg, ph);
        CHECK(t[0] == doctest::Approx(f.intensity(0)).epsilon(1e-12).scale(1));
        CHECK(t[1] == doctest::Approx(f.intensity(1)).epsilon(1e-12).scale(1));
    }
}

TEST_CASE("energy bound, phase symmetry and periodicity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> phase(-10, 10);
    for (int d : {2, 3, 4, 8}) {
        const auto cfg = EncoderConfig::ideal(d);
        for (int i = 0; i < 200; ++i) {
            PhaseSchedule ph{phase(rng), std::vector<double>(d)};
            for (auto& p : ph.phi_arm) p = phase(rng);
            const auto t = transmittances(cfg, ph);
            double sum = 0;
            for (double v : t) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0 / (d * d) + 1e-15);
                sum += v;
            }
            CHECK(sum <= 1.0 + 1e-12);

            const double shift = phase(rng);
            PhaseSchedule shifted = ph;
            shifted.phi_c += shift;
            for (auto& p : shifted.phi_arm) p += shift;
            PhaseSchedule wrapped = ph;
            wrapped.phi_arm[0] += 2 * pi;
            wrapped.phi_c -= 4 * pi;
            const auto ts = transmittances(cfg, shifted);
            const auto tw = transmittances(cfg, wrapped);
            for (int k = 0; k < d; ++k) {
                CHECK(std::abs(ts[k] - t[k]) < 1e-12);
                CHECK(std::abs(tw[k] - t[k]) < 1e-12);
            }
        }
    }
}

TEST_CASE("general model reduces to the ideal closed form at 50/50") {
    for (int i = 0; i < 60; ++i) {
        for (int j = 0; j < 60; ++j) {
            const double c = 2 * pi * i / 60, e = 2 * pi * j / 60;
            const auto [te, tl] = general_transmittances({0.5}, {0.5}, {0.5}, c, e, e + 0.1);
            CHECK(std::abs(te - ideal_transmittance(c, e, 2)) < 1e-12);
            CHECK(std::abs(tl - ideal_transmittance(c, e + 0.1, 2)) < 1e-12);
        }
    }
}

TEST_CASE("qudit output") {
    const auto cfg4 = EncoderConfig::ideal(4);
    const auto uniform = qudit_output(1.0, cfg4, {pi, {0, 0, 0, 0}});
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(std::abs(uniform.amps[k]) == doctest::Approx(0.25).epsilon(1e-14));
    }
    const auto zero = qudit_output(1.0, cfg4, {0, {0, 0, 0, 0}});
    CHECK(zero.total_intensity() == 0.0);

    CHECK_THROWS_AS(qudit_output(1.0, imperfect(0.45), PhaseSchedule::qubit(0, 0, 0)), ConfigError);
    EncoderConfig bad4 = EncoderConfig::ideal(4);
    bad4.splitters[0].t = 0.4;
    CHECK_THROWS(bad4.validate());
    CHECK_THROWS_AS(qudit_output(1.0, cfg4, PhaseSchedule::qubit(0, 0, 0)), DimensionError);
}

TEST_CASE("qudit output at d = 2 reproduces the qubit encoder up to the late-bin sign") {
    // The d-arm closed form and the nested-interferometer field agree in the
    // early bin; the late bin differs by the -1 of the two reflections inside
    // the unbalanced Mach-Zehnder.
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> phase(-pi, pi);
    const auto cfg = EncoderConfig::ideal(2);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto ph = PhaseSchedule::qubit(phase(rng), phase(rng), phase(rng));
        const auto q = qudit_output(1.0, cfg, ph);
        const auto f = encoder_output(1.0, cfg, ph);
        worst = std::max(worst, std::abs(q.amps[0] - f.amps[0]));
        worst = std::max(worst, std::abs(q.amps[1] + f.amps[1]));
        CHECK(std::abs(q.intensity(0) - f.intensity(0)) < 1e-12);
        CHECK(std::abs(q.intensity(1) - f.intensity(1)) < 1e-12);
    }
    MESSAGE("d = 2 closed form vs encoder field, per-bin signs (+1, -1): max deviation " << worst);
    CHECK(worst < 1e-12);
}

TEST_CASE("minimum transmittance and QBER") {
    CHECK(min_transmittance(0.5) == 0.0);
    CHECK(min_qber(0.5) == 0.0);
    CHECK(min_transmittance(0.45) == doctest::Approx(0.0025).epsilon(1e-12));
    CHECK(min_qber(0.45) == doctest::Approx(0.01 / 1.01).epsilon(1e-12));
    CHECK(min_transmittance(1.0) == 0.25);
    CHECK(min_qber(1.0) == 0.5);
    CHECK_THROWS(min_transmittance(1.5));
    for (int i = 0; i <= 100; ++i) {
        const double t1 = i / 100.0;
        CHECK(std::abs(numeric_min_transmittance(t1) - min_transmittance(t1)) < 1e-9);
        CHECK(std::abs(min_transmittance(t1) - min_transmittance(1 - t1)) < 1e-15);
    }
}

TEST_CASE("modulator extinction leaks phase into the other bin") {
    auto cfg = EncoderConfig::ideal();
    cfg.modulator_extinction = 0.01;
    const auto early = encoder_output(1.0, cfg, PhaseSchedule::qubit(0, pi, 0));
    CHECK(early.intensity(1) == doctest::Approx(0.25 * std::pow(std::sin(0.01 * pi / 2), 2)).epsilon(1e-12));
    const auto minus = encoder_output(1.0, cfg, PhaseSchedule::qubit(pi, 0, 0));
    CHECK(minus.intensity(0) == doctest::Approx(minus.intensity(1)).epsilon(1e-14));
    cfg.modulator_extinction = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
