#include "maczac/optics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "maczac/errors.hpp"

namespace maczac {

namespace {

constexpr ComplexAmp kI{0.0, 1.0};

ComplexAmp phasor(double phase) { return std::polar(1.0, phase); }

bool is_half(const BeamSplitterSpec& bs) { return bs.t == 0.5; }

void require_qubit(const EncoderConfig& cfg, const PhaseSchedule& ph) {
    if (cfg.dimension != 2) {
        throw DimensionError("qubit encoder path requires d = 2, got d = " +
                             std::to_string(cfg.dimension));
    }
    if (ph.dimension() != 2) {
        throw DimensionError("phase schedule has " + std::to_string(ph.dimension()) +
                             " arm phases, encoder has d = 2");
    }
}

void require_matching(const EncoderConfig& cfg, const PhaseSchedule& ph) {
    if (ph.dimension() != static_cast<std::size_t>(cfg.dimension)) {
        throw DimensionError("phase schedule has " + std::to_string(ph.dimension()) +
                             " arm phases, encoder has d = " + std::to_string(cfg.dimension));
    }
}

// Unbalanced Mach-Zehnder: the early pulse takes the transmitted-transmitted
// path, the late one the reflected-reflected path (i * i = -1) plus the
// residual arm phase.
std::pair<ComplexAmp, ComplexAmp> mach_zehnder(ComplexAmp in, const BeamSplitterSpec& bs2,
                                               const BeamSplitterSpec& bs3, double omega_tau) {
    ComplexAmp early = std::sqrt(bs2.t) * std::sqrt(bs3.t) * in;
    ComplexAmp late = (kI * std::sqrt(bs2.r())) * (kI * std::sqrt(bs3.r())) * phasor(omega_tau) * in;
    return {early, late};
}

}  // namespace

void BeamSplitterSpec::validate() const {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw ConfigError("beamsplitter transmittance must lie in [0, 1], got " +
                          std::to_string(t));
    }
}

double TimeBinField::total_intensity() const {
    double sum = 0.0;
    for (const auto& a : amps) sum += std::norm(a);
    return sum;
}

EncoderConfig EncoderConfig::ideal(int dimension) {
    EncoderConfig cfg;
    cfg.dimension = dimension;
    return cfg;
}

bool EncoderConfig::is_ideal() const {
    return std::all_of(splitters.begin(), splitters.end(), is_half);
}

void EncoderConfig::validate() const {
    if (dimension < 2) {
        throw ConfigError("encoder dimension must be >= 2, got " + std::to_string(dimension));
    }
    if (splitters.size() != 3) {
        throw ConfigError("encoder needs exactly three beamsplitters (t1, t2, t3)");
    }
    for (const auto& bs : splitters) bs.validate();
    if (dimension > 2 && !is_ideal()) {
        throw ConfigError("imperfect beamsplitters are only modelled for d = 2");
    }
    if (!std::isfinite(omega_tau)) throw ConfigError("omega_tau must be finite");
    if (!(modulator_extinction >= 0.0 && modulator_extinction <= 1.0)) {
        throw ConfigError("modulator_extinction must lie in [0, 1]");
    }
}

void PhaseSchedule::validate() const {
    if (!std::isfinite(phi_c)) throw ConfigError("phi_c must be finite");
    for (double p : phi_arm) {
        if (!std::isfinite(p)) throw ConfigError("arm phases must be finite");
    }
    if (phi_arm.empty()) throw ConfigError("phase schedule needs at least one arm phase");
}

std::pair<ComplexAmp, ComplexAmp> split_input(ComplexAmp e0, const BeamSplitterSpec& bs1) {
    bs1.validate();
    return {std::sqrt(bs1.t) * e0, kI * std::sqrt(bs1.r()) * e0};
}

PhaseSchedule effective_phases(const EncoderConfig& cfg, const PhaseSchedule& ph) {
    PhaseSchedule out = ph;
    const double bleed = cfg.modulator_extinction;
    if (bleed == 0.0) return out;
    const std::size_t d = ph.phi_arm.size();
    for (std::size_t k = 0; k < d; ++k) {
        double neighbours = 0.0;
        if (k > 0) neighbours += ph.phi_arm[k - 1];
        if (k + 1 < d) neighbours += ph.phi_arm[k + 1];
        out.phi_arm[k] = ph.phi_arm[k] + bleed * neighbours;
    }
    return out;
}

LoopAmplitudes loop_amplitudes(ComplexAmp e0, const EncoderConfig& cfg, const PhaseSchedule& ph) {
    require_qubit(cfg, ph);
    const auto& bs1 = cfg.splitters.at(0);
    const auto& bs2 = cfg.splitters.at(1);
    const auto& bs3 = cfg.splitters.at(2);
    const PhaseSchedule eff = effective_phases(cfg, ph);

    auto [cw_in, ccw_in] = split_input(e0, bs1);

    // CW: modulator first, then the interferometer.
    auto [cw_e, cw_l] = mach_zehnder(cw_in * phasor(eff.phi_c), bs2, bs3, cfg.omega_tau);
    // CCW: interferometer first, then the modulator hits each bin separately.
    auto [ccw_e, ccw_l] = mach_zehnder(ccw_in, bs3, bs2, cfg.omega_tau);
    ccw_e *= phasor(eff.phi_arm[0]);
    ccw_l *= phasor(eff.phi_arm[1]);

    LoopAmplitudes out;
    out.cw.amps = {cw_e, cw_l};
    out.ccw.amps = {ccw_e, ccw_l};
    return out;
}

TimeBinField encoder_output(ComplexAmp e0, const EncoderConfig& cfg, const PhaseSchedule& ph) {
    const LoopAmplitudes loop = loop_amplitudes(e0, cfg, ph);
    const auto& bs1 = cfg.splitters.at(0);
    TimeBinField out;
    out.amps.resize(2);
    for (std::size_t k = 0; k < 2; ++k) {
        out.amps[k] = std::sqrt(bs1.t) * loop.cw.amps[k] + kI * std::sqrt(bs1.r()) * loop.ccw.amps[k];
    }
    return out;
}

TimeBinField qudit_output(ComplexAmp e0, const EncoderConfig& cfg, const PhaseSchedule& ph) {
    require_matching(cfg, ph);
    if (!cfg.is_ideal()) {
        throw ConfigError("qudit output is only defined for ideal 50/50 splitters");
    }
    const PhaseSchedule eff = effective_phases(cfg, ph);
    const double d = cfg.dimension;
    TimeBinField out;
    out.amps.resize(cfg.dimension);
    for (int k = 0; k < cfg.dimension; ++k) {
        const double plus = 0.5 * (eff.phi_c + eff.phi_arm[k]);
        const double minus = 0.5 * (eff.phi_c - eff.phi_arm[k]);
        out.amps[k] = (kI * e0 / d) * phasor(plus + k * cfg.omega_tau) * std::sin(minus);
    }
    return out;
}

double ideal_transmittance(double phi_c, double phi_k, int dimension) {
    const double s = std::sin(0.5 * (phi_c - phi_k));
    return s * s / (static_cast<double>(dimension) * dimension);
}

std::pair<double, double> general_transmittances(const BeamSplitterSpec& bs1,
                                                 const BeamSplitterSpec& bs2,
                                                 const BeamSplitterSpec& bs3, double phi_c,
                                                 double phi_e, double phi_l) {
    const double t1 = bs1.t;
    const double r1 = bs1.r();
    const double base = t1 * t1 + r1 * r1;
    const double cross = 2.0 * t1 * r1;
    const double te = bs2.t * bs3.t * (base - cross * std::cos(phi_c - phi_e));
    const double tl = bs2.r() * bs3.r() * (base - cross * std::cos(phi_c - phi_l));
    return {te, tl};
}

std::vector<double> transmittances(const EncoderConfig& cfg, const PhaseSchedule& ph) {
    require_matching(cfg, ph);
    const PhaseSchedule eff = effective_phases(cfg, ph);
    std::vector<double> out(cfg.dimension);
    if (cfg.is_ideal()) {
        for (int k = 0; k < cfg.dimension; ++k) {
            out[k] = ideal_transmittance(eff.phi_c, eff.phi_arm[k], cfg.dimension);
        }
        return out;
    }
    if (cfg.dimension != 2) {
        throw ConfigError("imperfect beamsplitters are only modelled for d = 2");
    }
    auto [te, tl] = general_transmittances(cfg.splitters[0], cfg.splitters[1], cfg.splitters[2],
                                           eff.phi_c, eff.phi_arm[0], eff.phi_arm[1]);
    out[0] = te;
    out[1] = tl;
    return out;
}

double min_transmittance(double t1) {
    if (!(t1 >= 0.0 && t1 <= 1.0)) throw ConfigError("t1 must lie in [0, 1]");
    const double u = 2.0 * t1 - 1.0;
    return 0.25 * u * u;
}

double min_qber(double t1) {
    const double tmin = min_transmittance(t1);
    return 4.0 * tmin / (4.0 * tmin + 1.0);
}

double numeric_min_transmittance(double t1) {
    if (!(t1 >= 0.0 && t1 <= 1.0)) throw ConfigError("t1 must lie in [0, 1]");
    const BeamSplitterSpec bs1{t1};
    const BeamSplitterSpec half{0.5};
    auto f = [&](double delta) {
        return general_transmittances(bs1, half, half, delta, 0.0, 0.0).first;
    };
    constexpr int kGrid = 720;
    constexpr double kPi = std::numbers::pi;
    const double step = 2.0 * kPi / kGrid;
    double best_x = -kPi;
    double best_f = f(best_x);
    for (int i = 1; i <= kGrid; ++i) {
        const double x = -kPi + i * step;
        const double v = f(x);
        if (v < best_f) {
            best_f = v;
            best_x = x;
        }
    }
    const auto [x, v] = boost::math::tools::brent_find_minima(
        f, best_x - step, best_x + step, std::numeric_limits<double>::digits / 2);
    (void)x;
    return std::min(v, best_f);
}

}  // namespace maczac
