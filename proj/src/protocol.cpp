#include "maczac/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "maczac/errors.hpp"

namespace maczac {

namespace {

double phase_for_fraction(double fraction, double alpha) {
    const double s = std::sqrt(fraction) * std::sin(0.5 * alpha);
    return 2.0 * std::asin(std::clamp(s, 0.0, 1.0));
}

}  // namespace

void SymbolPlan::validate() const {
    if (dimension < 2) throw ConfigError("symbol dimension must be >= 2");
    if (bin != kSuperposition && (bin < 0 || bin >= dimension)) {
        throw ConfigError("symbol bin " + std::to_string(bin) + " outside [0, " +
                          std::to_string(dimension) + ")");
    }
}

std::string SymbolPlan::name() const {
    std::string level = decoy == Decoy::Mu ? "mu" : "nu";
    std::string state;
    if (dimension == 2) {
        state = bin == 0 ? "E" : bin == 1 ? "L" : "minus";
    } else {
        state = is_superposition() ? "uniform" : "k" + std::to_string(bin);
    }
    return state + ":" + level;
}

void DecoyLevels::validate() const {
    if (!(mu >= 0.0) || !(nu >= 0.0)) throw ConfigError("mean photon numbers must be >= 0");
    if (!(alpha_mu > 0.0 && alpha_mu <= std::numbers::pi)) {
        throw ConfigError("alpha_mu must lie in (0, pi]");
    }
    if (!(p_mu > 0.0 && p_mu < 1.0)) throw ConfigError("p_mu must lie in (0, 1)");
    if (!(nu < mu)) throw NoSolutionError("decoy level nu must be strictly below mu");
}

double alpha_nu(const DecoyLevels& levels) {
    if (!(levels.nu < levels.mu)) {
        throw NoSolutionError("no decoy phase: nu (" + std::to_string(levels.nu) +
                              ") must be below mu (" + std::to_string(levels.mu) + ")");
    }
    if (levels.nu < 0.0) throw NoSolutionError("nu must be non-negative");
    return phase_for_fraction(levels.nu / levels.mu, levels.alpha_mu);
}

double beta_for(double alpha, int dimension) {
    if (dimension < 2) throw ConfigError("dimension must be >= 2");
    return phase_for_fraction(1.0 / dimension, alpha);
}

ScheduledPhases schedule_for(const SymbolPlan& plan, const DecoyLevels& levels) {
    plan.validate();
    const double alpha = plan.decoy == Decoy::Mu ? levels.alpha_mu : alpha_nu(levels);
    ScheduledPhases out;
    out.phases.phi_c = 0.0;
    out.phases.phi_arm.assign(plan.dimension, 0.0);
    if (plan.is_superposition()) {
        out.phases.phi_c = beta_for(alpha, plan.dimension);
        out.slot = Slot::control();
    } else {
        out.phases.phi_arm[plan.bin] = alpha;
        out.slot = Slot{plan.bin};
    }
    return out;
}

double mean_photon_of(const SymbolPlan& plan, const DecoyLevels& levels, const EncoderConfig& cfg,
                      double source_mean) {
    const auto t = transmittances(cfg, schedule_for(plan, levels).phases);
    return source_mean * std::accumulate(t.begin(), t.end(), 0.0);
}

double calibrated_source_mean(const DecoyLevels& levels, const EncoderConfig& cfg) {
    SymbolPlan reference{0, Decoy::Mu, cfg.dimension};
    const double per_photon = mean_photon_of(reference, levels, cfg, 1.0);
    if (!(per_photon > 0.0)) throw ConfigError("encoder transmits nothing for the reference state");
    return levels.mu / per_photon;
}

}  // namespace maczac
