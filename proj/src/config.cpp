#include "maczac/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include "maczac/errors.hpp"

namespace maczac {

namespace {

struct Entry {
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("config key '" + key + "': '" + text + "' is not a number");
    }
    return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = first + text.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("config key '" + key + "': '" + text + "' is not a non-negative integer");
    }
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "on" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "off" || text == "no") return false;
    throw ConfigError("config key '" + key + "': '" + text + "' is not a boolean");
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

template <class Access>
Entry number(const std::string& key, Access access) {
    return {[key, access](RunConfig& c, const std::string& v) { access(c) = parse_double(key, v); },
            [access](const RunConfig& c) {
                RunConfig copy = c;
                return fmt(access(copy));
            }};
}

const std::map<std::string, Entry>& registry() {
    static const std::map<std::string, Entry> table = [] {
        std::map<std::string, Entry> t;
#define MACZAC_NUM(name, expr) t[name] = number(name, [](RunConfig& c) -> double& { return c.expr; })
        MACZAC_NUM("t1", session.encoder.splitters[0].t);
        MACZAC_NUM("t2", session.encoder.splitters[1].t);
        MACZAC_NUM("t3", session.encoder.splitters[2].t);
        MACZAC_NUM("omega_tau", session.encoder.omega_tau);
        MACZAC_NUM("modulator_extinction", session.encoder.modulator_extinction);
        MACZAC_NUM("mu", session.levels.mu);
        MACZAC_NUM("nu", session.levels.nu);
        MACZAC_NUM("alpha_mu_rad", session.levels.alpha_mu);
        MACZAC_NUM("p_mu", session.levels.p_mu);
        MACZAC_NUM("p_z_alice", session.p_z_alice);
        MACZAC_NUM("v_pi", dac.v_pi);
        MACZAC_NUM("pulse_width_s", dac.pulse_width);
        MACZAC_NUM("t_early_s", dac.t_early);
        MACZAC_NUM("t_late_s", dac.t_late);
        MACZAC_NUM("t_minus_s", dac.t_minus);
        MACZAC_NUM("dac_sample_interval_s", dac.sample_interval);
        MACZAC_NUM("length_km", session.channel.length_km);
        MACZAC_NUM("attenuation_db_per_km", session.channel.attenuation_db_per_km);
        MACZAC_NUM("excess_loss_db", session.channel.excess_loss_db);
        MACZAC_NUM("efficiency", session.detector.efficiency);
        MACZAC_NUM("dark_rate_hz", session.detector.dark_rate);
        MACZAC_NUM("jitter_s", session.detector.jitter_sigma);
        MACZAC_NUM("dead_time_s", session.detector.dead_time);
        MACZAC_NUM("timetag_resolution_s", session.detector.timetag_resolution);
        MACZAC_NUM("basis_split", session.receiver.basis_split);
        MACZAC_NUM("interferometer_delay_s", session.receiver.interferometer_delay);
        MACZAC_NUM("phase_bob_rad", session.receiver.phase_bob);
        MACZAC_NUM("arm_loss_db", session.receiver.arm_loss_db);
        MACZAC_NUM("period_s", session.timing.period);
        MACZAC_NUM("first_bin_s", session.timing.first_bin);
        MACZAC_NUM("bin_spacing_s", session.timing.bin_spacing);
        MACZAC_NUM("window_width_s", session.timing.window_width);
        MACZAC_NUM("drift_sigma", session.drift.sigma);
        MACZAC_NUM("drift_rate", session.drift.rate);
        MACZAC_NUM("drift_sine_amplitude", session.drift.sine_amplitude);
        MACZAC_NUM("drift_sine_period_s", session.drift.sine_period);
        MACZAC_NUM("kp", session.feedback.kp);
        MACZAC_NUM("kd", session.feedback.kd);
        MACZAC_NUM("dither_current_a", session.feedback.dither_current);
        MACZAC_NUM("thermal_gain", session.feedback.thermal_gain);
        MACZAC_NUM("thermal_time_constant_s", session.feedback.thermal_time_constant);
        MACZAC_NUM("max_current_a", session.feedback.max_current);
        MACZAC_NUM("eps_sec", session.security.eps_sec);
        MACZAC_NUM("eps_corr", session.security.eps_corr);
        MACZAC_NUM("f_ec", session.security.f_ec);
        MACZAC_NUM("duration_s", session.duration);
        MACZAC_NUM("block_duration_s", session.block_duration);
        MACZAC_NUM("feedback_interval_s", session.feedback_interval);
        MACZAC_NUM("char_rate_hz", char_rate_hz);
        MACZAC_NUM("char_duration_s", char_duration);
        MACZAC_NUM("histogram_bin_s", histogram_bin);
#undef MACZAC_NUM
        t["d"] = {[](RunConfig& c, const std::string& v) {
                      const auto d = parse_uint("d", v);
                      if (d < 2 || d > 64) throw ConfigError("config key 'd' must lie in [2, 64]");
                      c.session.encoder.dimension = static_cast<int>(d);
                  },
                  [](const RunConfig& c) { return std::to_string(c.session.encoder.dimension); }};
        t["feedback_enabled"] = {
            [](RunConfig& c, const std::string& v) {
                c.session.feedback.enabled = parse_bool("feedback_enabled", v);
            },
            [](const RunConfig& c) { return std::string(c.session.feedback.enabled ? "true" : "false"); }};
        t["seed"] = {[](RunConfig& c, const std::string& v) { c.seed = parse_uint("seed", v); },
                     [](const RunConfig& c) { return std::to_string(c.seed); }};
        return t;
    }();
    return table;
}

}  // namespace

void RunConfig::validate() const {
    session.validate();
    dac.validate();
    if (!(char_rate_hz > 0.0 && char_rate_hz < session.repetition_rate())) {
        throw ConfigError("char_rate_hz must lie between 0 and the repetition rate");
    }
    if (!(char_duration > 0.0)) throw ConfigError("char_duration_s must be positive");
    if (!(histogram_bin > 0.0 && histogram_bin < session.timing.period)) {
        throw ConfigError("histogram_bin_s must be positive and shorter than the period");
    }
    if (std::abs(dac.period - session.timing.period) > 1e-15) {
        throw ConfigError("DAC period and laser period differ");
    }
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& table = registry();
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(cfg, value);
    if (key == "bin_spacing_s") {
        cfg.session.receiver.interferometer_delay = cfg.session.timing.bin_spacing;
    }
    if (key == "period_s") cfg.dac.period = cfg.session.timing.period;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override '" + assignment + "' must have the form key=value");
    }
    apply_setting(cfg, trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

void load_config(RunConfig& cfg, std::istream& is) {
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        try {
            apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    RunConfig cfg;
    load_config(cfg, in);
    return cfg;
}

void write_config(std::ostream& os, const RunConfig& cfg) {
    for (const auto& [key, entry] : registry()) os << key << " = " << entry.get(cfg) << '\n';
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& kv : registry()) keys.push_back(kv.first);
    return keys;
}

}  // namespace maczac
