#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maczac/characterize.hpp"
#include "maczac/cli.hpp"
#include "maczac/config.hpp"
#include "maczac/electronics.hpp"
#include "maczac/errors.hpp"
#include "maczac/keyrate.hpp"
#include "maczac/plot.hpp"
#include "maczac/session.hpp"

namespace maczac {

namespace {

constexpr double kSweepTolerance = 1e-9;
constexpr double kQuditTolerance = 1e-12;

struct GlobalOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<double> duration;
    std::string out_dir = ".";
    bool svg = false;
};

class InvariantFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

RunConfig build_config(const GlobalOptions& g) {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config_file(g.config_path);
    for (const auto& o : g.overrides) apply_override(cfg, o);
    if (g.seed) cfg.seed = *g.seed;
    if (g.duration) {
        cfg.char_duration = *g.duration;
        cfg.session.duration = *g.duration;
        cfg.session.block_duration = std::min(cfg.session.block_duration, *g.duration);
        cfg.session.feedback_interval = std::min(cfg.session.feedback_interval, cfg.session.block_duration);
    }
    return cfg;
}

std::ofstream open_output(const GlobalOptions& g, const std::string& name) {
    std::filesystem::create_directories(g.out_dir);
    const auto path = std::filesystem::path(g.out_dir) / name;
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write '" + path.string() + "'");
    os << std::setprecision(12);
    return os;
}

SymbolPlan parse_plan(const std::string& state, const std::string& decoy) {
    const Decoy level = decoy == "nu" ? Decoy::Nu : Decoy::Mu;
    if (state == "E") return SymbolPlan::early(level);
    if (state == "L") return SymbolPlan::late(level);
    return SymbolPlan::minus(level);
}

int cmd_characterize(const GlobalOptions& g, const std::string& state, const std::string& decoy,
                     std::size_t keep_clicks, std::ostream& out) {
    const RunConfig cfg = build_config(g);
    cfg.validate();
    CharacterizationSetup setup;
    setup.encoder = cfg.session.encoder;
    setup.levels = cfg.session.levels;
    setup.detector = cfg.session.detector;
    setup.timing = cfg.session.timing;
    setup.detection_rate = cfg.char_rate_hz;
    setup.duration = cfg.char_duration;
    setup.histogram_bin = cfg.histogram_bin;
    setup.keep_clicks = keep_clicks;

    const SymbolPlan plan = parse_plan(state, decoy);
    const auto r = characterize(setup, plan, cfg.seed);
    const auto& m = r.metrics;

    {
        auto os = open_output(g, "histogram.csv");
        os << "bin_time_s,counts\n";
        const auto& counts = r.histogram.counts();
        for (std::size_t i = 0; i < counts.size(); ++i) {
            os << r.histogram.bin_time(i) << ',' << counts[i] << '\n';
        }
    }
    {
        auto os = open_output(g, "perr.csv");
        os << "state,n_correct,n_wrong,p_err,p_err_sigma,er_db,er_db_sigma,detection_rate_hz\n";
        os << plan.name() << ',' << m.n_correct << ',' << m.n_wrong << ',' << m.p_err << ','
           << m.p_err_sigma << ',' << m.er_db << ',' << m.er_db_sigma << ',' << r.detection_rate_hz
           << '\n';
    }
    if (keep_clicks > 0) {
        auto os = open_output(g, "clicks.csv");
        os << "timestamp_s,detector_id,window,true_symbol\n";
        for (const auto& c : r.clicks) {
            os << c.timestamp << ',' << to_string(c.detector) << ','
               << setup.timing.slot_of(c.timestamp, 2) << ','
               << (c.truth ? c.truth->name() : std::string{}) << '\n';
        }
    }
    if (g.svg) {
        PlotSeries s{"counts", {}, {}};
        const auto& counts = r.histogram.counts();
        for (std::size_t i = 0; i < counts.size(); ++i) {
            if (counts[i] == 0) continue;
            s.x.push_back(r.histogram.bin_time(i) * 1e9);
            s.y.push_back(static_cast<double>(counts[i]));
        }
        auto os = open_output(g, "histogram.svg");
        write_svg(os, {"Time of arrival, " + plan.name(), "time in period (ns)", "counts", true, true},
                  {s});
    }

    out << "state            " << plan.name() << '\n'
        << "detection rate   " << r.detection_rate_hz << " Hz\n"
        << "clicks           correct " << m.n_correct << ", wrong " << m.n_wrong << '\n'
        << "P_err            " << m.p_err << " +- " << m.p_err_sigma << '\n'
        << "ER               " << m.er_db << " +- " << m.er_db_sigma << " dB\n";
    return kExitOk;
}

int cmd_sweep(const GlobalOptions& g, double t1_min, double t1_max, int points, std::ostream& out) {
    if (!(t1_min >= 0.0 && t1_max <= 1.0 && t1_min <= t1_max)) {
        throw ConfigError("sweep range must satisfy 0 <= t1-min <= t1-max <= 1");
    }
    if (points < 1) throw ConfigError("sweep needs at least one point");
    auto os = open_output(g, "sweep.csv");
    os << "t1,t_min,qber_min,t_min_numeric,qber_min_numeric\n";
    PlotSeries tmin{"T_min", {}, {}};
    PlotSeries qmin{"QBER_min", {}, {}};
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
        const double t1 = points == 1 ? t1_min : t1_min + (t1_max - t1_min) * i / (points - 1);
        const double closed = min_transmittance(t1);
        const double numeric = numeric_min_transmittance(t1);
        const double q_closed = min_qber(t1);
        const double q_numeric = 4.0 * numeric / (4.0 * numeric + 1.0);
        worst = std::max({worst, std::abs(closed - numeric), std::abs(q_closed - q_numeric)});
        os << t1 << ',' << closed << ',' << q_closed << ',' << numeric << ',' << q_numeric << '\n';
        tmin.x.push_back(t1);
        tmin.y.push_back(closed);
        qmin.x.push_back(t1);
        qmin.y.push_back(q_closed);
    }
    if (g.svg) {
        auto svg = open_output(g, "sweep.svg");
        write_svg(svg, {"Minimum transmittance and QBER", "T1", "value", false, false}, {tmin, qmin});
    }
    out << "points " << points << ", max |closed form - numeric| = " << worst << '\n';
    if (worst > kSweepTolerance) {
        throw InvariantFailure("closed-form and numerical minima differ by " + std::to_string(worst));
    }
    return kExitOk;
}

void print_summary(std::ostream& out, const SessionSummary& s) {
    auto row = [&](const char* name, const MeanStd& v, double scale, const char* unit) {
        out << std::left << std::setw(20) << name << std::right << std::setw(14) << v.mean * scale
            << " +- " << std::setw(12) << v.stddev * scale << ' ' << unit << '\n';
    };
    out << std::setprecision(5);
    row("Detection rate", s.det_rate_hz, 1e-3, "kHz");
    row("Sifted key rate", s.sifted_bps, 1e-3, "kbps");
    row("QBER_Z", s.qber_z, 100.0, "%");
    row("QBER_X", s.qber_x, 100.0, "%");
    row("Secret key rate", s.skr_bps, 1e-3, "kbps");
}

int cmd_qkd_run(const GlobalOptions& g, std::ostream& out) {
    const RunConfig cfg = build_config(g);
    cfg.validate();
    const auto result = run_session(cfg.session, cfg.seed);
    const auto summary = summarize(result.blocks);
    {
        auto os = open_output(g, "time_series.csv");
        write_time_series_csv(os, result.blocks);
    }
    {
        auto os = open_output(g, "feedback_trace.csv");
        write_step_trace_csv(os, result.steps);
    }
    {
        auto os = open_output(g, "block_counts.csv");
        write_block_counts_csv(os, key_rows(result.blocks));
    }
    {
        auto os = open_output(g, "summary.csv");
        write_summary_csv(os, summary);
    }
    {
        auto os = open_output(g, "run.cfg");
        write_config(os, cfg);
    }
    if (g.svg) {
        PlotSeries qz{"QBER_Z", {}, {}}, qx{"QBER_X", {}, {}}, det{"detection", {}, {}},
            sift{"sifted", {}, {}}, skr{"secret", {}, {}};
        for (const auto& b : result.blocks) {
            const double t = b.t_start / 60.0;
            qz.x.push_back(t), qz.y.push_back(100.0 * b.qber_z);
            qx.x.push_back(t), qx.y.push_back(100.0 * b.qber_x);
            det.x.push_back(t), det.y.push_back(1e-3 * b.det_rate_hz);
            sift.x.push_back(t), sift.y.push_back(1e-3 * b.sifted_bps);
            skr.x.push_back(t), skr.y.push_back(1e-3 * b.skr_bps);
        }
        auto q = open_output(g, "qber.svg");
        write_svg(q, {"QBER per block", "time (min)", "QBER (%)", true, false}, {qz, qx});
        auto r = open_output(g, "rates.svg");
        write_svg(r, {"Rates per block", "time (min)", "rate (k/s)", false, false}, {det, sift, skr});
    }
    out << "blocks " << result.blocks.size() << " x " << cfg.session.block_duration << " s\n";
    print_summary(out, summary);
    return kExitOk;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            out.push_back(std::stod(cell));
        } catch (const std::exception&) {
            throw ConfigError("'" + cell + "' in --phases is not a number");
        }
    }
    return out;
}

int cmd_qudit(const GlobalOptions& g, int d, const std::string& state, std::optional<double> phi_c,
              const std::string& phases, std::ostream& out) {
    if (d != 2 && d != 4 && d != 8) throw ConfigError("qudit dimension must be 2, 4 or 8");
    const RunConfig cfg = build_config(g);
    cfg.session.levels.validate();
    const EncoderConfig enc = EncoderConfig::ideal(d);

    PhaseSchedule ph;
    if (phi_c || !phases.empty()) {
        ph.phi_c = phi_c.value_or(0.0);
        ph.phi_arm = phases.empty() ? std::vector<double>(d, 0.0) : parse_list(phases);
        if (static_cast<int>(ph.phi_arm.size()) != d) {
            throw DimensionError("--phases needs " + std::to_string(d) + " values");
        }
    } else if (state == "uniform") {
        ph = schedule_for({SymbolPlan::kSuperposition, Decoy::Mu, d}, cfg.session.levels).phases;
    } else {
        int bin = 0;
        try {
            bin = std::stoi(state);
        } catch (const std::exception&) {
            throw ConfigError("--state must be 'uniform' or a bin index");
        }
        ph = schedule_for({bin, Decoy::Mu, d}, cfg.session.levels).phases;
    }

    const auto field = qudit_output({1.0, 0.0}, enc, ph);
    const auto closed = transmittances(enc, ph);
    std::vector<double> qubit;
    if (d == 2) {
        const auto f2 = encoder_output({1.0, 0.0}, enc, ph);
        for (std::size_t k = 0; k < 2; ++k) qubit.push_back(f2.intensity(k));
    }

    auto os = open_output(g, "qudit.csv");
    os << "bin,amp_re,amp_im,t_field,t_closed_form" << (d == 2 ? ",t_qubit_encoder" : "") << '\n';
    double worst = 0.0;
    for (int k = 0; k < d; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        os << k << ',' << field.amps[kk].real() << ',' << field.amps[kk].imag() << ','
           << field.intensity(kk) << ',' << closed[kk];
        worst = std::max(worst, std::abs(field.intensity(kk) - closed[kk]));
        if (d == 2) {
            os << ',' << qubit[kk];
            worst = std::max(worst, std::abs(qubit[kk] - closed[kk]));
        }
        os << '\n';
    }
    const double total = std::accumulate(closed.begin(), closed.end(), 0.0);
    const auto [lo, hi] = std::minmax_element(closed.begin(), closed.end());
    out << "d " << d << ", phi_c " << ph.phi_c << '\n'
        << "sum of transmittances " << total << " (bound 1)\n"
        << "min/max bin " << *lo << " / " << *hi << '\n'
        << "max model disagreement " << worst << '\n';
    if (worst > kQuditTolerance || total > 1.0 + kQuditTolerance) {
        throw InvariantFailure("qudit transmittance cross-check failed");
    }
    return kExitOk;
}

int cmd_keyrate(const GlobalOptions& g, const std::string& counts_path, std::ostream& out) {
    const RunConfig cfg = build_config(g);
    cfg.session.levels.validate();
    cfg.session.security.validate();
    std::ifstream in(counts_path);
    if (!in) throw ConfigError("cannot open block-counts file '" + counts_path + "'");
    const auto rows = read_block_counts_csv(in);
    auto os = open_output(g, "key_length.csv");
    write_key_length_csv(os, rows, cfg.session.levels, cfg.session.security);
    double bits = 0.0;
    double seconds = 0.0;
    for (const auto& r : rows) {
        bits += secret_key_length(r.counts, cfg.session.levels, cfg.session.security);
        seconds += r.block_s;
    }
    out << "blocks " << rows.size() << ", secret bits " << bits;
    if (seconds > 0.0) out << ", mean rate " << bits / seconds << " bps";
    out << '\n';
    return kExitOk;
}

int cmd_waveforms(const GlobalOptions& g, std::ostream& out) {
    const RunConfig cfg = build_config(g);
    cfg.session.levels.validate();
    const DacConfig dac = calibrate_voltages(cfg.session.levels, cfg.dac);
    for (const auto& plan : {SymbolPlan::early(Decoy::Mu), SymbolPlan::early(Decoy::Nu),
                             SymbolPlan::late(Decoy::Mu), SymbolPlan::late(Decoy::Nu),
                             SymbolPlan::minus(Decoy::Mu), SymbolPlan::minus(Decoy::Nu)}) {
        const auto pattern = pattern_for(plan);
        const auto w = waveform_for(pattern, dac);
        auto os = open_output(g, "waveform_" + plan.name() + ".csv");
        write_waveform_csv(os, w);
        const auto ph = phases_from_waveform(w, dac);
        out << std::left << std::setw(10) << plan.name() << " D=(" << pattern.d_el_1 << ','
            << pattern.d_el_2 << ',' << pattern.d_c_1 << ',' << pattern.d_c_2 << ") phases=("
            << ph.phi_c << ", " << ph.phi_arm[0] << ", " << ph.phi_arm[1] << ")\n";
    }
    out << "V1_el " << dac.v1_el << ", V2_el " << dac.v2_el << ", V1_c " << dac.v1_c << ", V2_c "
        << dac.v2_c << " (V_pi " << dac.v_pi << ")\n";
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Time-bin decoy-state encoder and QKD link simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "maczac 1.0");

    GlobalOptions g;
    std::uint64_t seed = 0;
    double duration = 0.0;
    auto add_globals = [&](CLI::App* sub) {
        sub->add_option("--config", g.config_path, "key = value configuration file")
            ->check(CLI::ExistingFile);
        sub->add_option("--set", g.overrides, "override one config key (key=value)");
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--duration", duration, "simulated seconds")->check(CLI::PositiveNumber);
        sub->add_option("--out", g.out_dir, "output directory");
        sub->add_flag("--svg", g.svg, "also write SVG plots");
    };

    std::string state = "E";
    std::string decoy = "mu";
    std::size_t keep_clicks = 0;
    auto* characterize_cmd = app.add_subcommand("characterize", "time-of-arrival P_err and ER");
    add_globals(characterize_cmd);
    characterize_cmd->add_option("--state", state, "E, L or minus")
        ->check(CLI::IsMember({"E", "L", "minus"}));
    characterize_cmd->add_option("--decoy", decoy, "mu or nu")->check(CLI::IsMember({"mu", "nu"}));
    characterize_cmd->add_option("--clicks", keep_clicks, "export the first N clicks");

    double t1_min = 0.0;
    double t1_max = 1.0;
    int points = 101;
    auto* sweep_cmd = app.add_subcommand("sweep", "minimum transmittance and QBER versus T1");
    add_globals(sweep_cmd);
    sweep_cmd->add_option("--t1-min", t1_min, "lowest T1");
    sweep_cmd->add_option("--t1-max", t1_max, "highest T1");
    sweep_cmd->add_option("--points", points, "number of T1 values");

    auto* qkd_cmd = app.add_subcommand("qkd-run", "full QKD session with phase feedback");
    add_globals(qkd_cmd);

    int d = 4;
    std::string qudit_state = "uniform";
    double phi_c = 0.0;
    std::string phases;
    auto* qudit_cmd = app.add_subcommand("qudit", "per-bin transmittances of the d-bin encoder");
    add_globals(qudit_cmd);
    qudit_cmd->add_option("--d", d, "dimension (2, 4 or 8)");
    qudit_cmd->add_option("--state", qudit_state, "'uniform' or a bin index");
    auto* phi_c_opt = qudit_cmd->add_option("--phi-c", phi_c, "explicit control phase (rad)");
    qudit_cmd->add_option("--phases", phases, "explicit comma-separated arm phases (rad)");

    std::string counts_path;
    auto* keyrate_cmd = app.add_subcommand("keyrate", "secret key length from a block-counts CSV");
    add_globals(keyrate_cmd);
    keyrate_cmd->add_option("--counts", counts_path, "block-counts CSV")->required();

    auto* waveforms_cmd = app.add_subcommand("waveforms", "calibrated modulator drive waveforms");
    add_globals(waveforms_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, e2;
        const int code = app.exit(e, o, e2);
        out << o.str();
        err << e2.str();
        return code == 0 ? kExitOk : kExitConfig;
    }

    for (auto* sub : app.get_subcommands()) {
        if (sub->count("--seed") > 0) g.seed = seed;
        if (sub->count("--duration") > 0) g.duration = duration;
    }

    try {
        if (characterize_cmd->parsed()) return cmd_characterize(g, state, decoy, keep_clicks, out);
        if (sweep_cmd->parsed()) return cmd_sweep(g, t1_min, t1_max, points, out);
        if (qkd_cmd->parsed()) return cmd_qkd_run(g, out);
        if (qudit_cmd->parsed()) {
            std::optional<double> phi;
            if (phi_c_opt->count() > 0) phi.emplace(phi_c);
            return cmd_qudit(g, d, qudit_state, phi, phases, out);
        }
        if (keyrate_cmd->parsed()) return cmd_keyrate(g, counts_path, out);
        if (waveforms_cmd->parsed()) return cmd_waveforms(g, out);
    } catch (const InvariantFailure& e) {
        err << "invariant violated: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NoSolutionError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const CalibrationError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}

}  // namespace maczac
