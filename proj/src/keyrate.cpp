#include "maczac/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include "maczac/errors.hpp"

namespace maczac {

namespace {

// Intensity-resolved view of one basis: counts, error counts and the decoy
// parameters needed to undo the Poisson mixing.
struct BasisStats {
    double n[2];  // detections at mu (0) and nu (1)
    double m[2];  // errors at mu (0) and nu (1)
};

class OneDecoyEstimator {
  public:
    OneDecoyEstimator(const DecoyLevels& levels, const SecurityParams& sec)
        : mu_{levels.mu, levels.nu},
          p_{levels.p_mu, 1.0 - levels.p_mu},
          log_term_(std::log(19.0 / sec.eps_sec)) {}

    // tau_n = sum_k p_k e^{-k} k^n / n!: probability of sending n photons.
    double tau(int n) const {
        double sum = 0.0;
        for (int k = 0; k < 2; ++k) {
            sum += p_[k] * std::exp(-mu_[k]) * std::pow(mu_[k], n) / std::tgamma(n + 1.0);
        }
        return sum;
    }

    // Hoeffding-corrected, Poisson-rescaled counts:
    // x^{+-}_k = (e^k / p_k) (x_k +- sqrt(x / 2 ln(19 / eps_sec))).
    // Lower bounds are clipped at zero, which keeps them valid.
    double upper(const double (&x)[2], int k) const {
        return std::exp(mu_[k]) / p_[k] * (x[k] + deviation(x));
    }
    double lower(const double (&x)[2], int k) const {
        return std::max(0.0, std::exp(mu_[k]) / p_[k] * (x[k] - deviation(x)));
    }

    // Vacuum events are wrong half of the time:
    // s_0^u = 2 tau_0 m^+_nu.
    double vacuum_upper(const BasisStats& b) const { return 2.0 * tau(0) * upper(b.m, 1); }

    // s_0^l = tau_0 / (mu - nu) (mu n^-_nu - nu n^+_mu).
    double vacuum_lower(const BasisStats& b) const {
        const double v = tau(0) / (mu_[0] - mu_[1]) * (mu_[0] * lower(b.n, 1) - mu_[1] * upper(b.n, 0));
        return std::max(0.0, v);
    }

    // s_1^l = mu tau_1 / (nu (mu - nu)) *
    //         (n^-_nu - (nu/mu)^2 n^+_mu - (mu^2 - nu^2)/mu^2 * s_0^u / tau_0).
    double single_lower(const BasisStats& b) const {
        const double mu = mu_[0];
        const double nu = mu_[1];
        const double r = nu / mu;
        const double bracket = lower(b.n, 1) - r * r * upper(b.n, 0) -
                               (mu * mu - nu * nu) / (mu * mu) * vacuum_upper(b) / tau(0);
        return mu * tau(1) / (nu * (mu - nu)) * bracket;
    }

    // v_1^u = tau_1 / (mu - nu) (m^+_mu - m^-_nu): single-photon errors.
    double single_errors_upper(const BasisStats& b) const {
        return tau(1) / (mu_[0] - mu_[1]) * (upper(b.m, 0) - lower(b.m, 1));
    }

    double log_term() const { return log_term_; }

  private:
    double deviation(const double (&x)[2]) const {
        return std::sqrt(std::max(0.0, x[0] + x[1]) / 2.0 * log_term_);
    }

    double mu_[2];
    double p_[2];
    double log_term_;
};

// Random-sampling correction for the phase error rate:
// gamma(a, b, c, d) = sqrt((c + d)(1 - b) b / (c d ln 2) *
//                          log2((c + d) / (c d (1 - b) b) * 19^2 / a^2)).
double sampling_gap(double eps, double b, double c, double d) {
    if (b <= 0.0) return 0.0;
    const double inner = std::log2((c + d) / (c * d * (1.0 - b) * b) * 361.0 / (eps * eps));
    if (inner <= 0.0) return 0.0;
    return std::sqrt((c + d) * (1.0 - b) * b / (c * d * std::numbers::ln2) * inner);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

}  // namespace

void BlockCounts::validate() const {
    for (double v : {n_z_mu, n_z_nu, m_x_mu, m_x_nu, n_x_mu, n_x_nu, block_size}) {
        if (!(v >= 0.0)) throw ConfigError("block counts must be non-negative");
    }
    if (m_x_mu > n_x_mu || m_x_nu > n_x_nu) {
        throw ConfigError("X error counts cannot exceed X counts");
    }
    if (!(qber_z >= 0.0 && qber_z <= 1.0)) throw ConfigError("qber_z must lie in [0, 1]");
}

void SecurityParams::validate() const {
    if (!(eps_sec > 0.0 && eps_sec < 1.0) || !(eps_corr > 0.0 && eps_corr < 1.0)) {
        throw ConfigError("security parameters must lie in (0, 1)");
    }
    if (!(f_ec >= 1.0)) throw ConfigError("error-correction inefficiency f_ec must be >= 1");
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw std::domain_error("binary entropy argument must lie in [0, 1]");
    }
    if (x == 0.0 || x == 1.0) return 0.0;
    return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

DecoyBounds decoy_bounds(const BlockCounts& counts, const DecoyLevels& levels,
                         const SecurityParams& sec) {
    counts.validate();
    sec.validate();
    if (!(levels.nu > 0.0 && levels.nu < levels.mu)) {
        throw ConfigError("one-decoy bounds need 0 < nu < mu");
    }
    if (!(levels.p_mu > 0.0 && levels.p_mu < 1.0)) throw ConfigError("p_mu must lie in (0, 1)");

    const OneDecoyEstimator est(levels, sec);
    const BasisStats z{{counts.n_z_mu, counts.n_z_nu},
                       {counts.qber_z * counts.n_z_mu, counts.qber_z * counts.n_z_nu}};
    const BasisStats x{{counts.n_x_mu, counts.n_x_nu}, {counts.m_x_mu, counts.m_x_nu}};

    DecoyBounds b;
    b.s_z0_lower = std::min(est.vacuum_lower(z), counts.n_z());
    // Vacuum and single-photon events together cannot exceed the detections.
    b.s_z1_lower = std::min(est.single_lower(z), counts.n_z() - b.s_z0_lower);
    b.s_x1_lower = std::min(est.single_lower(x), counts.n_x());
    b.v_x1_upper = est.single_errors_upper(x);

    if (!(b.s_z1_lower > 0.0) || !(b.s_x1_lower > 0.0)) {
        b.s_z1_lower = std::max(0.0, b.s_z1_lower);
        b.s_x1_lower = std::max(0.0, b.s_x1_lower);
        b.phi_z_upper = 0.5;
        b.usable = false;
        return b;
    }
    const double ratio = std::clamp(b.v_x1_upper / b.s_x1_lower, 0.0, 0.5);
    const double gap = ratio < 0.5 ? sampling_gap(sec.eps_sec, ratio, b.s_z1_lower, b.s_x1_lower)
                                   : 0.0;
    b.phi_z_upper = std::min(0.5, ratio + gap);
    b.usable = b.phi_z_upper < 0.5;
    return b;
}

double security_penalty(const SecurityParams& sec) {
    return 6.0 * std::log2(19.0 / sec.eps_sec) + std::log2(2.0 / sec.eps_corr);
}

double error_correction_leak(const BlockCounts& counts, const SecurityParams& sec) {
    return sec.f_ec * counts.n_z() * binary_entropy(counts.qber_z);
}

double secret_key_length(const BlockCounts& counts, const DecoyLevels& levels,
                         const SecurityParams& sec) {
    const DecoyBounds b = decoy_bounds(counts, levels, sec);
    if (!b.usable) return 0.0;
    const double l = b.s_z0_lower + b.s_z1_lower * (1.0 - binary_entropy(b.phi_z_upper)) -
                     error_correction_leak(counts, sec) - security_penalty(sec);
    return std::max(0.0, l);
}

BlockCounts block_counts_from_rates(double sifted_bps, double x_conclusive_hz, double qber_z,
                                    double qber_x, double block_seconds,
                                    const DecoyLevels& levels, double eta) {
    const double w_mu = levels.p_mu * -std::expm1(-levels.mu * eta);
    const double w_nu = (1.0 - levels.p_mu) * -std::expm1(-levels.nu * eta);
    const double f_mu = w_mu / (w_mu + w_nu);
    const double n_z = sifted_bps * block_seconds;
    const double n_x = x_conclusive_hz * block_seconds;

    BlockCounts c;
    c.n_z_mu = n_z * f_mu;
    c.n_z_nu = n_z * (1.0 - f_mu);
    c.n_x_mu = n_x * f_mu;
    c.n_x_nu = n_x * (1.0 - f_mu);
    c.m_x_mu = qber_x * c.n_x_mu;
    c.m_x_nu = qber_x * c.n_x_nu;
    c.qber_z = qber_z;
    c.block_size = n_z;
    return c;
}

std::vector<KeyBlockRow> read_block_counts_csv(std::istream& is) {
    std::vector<KeyBlockRow> rows;
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("block-counts CSV is empty");
    const auto header = split_csv(line);
    if (header.size() != 9 || header[0] != "t_s") {
        throw ConfigError(
            "block-counts CSV header must be t_s,block_s,n_z_mu,n_z_nu,n_x_mu,n_x_nu,m_x_mu,m_x_nu,qber_z");
    }
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto cells = split_csv(line);
        if (cells.size() != 9) {
            throw ConfigError("block-counts CSV line " + std::to_string(line_no) +
                              " has " + std::to_string(cells.size()) + " fields, expected 9");
        }
        double v[9];
        try {
            for (int i = 0; i < 9; ++i) v[i] = std::stod(cells[i]);
        } catch (const std::exception&) {
            throw ConfigError("block-counts CSV line " + std::to_string(line_no) +
                              " contains a non-numeric field");
        }
        KeyBlockRow row;
        row.t_s = v[0];
        row.block_s = v[1];
        row.counts.n_z_mu = v[2];
        row.counts.n_z_nu = v[3];
        row.counts.n_x_mu = v[4];
        row.counts.n_x_nu = v[5];
        row.counts.m_x_mu = v[6];
        row.counts.m_x_nu = v[7];
        row.counts.qber_z = v[8];
        row.counts.block_size = row.counts.n_z();
        row.counts.validate();
        rows.push_back(row);
    }
    return rows;
}

void write_block_counts_csv(std::ostream& os, const std::vector<KeyBlockRow>& rows) {
    os << "t_s,block_s,n_z_mu,n_z_nu,n_x_mu,n_x_nu,m_x_mu,m_x_nu,qber_z\n";
    for (const auto& r : rows) {
        const auto& c = r.counts;
        os << r.t_s << ',' << r.block_s << ',' << c.n_z_mu << ',' << c.n_z_nu << ',' << c.n_x_mu
           << ',' << c.n_x_nu << ',' << c.m_x_mu << ',' << c.m_x_nu << ',' << c.qber_z << '\n';
    }
}

void write_key_length_csv(std::ostream& os, const std::vector<KeyBlockRow>& rows,
                          const DecoyLevels& levels, const SecurityParams& sec) {
    os << "t_s,key_bits,skr_bps\n";
    for (const auto& r : rows) {
        const double bits = secret_key_length(r.counts, levels, sec);
        os << r.t_s << ',' << bits << ',' << (r.block_s > 0.0 ? bits / r.block_s : 0.0) << '\n';
    }
}

}  // namespace maczac
