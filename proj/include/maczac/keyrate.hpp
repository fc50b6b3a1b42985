#pragma once

#include <iosfwd>
#include <vector>

#include "maczac/protocol.hpp"

namespace maczac {

/// Detection statistics of one post-processing block. Counts are doubles so
/// that expected (fractional) counts can be fed in as well as tallies.
struct BlockCounts {
    double n_z_mu = 0.0;
    double n_z_nu = 0.0;
    double m_x_mu = 0.0;
    double m_x_nu = 0.0;
    double n_x_mu = 0.0;
    double n_x_nu = 0.0;
    double qber_z = 0.0;
    double block_size = 0.0;  // sifted key bits, n_z_mu + n_z_nu

    double n_z() const { return n_z_mu + n_z_nu; }
    double n_x() const { return n_x_mu + n_x_nu; }
    double m_x() const { return m_x_mu + m_x_nu; }
    void validate() const;
};

struct SecurityParams {
    double eps_sec = 1e-9;
    double eps_corr = 1e-12;
    double f_ec = 1.16;

    void validate() const;
};

struct DecoyBounds {
    double s_z0_lower = 0.0;
    double s_z1_lower = 0.0;
    double phi_z_upper = 0.5;
    double s_x1_lower = 0.0;
    double v_x1_upper = 0.0;
    /// False when the single-photon bounds collapse and no key can be
    /// extracted from this block.
    bool usable = false;
};

double binary_entropy(double x);

/// One-decoy finite-key bounds (vacuum and single-photon events in Z, phase
/// error rate of the single-photon Z events).
DecoyBounds decoy_bounds(const BlockCounts& counts, const DecoyLevels& levels,
                         const SecurityParams& sec);

/// 6 log2(19 / eps_sec) + log2(2 / eps_corr).
double security_penalty(const SecurityParams& sec);

/// Bits disclosed by error correction, f_ec * n_Z * h(QBER_Z).
double error_correction_leak(const BlockCounts& counts, const SecurityParams& sec);

/// Secret key length of one block, clamped at zero.
double secret_key_length(const BlockCounts& counts, const DecoyLevels& levels,
                         const SecurityParams& sec);

/// Expected block counts from average rates. Counts are split between the two
/// intensities in proportion to p_k (1 - exp(-k eta)).
BlockCounts block_counts_from_rates(double sifted_bps, double x_conclusive_hz, double qber_z,
                                    double qber_x, double block_seconds,
                                    const DecoyLevels& levels, double eta);

struct KeyBlockRow {
    double t_s = 0.0;
    double block_s = 0.0;
    BlockCounts counts;
};

/// Block-counts CSV: t_s,block_s,n_z_mu,n_z_nu,n_x_mu,n_x_nu,m_x_mu,m_x_nu,qber_z
std::vector<KeyBlockRow> read_block_counts_csv(std::istream& is);
void write_block_counts_csv(std::ostream& os, const std::vector<KeyBlockRow>& rows);

/// Key-length CSV: t_s,key_bits,skr_bps
void write_key_length_csv(std::ostream& os, const std::vector<KeyBlockRow>& rows,
                          const DecoyLevels& levels, const SecurityParams& sec);

}  // namespace maczac
