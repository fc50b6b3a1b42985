#pragma once

// Reference implementations used only by the tests. They are written from
// the physics directly and do not call into the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>

namespace oracle {

using cd = std::complex<double>;
constexpr cd I{0.0, 1.0};

/// Output amplitudes (early, late) of the qubit encoder, obtained by summing
/// the four optical paths explicitly. Every reflection contributes i; the
/// CW pass carries phi_c, the CCW pass carries phi_e / phi_l per time bin.
inline std::array<cd, 2> path_sum(double t1, double t2, double t3, double phi_c, double phi_e,
                                  double phi_l, double omega_tau = 0.0) {
    const double r1 = 1 - t1, r2 = 1 - t2, r3 = 1 - t3;
    const cd t1a = std::sqrt(t1), r1a = I * std::sqrt(r1);
    const cd early_mz = std::sqrt(t2) * std::sqrt(t3);
    const cd late_mz = (I * std::sqrt(r2)) * (I * std::sqrt(r3)) * std::exp(I * omega_tau);
    // Entering through the transmitted port of BS1 (CW) and leaving through
    // the transmitted port again; entering reflected (CCW) and leaving reflected.
    const cd cw_e = t1a * early_mz * std::exp(I * phi_c) * t1a;
    const cd cw_l = t1a * late_mz * std::exp(I * phi_c) * t1a;
    const cd ccw_e = r1a * early_mz * std::exp(I * phi_e) * r1a;
    const cd ccw_l = r1a * late_mz * std::exp(I * phi_l) * r1a;
    return {cw_e + ccw_e, cw_l + ccw_l};
}

/// General transmittance written as |sqrt(T2 T3)|^2 |T1 e^{i phi_c} - R1 e^{i phi_e}|^2.
inline double general_t(double t1, double t23, double phi_c, double phi_k) {
    const cd a = t1 * std::exp(I * phi_c) - (1 - t1) * std::exp(I * phi_k);
    return t23 * std::norm(a);
}

/// sin^2(a_nu / 2) = (nu / mu) sin^2(a_mu / 2) via cos a = 1 - 2 sin^2(a / 2).
inline double alpha_nu(double alpha_mu, double ratio) {
    const double s2 = ratio * std::pow(std::sin(alpha_mu / 2), 2);
    return std::acos(1 - 2 * s2);
}

inline double beta(double alpha, int d) {
    const double s2 = std::pow(std::sin(alpha / 2), 2) / d;
    return std::acos(1 - 2 * s2);
}

inline double h2(double x) {
    if (x <= 0 || x >= 1) return 0.0;
    return -x * std::log2(x) - (1 - x) * std::log2(1 - x);
}

struct KeyInputs {
    double mu, nu, p_mu;
    double nz_mu, nz_nu, nx_mu, nx_nu, mx_mu, mx_nu, qber_z;
    double eps_sec, eps_corr, f_ec;
};

struct KeyOutputs {
    double s0, s1, phi, length;
    bool usable;
};

/// One-decoy finite-key length, transcribed term by term with every
/// intermediate spelled out.
inline KeyOutputs one_decoy(const KeyInputs& in) {
    const double L = std::log(19.0 / in.eps_sec);
    const double pn = 1 - in.p_mu;
    const double em = std::exp(in.mu), en = std::exp(in.nu);
    const double tau0 = in.p_mu * std::exp(-in.mu) + pn * std::exp(-in.nu);
    const double tau1 = in.p_mu * std::exp(-in.mu) * in.mu + pn * std::exp(-in.nu) * in.nu;

    auto bounds = [&](double c_mu, double c_nu, double& up_mu, double& lo_mu, double& up_nu,
                      double& lo_nu) {
        const double dev = std::sqrt((c_mu + c_nu) / 2 * L);
        up_mu = em / in.p_mu * (c_mu + dev);
        lo_mu = std::max(0.0, em / in.p_mu * (c_mu - dev));
        up_nu = en / pn * (c_nu + dev);
        lo_nu = std::max(0.0, en / pn * (c_nu - dev));
    };

    double nzp_mu, nzm_mu, nzp_nu, nzm_nu;
    bounds(in.nz_mu, in.nz_nu, nzp_mu, nzm_mu, nzp_nu, nzm_nu);
    double mzp_mu, mzm_mu, mzp_nu, mzm_nu;
    bounds(in.qber_z * in.nz_mu, in.qber_z * in.nz_nu, mzp_mu, mzm_mu, mzp_nu, mzm_nu);
    double nxp_mu, nxm_mu, nxp_nu, nxm_nu;
    bounds(in.nx_mu, in.nx_nu, nxp_mu, nxm_mu, nxp_nu, nxm_nu);
    double mxp_mu, mxm_mu, mxp_nu, mxm_nu;
    bounds(in.mx_mu, in.mx_nu, mxp_mu, mxm_mu, mxp_nu, mxm_nu);

    const double nz = in.nz_mu + in.nz_nu;
    const double nx = in.nx_mu + in.nx_nu;
    const double d = in.mu - in.nu;

    const double s0u_z = 2 * tau0 * mzp_nu;
    const double s0l_z = std::min(nz, std::max(0.0, tau0 / d * (in.mu * nzm_nu - in.nu * nzp_mu)));
    double s1_z = in.mu * tau1 / (in.nu * d) *
                  (nzm_nu - in.nu * in.nu / (in.mu * in.mu) * nzp_mu -
                   (in.mu * in.mu - in.nu * in.nu) / (in.mu * in.mu) * s0u_z / tau0);
    s1_z = std::min(s1_z, nz - s0l_z);

    const double s0u_x = 2 * tau0 * mxp_nu;
    double s1_x = in.mu * tau1 / (in.nu * d) *
                  (nxm_nu - in.nu * in.nu / (in.mu * in.mu) * nxp_mu -
                   (in.mu * in.mu - in.nu * in.nu) / (in.mu * in.mu) * s0u_x / tau0);
    s1_x = std::min(s1_x, nx);
    const double v1 = tau1 / d * (mxp_mu - mxm_nu);

    KeyOutputs out{s0l_z, std::max(0.0, s1_z), 0.5, 0.0, false};
    if (s1_z <= 0 || s1_x <= 0) return out;
    const double b = std::clamp(v1 / s1_x, 0.0, 0.5);
    double gamma = 0.0;
    if (b > 0 && b < 0.5) {
        const double c = s1_z, dd = s1_x;
        const double arg = (c + dd) / (c * dd * (1 - b) * b) * 19.0 * 19.0 /
                           (in.eps_sec * in.eps_sec);
        const double lg = std::log2(arg);
        if (lg > 0) gamma = std::sqrt((c + dd) * (1 - b) * b / (c * dd * std::log(2.0)) * lg);
    }
    out.phi = std::min(0.5, b + gamma);
    out.usable = out.phi < 0.5;
    if (!out.usable) return out;
    const double l = s0l_z + s1_z * (1 - h2(out.phi)) - in.f_ec * nz * h2(in.qber_z) -
                     6 * std::log2(19.0 / in.eps_sec) - std::log2(2.0 / in.eps_corr);
    out.length = std::max(0.0, l);
    return out;
}

}  // namespace oracle
