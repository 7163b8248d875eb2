#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>

#include "edmcoh/distributions.hpp"
#include "edmcoh/linalg.hpp"
#include "edmcoh/matrix.hpp"

namespace edmc {

// ---------------------------------------------------------------------------
// The expected Gramian R_d and its spectrum
// ---------------------------------------------------------------------------

/// Expected Gramian of a single structural row [1, p', |p|^2]:
///   [ 1        0        d m2                    ]
///   [ 0        m2 I_d   m3 1                    ]
///   [ d m2     m3 1'    d(m4 - m2^2) + d^2 m2^2 ]
inline Matrix build_rd(const MomentSet& m, std::size_t d) {
    m.validate();
    if (d < 1) throw std::invalid_argument("build_rd: d must be >= 1");
    const std::size_t k = d + 2;
    Matrix r(k, k);
    r(0, 0) = 1.0;
    r(0, k - 1) = r(k - 1, 0) = static_cast<double>(d) * m.m2;
    for (std::size_t i = 1; i <= d; ++i) {
        r(i, i) = m.m2;
        r(i, k - 1) = r(k - 1, i) = m.m3;
    }
    r(k - 1, k - 1) = static_cast<double>(d) * (m.m4 - m.m2 * m.m2) +
                      static_cast<double>(d) * static_cast<double>(d) * m.m2 * m.m2;
    return r;
}

/// Coefficients of the cubic factor of det(R_d - lambda I); the remaining
/// factor is (m2 - lambda)^(d-1).
inline CubicCoeffs cubic_coeffs(const MomentSet& m, std::size_t d) {
    m.validate();
    const double dd = static_cast<double>(d);
    const double m2 = m.m2, m3 = m.m3, m4 = m.m4;
    CubicCoeffs c;
    c.a0 = (m4 * m2 - m2 * m2 * m2 - m3 * m3) * dd;
    c.a1 = -m2 * m2 * m2 * dd * dd +
           (m2 * m2 * m2 + m3 * m3 + m2 * m2 - m4 - m4 * m2) * dd - m2;
    c.a2 = m2 * m2 * dd * dd + (m4 - m2 * m2) * dd + m2 + 1.0;
    c.a3 = -1.0;
    return c;
}

/// min of the three cubic roots and m2 — the smallest eigenvalue of R_d.
/// Positive definiteness is asserted with a 1e-14 floor rather than trusted.
inline double lambda_star_general(const MomentSet& m, std::size_t d) {
    const auto roots = cubic_real_roots(cubic_coeffs(m, d));
    double lam = m.m2;
    for (double r : roots) {
        if (r <= 1e-14)
            throw std::domain_error(
                "lambda_star_general: R_d numerically singular (degenerate moments)");
        lam = std::min(lam, r);
    }
    return lam;
}

/// Symmetric-law (m3 = 0) closed form. Note this lambda* equals twice the
/// block eigenvalue; the doubled numerator in the matching theta cancels it.
inline double lambda_star_symmetric(const MomentSet& m, std::size_t d) {
    m.validate();
    if (std::abs(m.m3) > 1e-12)
        throw std::invalid_argument(
            "lambda_star_symmetric: m3 != 0, use the general path");
    const double dd = static_cast<double>(d);
    const double zeta = dd * (m.m4 - m.m2 * m.m2) + dd * dd * m.m2 * m.m2 + 1.0;
    const double disc = zeta * zeta - 4.0 * dd * (m.m4 - m.m2 * m.m2);
    const double lam = std::min(zeta - std::sqrt(std::max(disc, 0.0)), 2.0 * m.m2);
    if (lam <= 1e-14)
        throw std::domain_error(
            "lambda_star_symmetric: R_d numerically singular (degenerate moments)");
    return lam;
}

inline double theta_general(const MomentSet& m, std::size_t d) {
    const double dd = static_cast<double>(d);
    const double c2 = m.c * m.c;
    return (1.0 + dd * c2 + dd * dd * c2 * c2) / lambda_star_general(m, d);
}

inline double theta_symmetric(const MomentSet& m, std::size_t d) {
    const double dd = static_cast<double>(d);
    const double c2 = m.c * m.c;
    return 2.0 * (1.0 + dd * c2 + dd * dd * c2 * c2) / lambda_star_symmetric(m, d);
}

/// Closed form for coordinates uniform on [-1, 1].
inline double corollary1_theta(std::size_t d) {
    if (d < 1) throw std::invalid_argument("corollary1_theta: d must be >= 1");
    const double dd = static_cast<double>(d);
    const double zeta = 5.0 * dd * dd + 4.0 * dd + 45.0;
    return 90.0 * (1.0 + dd + dd * dd) /
           (zeta - std::sqrt(zeta * zeta - 720.0 * dd));
}

// ---------------------------------------------------------------------------
// Sample counts and failure probabilities
// ---------------------------------------------------------------------------

/// Smallest N with N >= 2 theta (ln(d+2) - ln(gamma)) / (1-t)^2.
inline long min_nodes(double theta, std::size_t d, double t, double gamma) {
    if (t >= 1.0) throw std::domain_error("min_nodes: unbounded at t = 1");
    if (gamma <= 0.0) throw std::domain_error("min_nodes: unbounded at gamma = 0");
    if (t < 0.0 || gamma > 1.0) throw std::invalid_argument("min_nodes: t in [0,1), gamma in (0,1]");
    const double bound = 2.0 * theta *
                         (std::log(static_cast<double>(d) + 2.0) - std::log(gamma)) /
                         ((1.0 - t) * (1.0 - t));
    return static_cast<long>(std::ceil(std::max(bound, 0.0)));
}

struct ChernoffFailure {
    double eps = 0.0;  // (d+2) exp(-N (1-t)^2 / (2 theta)), may exceed 1
    bool vacuous = false;
};

inline ChernoffFailure chernoff_failure(double theta, std::size_t d, double t, long n) {
    ChernoffFailure out;
    out.eps = (static_cast<double>(d) + 2.0) *
              std::exp(-static_cast<double>(n) * (1.0 - t) * (1.0 - t) / (2.0 * theta));
    out.vacuous = out.eps > 1.0;
    return out;
}

/// Completion sample counts from the external recovery theorem. The
/// literature never pins the universal constant, so C is an input and any
/// bound above N^2 is flagged vacuous instead of silently reported.
struct SampleComplexity {
    double m_general = 0.0;
    bool general_vacuous = false;
    std::optional<double> m_improved;  // empty when r > N^(1/5)/mu0
    bool improved_vacuous = false;
};

inline SampleComplexity sample_complexity(double mu0, double mu1, long n, std::size_t r,
                                          double beta, double big_c) {
    if (!(mu0 > 0.0 && mu1 > 0.0 && n > 0 && r > 0 && big_c > 0.0))
        throw std::invalid_argument("sample_complexity: parameters must be positive");
    if (!(beta > 2.0)) throw std::invalid_argument("sample_complexity: beta must be > 2");
    const double nn = static_cast<double>(n);
    const double rr = static_cast<double>(r);
    const double logn = std::log(nn);

    SampleComplexity out;
    const double lead =
        std::max({mu1 * mu1, std::sqrt(mu0) * mu1, mu0 * std::pow(nn, 0.25)});
    out.m_general = std::ceil(big_c * lead * nn * rr * beta * logn);
    out.general_vacuous = out.m_general > nn * nn;

    if (rr <= std::pow(nn, 0.2) / mu0) {
        out.m_improved = std::ceil(big_c * mu0 * std::pow(nn, 1.2) * rr * beta * logn);
        out.improved_vacuous = *out.m_improved > nn * nn;
    }
    return out;
}

/// The prior-work matrix is R_d at uniform[-1,1] moments; its smallest
/// eigenvalue was claimed to be 1/3, which the gap column refutes.
struct PriorWorkCheck {
    double lambda_min = 0.0;
    double gap_from_third = 0.0;
};

inline PriorWorkCheck prior_work_lambda_min(std::size_t d) {
    const MomentSet uniform_m{1.0 / 3.0, 0.0, 1.0 / 5.0, 1.0};
    const SymEig e = eig_sym(build_rd(uniform_m, d));
    double lam = e.eigvals.front();
    for (double v : e.eigvals) lam = std::min(lam, v);
    return {lam, std::abs(lam - 1.0 / 3.0)};
}

// ---------------------------------------------------------------------------
// Aggregate bounds
// ---------------------------------------------------------------------------

struct TheoryBounds {
    double lambda_star = 0.0;
    double theta = 0.0;
    double mu0 = 0.0;
    double mu1 = 0.0;
    long n_min = 0;
    std::optional<ChernoffFailure> eps_t;  // at the supplied N, when given
    std::optional<SampleComplexity> samples;
};

inline TheoryBounds compute_bounds(const MomentSet& m, std::size_t d, double t,
                                   double gamma, std::optional<long> n = {},
                                   double beta = 3.0, double big_c = 1.0) {
    if (t < 0.0 || t > 1.0) throw std::invalid_argument("compute_bounds: t in [0,1]");
    if (gamma < 0.0 || gamma > 1.0)
        throw std::invalid_argument("compute_bounds: gamma in [0,1]");
    TheoryBounds b;
    b.lambda_star = lambda_star_general(m, d);
    const double dd = static_cast<double>(d);
    const double c2 = m.c * m.c;
    b.theta = (1.0 + dd * c2 + dd * dd * c2 * c2) / b.lambda_star;
    b.mu0 = b.theta / (t * (dd + 2.0));            // inf at t = 0, by design
    b.mu1 = b.mu0 * std::sqrt(dd + 2.0);
    b.n_min = min_nodes(b.theta, d, t, gamma);
    const long n_eff = n.value_or(b.n_min);
    b.eps_t = chernoff_failure(b.theta, d, t, n_eff);
    if (n && std::isfinite(b.mu0))
        b.samples = sample_complexity(b.mu0, b.mu1, *n, d + 2, beta, big_c);
    return b;
}

}  // namespace edmc
