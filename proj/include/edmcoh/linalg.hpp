#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "edmcoh/matrix.hpp"
#include "edmcoh/rng.hpp"

namespace edmc {

// ---------------------------------------------------------------------------
// Thin QR (Householder)
// ---------------------------------------------------------------------------

struct QrThin {
    Matrix v;  // N x k, orthonormal columns
    Matrix a;  // k x k, upper triangular, nonnegative diagonal
    bool rank_deficient = false;
};

/// Householder thin QR of a tall matrix. The diagonal of A is made
/// nonnegative by flipping signs; a diagonal entry below 1e-13 * |M|_F
/// raises the rank_deficient flag but the factorization is still returned.
inline QrThin thin_qr(const Matrix& m) {
    const std::size_t n = m.rows(), k = m.cols();
    if (n < k) throw std::invalid_argument("thin_qr: matrix must be tall (N >= k)");

    Matrix r = m;                                   // reduced in place
    std::vector<std::vector<double>> reflectors;    // Householder vectors
    reflectors.reserve(k);

    for (std::size_t j = 0; j < k; ++j) {
        double norm = 0.0;
        for (std::size_t i = j; i < n; ++i) norm += r(i, j) * r(i, j);
        norm = std::sqrt(norm);

        std::vector<double> w(n - j, 0.0);
        if (norm > 0.0) {
            const double alpha = (r(j, j) >= 0.0) ? -norm : norm;
            for (std::size_t i = j; i < n; ++i) w[i - j] = r(i, j);
            w[0] -= alpha;
            double wn = 0.0;
            for (double x : w) wn += x * x;
            wn = std::sqrt(wn);
            if (wn > 0.0) {
                for (double& x : w) x /= wn;
                // apply I - 2ww' to the trailing columns
                for (std::size_t c = j; c < k; ++c) {
                    double dot = 0.0;
                    for (std::size_t i = j; i < n; ++i) dot += w[i - j] * r(i, c);
                    for (std::size_t i = j; i < n; ++i) r(i, c) -= 2.0 * dot * w[i - j];
                }
            }
        }
        reflectors.push_back(std::move(w));
    }

    // Accumulate V = Q_1..Q_k applied to the first k columns of I.
    Matrix v(n, k);
    for (std::size_t j = 0; j < k; ++j) v(j, j) = 1.0;
    for (std::size_t jr = k; jr-- > 0;) {
        const std::vector<double>& w = reflectors[jr];
        for (std::size_t c = 0; c < k; ++c) {
            double dot = 0.0;
            for (std::size_t i = jr; i < n; ++i) dot += w[i - jr] * v(i, c);
            for (std::size_t i = jr; i < n; ++i) v(i, c) -= 2.0 * dot * w[i - jr];
        }
    }

    QrThin out;
    out.a = Matrix(k, k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) out.a(i, j) = r(i, j);

    // sign convention: nonnegative diagonal of A
    for (std::size_t i = 0; i < k; ++i) {
        if (out.a(i, i) < 0.0) {
            for (std::size_t j = i; j < k; ++j) out.a(i, j) = -out.a(i, j);
            for (std::size_t row = 0; row < n; ++row) v(row, i) = -v(row, i);
        }
    }
    out.v = std::move(v);

    const double scale = m.frobenius();
    for (std::size_t i = 0; i < k; ++i)
        if (out.a(i, i) < 1e-13 * scale) out.rank_deficient = true;
    return out;
}

// ---------------------------------------------------------------------------
// Symmetric eigendecomposition (cyclic Jacobi)
// ---------------------------------------------------------------------------

struct SymEig {
    std::vector<double> eigvals;  // sorted by decreasing |value|
    Matrix eigvecs;               // columns paired with eigvals
};

/// Cyclic Jacobi on a (symmetrized) matrix. Sweeps until every off-diagonal
/// magnitude is <= 1e-14 * |S|_F, at most 30 sweeps.
inline SymEig eig_sym(const Matrix& s_in) {
    if (s_in.rows() != s_in.cols()) throw std::invalid_argument("eig_sym: matrix not square");
    const std::size_t n = s_in.rows();

    Matrix a(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (s_in(i, j) + s_in(j, i));

    Matrix q = Matrix::identity(n);
    const double thresh = 1e-14 * a.frobenius();

    auto max_offdiag = [&]() {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) m = std::max(m, std::abs(a(i, j)));
        return m;
    };

    int sweep = 0;
    while (max_offdiag() > thresh) {
        if (++sweep > 30)
            throw std::runtime_error("eig_sym: Jacobi failed to converge in 30 sweeps");
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t qq = p + 1; qq < n; ++qq) {
                const double apq = a(p, qq);
                if (std::abs(apq) <= thresh * 1e-2) continue;
                const double tau = (a(qq, qq) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(tau) + std::sqrt(tau * tau + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, qq);
                    a(i, p) = c * aip - sn * aiq;
                    a(i, qq) = sn * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(qq, i);
                    a(p, i) = c * api - sn * aqi;
                    a(qq, i) = sn * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double qip = q(i, p), qiq = q(i, qq);
                    q(i, p) = c * qip - sn * qiq;
                    q(i, qq) = sn * qip + c * qiq;
                }
            }
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(a(x, x)) > std::abs(a(y, y));
    });

    SymEig out;
    out.eigvals.resize(n);
    out.eigvecs = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.eigvals[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.eigvecs(i, j) = q(i, order[j]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Truncated SVD of a symmetric matrix (blocked subspace iteration)
// ---------------------------------------------------------------------------

struct TruncatedSymSvd {
    std::vector<double> sigma;  // k singular values, decreasing
    Matrix u;                   // N x k left singular vectors
    std::vector<int> signs;     // right vectors are u_i * signs[i]
};

/// Top-k eigenpairs of a symmetric matrix by magnitude, via subspace
/// iteration with a block of k+2 and Rayleigh-Ritz extraction. Iterates
/// until every wanted Ritz residual |S v - theta v| is below
/// rel_tol * sigma_1 (default 1e-10), at most max_iter iterations.
/// Singular values are |eigenvalues|; the right singular vectors are the
/// left ones times the eigenvalue signs.
inline TruncatedSymSvd svd_sym_truncated(const Matrix& s, std::size_t k,
                                         double rel_tol = 1e-10, int max_iter = 500,
                                         const Matrix* warm_start = nullptr,
                                         bool strict = true) {
    if (s.rows() != s.cols()) throw std::invalid_argument("svd_sym_truncated: not square");
    const std::size_t n = s.rows();
    if (k > n) throw std::invalid_argument("svd_sym_truncated: k > N");
    if (k == 0) return {};

    const std::size_t b = std::min(n, k + 2);
    Matrix v(n, b);
    if (warm_start && warm_start->rows() == n) {
        const std::size_t wc = std::min(b, warm_start->cols());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < wc; ++j) v(i, j) = (*warm_start)(i, j);
        for (std::size_t j = warm_start->cols(); j < b; ++j)
            for (std::size_t i = 0; i < n; ++i)
                v(i, j) = uniform01(0xC0FFEEULL, i * b + j) - 0.5;
    } else {
        // fixed deterministic start
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < b; ++j)
                v(i, j) = uniform01(0xC0FFEEULL, i * b + j) - 0.5;
    }
    v = thin_qr(v).v;

    Matrix ritz(n, b);
    std::vector<double> theta(b, 0.0);
    double max_resid = 0.0;

    for (int it = 0; it < max_iter; ++it) {
        Matrix w = s * v;                    // N x b
        Matrix t = at_times_b(v, w);         // b x b Rayleigh quotient
        SymEig small = eig_sym(t);
        ritz = v * small.eigvecs;            // Ritz vectors, |theta| decreasing
        theta = small.eigvals;

        Matrix sr = s * ritz;
        const double sigma1 = std::max(std::abs(theta[0]), 1e-300);
        max_resid = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double r2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = sr(i, j) - theta[j] * ritz(i, j);
                r2 += r * r;
            }
            max_resid = std::max(max_resid, std::sqrt(r2));
        }
        if (max_resid <= rel_tol * sigma1) break;
        if (it == max_iter - 1) {
            if (strict)
                throw std::runtime_error(
                    "svd_sym_truncated: no convergence after " + std::to_string(max_iter) +
                    " iterations (residual " + std::to_string(max_resid) + ")");
            break;  // best effort
        }
        v = thin_qr(sr).v;                   // next subspace: orth(S * ritz)
    }

    TruncatedSymSvd out;
    out.sigma.resize(k);
    out.signs.resize(k);
    out.u = Matrix(n, k);
    for (std::size_t j = 0; j < k; ++j) {
        out.sigma[j] = std::abs(theta[j]);
        out.signs[j] = theta[j] >= 0.0 ? 1 : -1;
        for (std::size_t i = 0; i < n; ++i) out.u(i, j) = ritz(i, j);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Truncated SVD of a general square matrix (for asymmetric sampling masks)
// ---------------------------------------------------------------------------

struct TruncatedSvd {
    std::vector<double> sigma;
    Matrix u;  // N x k
    Matrix v;  // N x k
};

/// Subspace iteration on S'S with Rayleigh-Ritz; u recovered as S v / sigma.
inline TruncatedSvd svd_truncated(const Matrix& s, std::size_t k,
                                  double rel_tol = 1e-10, int max_iter = 500,
                                  const Matrix* warm_start = nullptr,
                                  bool strict = true) {
    const std::size_t n = s.rows();
    if (s.cols() != n) throw std::invalid_argument("svd_truncated: not square");
    if (k > n) throw std::invalid_argument("svd_truncated: k > N");
    if (k == 0) return {};

    const std::size_t b = std::min(n, k + 2);
    Matrix v(n, b);
    if (warm_start && warm_start->rows() == n) {
        const std::size_t wc = std::min(b, warm_start->cols());
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < wc; ++j) v(i, j) = (*warm_start)(i, j);
        for (std::size_t j = wc; j < b; ++j)
            for (std::size_t i = 0; i < n; ++i)
                v(i, j) = uniform01(0xBEEFULL, i * b + j) - 0.5;
    } else {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < b; ++j)
                v(i, j) = uniform01(0xBEEFULL, i * b + j) - 0.5;
    }
    v = thin_qr(v).v;

    Matrix ritz(n, b);
    std::vector<double> lam(b, 0.0);  // eigenvalues of S'S

    for (int it = 0; it < max_iter; ++it) {
        Matrix sv = s * v;
        Matrix w = at_times_b(s, sv);        // S'S v
        Matrix t = at_times_b(v, w);
        SymEig small = eig_sym(t);
        ritz = v * small.eigvecs;
        lam = small.eigvals;

        Matrix sritz = s * ritz;
        Matrix wr = at_times_b(s, sritz);
        const double lam1 = std::max(std::abs(lam[0]), 1e-300);
        double max_resid = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            double r2 = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = wr(i, j) - lam[j] * ritz(i, j);
                r2 += r * r;
            }
            max_resid = std::max(max_resid, std::sqrt(r2));
        }
        if (max_resid <= rel_tol * lam1) break;
        if (it == max_iter - 1) {
            if (strict)
                throw std::runtime_error("svd_truncated: no convergence after " +
                                         std::to_string(max_iter) + " iterations");
            break;  // best effort
        }
        v = thin_qr(wr).v;
    }

    TruncatedSvd out;
    out.sigma.resize(k);
    out.v = Matrix(n, k);
    out.u = Matrix(n, k);
    Matrix sritz = s * ritz;
    for (std::size_t j = 0; j < k; ++j) {
        out.sigma[j] = std::sqrt(std::max(lam[j], 0.0));
        for (std::size_t i = 0; i < n; ++i) out.v(i, j) = ritz(i, j);
        const double inv = out.sigma[j] > 0.0 ? 1.0 / out.sigma[j] : 0.0;
        for (std::size_t i = 0; i < n; ++i) out.u(i, j) = sritz(i, j) * inv;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cubic with three real roots (trigonometric method)
// ---------------------------------------------------------------------------

struct CubicCoeffs {
    double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = -1.0;  // sum a_i * x^i
};

/// All three real roots of a0 + a1 x + a2 x^2 + a3 x^3 = 0, ascending.
/// Uses the trigonometric form (no complex intermediates) plus two Newton
/// polish steps per root. A genuinely negative discriminant (complex pair)
/// is an error: it signals an invalid moment set upstream.
inline std::array<double, 3> cubic_real_roots(const CubicCoeffs& c) {
    if (c.a3 == 0.0) throw std::invalid_argument("cubic_real_roots: a3 must be nonzero");
    const double b = c.a2 / c.a3, cc = c.a1 / c.a3, d = c.a0 / c.a3;

    // depressed cubic y^3 + p y + q with x = y - b/3
    const double p = cc - b * b / 3.0;
    const double q = 2.0 * b * b * b / 27.0 - b * cc / 3.0 + d;

    const double scale = std::max({std::abs(c.a0), std::abs(c.a1), std::abs(c.a2), std::abs(c.a3)});
    const double disc = -4.0 * p * p * p - 27.0 * q * q;
    if (disc < -1e-12 * scale * scale * scale)
        throw std::domain_error("cubic_real_roots: complex root pair (discriminant " +
                                std::to_string(disc) + ")");

    std::array<double, 3> y{};
    if (p >= -1e-300) {
        // p ~ 0: (near-)triple root
        const double r = std::cbrt(-q);
        y = {r, r, r};
    } else {
        const double m = 2.0 * std::sqrt(-p / 3.0);
        double arg = 3.0 * q / (p * m);  // = (3q / 2p) * sqrt(-3/p)
        arg = std::clamp(arg, -1.0, 1.0);
        const double phi = std::acos(arg) / 3.0;
        for (int kk = 0; kk < 3; ++kk)
            y[kk] = m * std::cos(phi - 2.0 * std::numbers::pi * kk / 3.0);
    }

    std::array<double, 3> roots{};
    for (int kk = 0; kk < 3; ++kk) {
        double x = y[kk] - b / 3.0;
        for (int step = 0; step < 2; ++step) {  // Newton polish
            const double f = ((c.a3 * x + c.a2) * x + c.a1) * x + c.a0;
            const double fp = (3.0 * c.a3 * x + 2.0 * c.a2) * x + c.a1;
            if (fp != 0.0) x -= f / fp;
        }
        roots[kk] = x;
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

}  // namespace edmc
