#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "edmcoh/edm.hpp"
#include "edmcoh/linalg.hpp"
#include "edmcoh/matrix.hpp"

namespace edmc {

/// Exact subspace coherence of an EDM plus the quantities the proof chain
/// bounds: the smallest Gramian eigenvalue from the QR construction and the
/// smallest constant achieving the joint-coherence inequality with equality.
struct CoherenceReport {
    double mu_u = 0.0;      // coherence of the column space
    double mu_u_pm = 0.0;   // coherence of the row space (sign-flipped vectors)
    double mu1_emp = 0.0;   // smallest mu1 satisfying the max-entry condition
    std::optional<double> sigma_min_sq_a;   // lambda_min(A'A), QR path only
    std::optional<double> mu_bound_chain;   // (N/r) max|X_i|^2 / sigma_min^2(A)
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t effective_rank = 0;
};

namespace detail {

/// max_ij |sum_k s_k U(i,k) U(j,k)| * N / sqrt(r) — the smallest constant
/// for which the max-entry inequality holds with equality on this matrix.
inline double mu1_empirical(const Matrix& u, const std::vector<int>& signs,
                            std::size_t r, std::size_t n) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < r; ++k)
                s += static_cast<double>(signs[k]) * u(i, k) * u(j, k);
            best = std::max(best, std::abs(s));
        }
    return best * static_cast<double>(n) / std::sqrt(static_cast<double>(r));
}

}  // namespace detail

/// Coherence through the structural factorization: thin QR of the basis
/// X = [1 p |p|^2], mu from V's row norms (row norms are invariant under the
/// orthogonal rotation Q, so no eigendecomposition is needed for mu itself).
/// The sign structure for mu1 comes from the small eigenproblem A D A'.
inline CoherenceReport coherence_qr_path(const NodeCloud& cloud) {
    const std::size_t n = cloud.n(), d = cloud.dim(), k = d + 2;
    const EdmFactorization f = factor_edm(cloud);
    const QrThin qr = thin_qr(f.x);
    if (qr.rank_deficient)
        throw std::runtime_error(
            "coherence_qr_path: factor basis X is rank deficient (degenerate cloud)");

    CoherenceReport rep;
    rep.n = n;
    rep.d = d;
    rep.effective_rank = k;

    double max_v = 0.0, max_x = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        max_v = std::max(max_v, qr.v.row_norm_sq(i));
        max_x = std::max(max_x, f.x.row_norm_sq(i));
    }
    rep.mu_u = static_cast<double>(n) / static_cast<double>(k) * max_v;
    rep.mu_u_pm = rep.mu_u;  // row norms of U*sign equal row norms of U

    // sigma_min^2(A) = lambda_min(A'A)
    const SymEig gram = eig_sym(at_times_b(qr.a, qr.a));
    double lam_min = gram.eigvals.front();
    for (double v : gram.eigvals) lam_min = std::min(lam_min, v);
    rep.sigma_min_sq_a = lam_min;
    rep.mu_bound_chain =
        static_cast<double>(n) / static_cast<double>(k) * max_x / lam_min;

    // reconstructed SVD: U = V Q with A D A' = Q Lam Q'
    const Matrix adat = qr.a * f.d * qr.a.transposed();
    const SymEig se = eig_sym(adat);
    const Matrix u = qr.v * se.eigvecs;
    std::vector<int> signs(k);
    for (std::size_t i = 0; i < k; ++i) signs[i] = se.eigvals[i] >= 0.0 ? 1 : -1;
    rep.mu1_emp = detail::mu1_empirical(u, signs, k, n);
    return rep;
}

/// Coherence straight from the truncated symmetric SVD of the EDM. Coherence
/// is computed with r = effective rank so degenerate (e.g. collinear) clouds
/// still get a meaningful value; rank above d+2 is rejected as corrupt input.
inline CoherenceReport coherence_svd_path(const EdmMatrix& edm, std::size_t d,
                                          double rank_rel_tol = 1e-10) {
    const std::size_t n = edm.n(), k = std::min(n, d + 2);
    // exact low rank makes subspace iteration converge to machine precision
    // in a few steps, so the tight tolerance is cheap
    const TruncatedSymSvd svd = svd_sym_truncated(edm.entries, std::min(n, d + 3), 1e-12);
    const double sigma1 = svd.sigma.front();

    if (n > d + 2 && svd.sigma[d + 2] > rank_rel_tol * sigma1)
        throw std::runtime_error(
            "coherence_svd_path: effective rank exceeds d+2 (input is not an EDM of "
            "d-dimensional points)");

    std::size_t r = 0;
    for (std::size_t i = 0; i < k; ++i)
        if (svd.sigma[i] > rank_rel_tol * sigma1) ++r;
    if (r == 0) throw std::runtime_error("coherence_svd_path: zero matrix");

    CoherenceReport rep;
    rep.n = n;
    rep.d = d;
    rep.effective_rank = r;

    double max_u = 0.0, max_upm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double su = 0.0, spm = 0.0;
        for (std::size_t j = 0; j < r; ++j) {
            const double v = svd.u(i, j);
            su += v * v;
            const double w = static_cast<double>(svd.signs[j]) * v;
            spm += w * w;
        }
        max_u = std::max(max_u, su);
        max_upm = std::max(max_upm, spm);
    }
    rep.mu_u = static_cast<double>(n) / static_cast<double>(r) * max_u;
    rep.mu_u_pm = static_cast<double>(n) / static_cast<double>(r) * max_upm;
    rep.mu1_emp = detail::mu1_empirical(svd.u, svd.signs, r, n);
    return rep;
}

}  // namespace edmc
