#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "edmcoh/linalg.hpp"
#include "edmcoh/matrix.hpp"

namespace edmc {

/// N points in R^d, one per row, plus the metadata needed to regenerate them.
struct NodeCloud {
    Matrix coords;  // N x d
    std::uint64_t seed = 0;
    std::string dist_id = "free-form";

    std::size_t n() const { return coords.rows(); }
    std::size_t dim() const { return coords.cols(); }
};

/// N x N matrix of pairwise squared distances.
struct EdmMatrix {
    Matrix entries;
    std::size_t n() const { return entries.rows(); }
};

/// Structural factorization of an EDM: row i of X is [1, p_i', |p_i|^2] and
/// D couples the constant and squared-norm columns while scaling the
/// coordinate block, so X D X' expands to |p_i|^2 + |p_j|^2 - 2 <p_i, p_j>:
///   [ 0      0   1 ]
///   [ 0  -2 I_d  0 ]
///   [ 1      0   0 ]
struct EdmFactorization {
    Matrix x;  // N x (d+2)
    Matrix d;  // (d+2) x (d+2), symmetric

    Matrix reconstruct() const { return x * d * x.transposed(); }
};

/// Squared distances computed as sums of squared coordinate gaps (not the
/// expanded inner-product form, which cancels catastrophically for close
/// nodes). Each unordered pair is computed once so symmetry is exact.
inline EdmMatrix build_edm(const NodeCloud& cloud) {
    const std::size_t n = cloud.n(), d = cloud.dim();
    if (n < 2) throw std::invalid_argument("build_edm: need at least 2 nodes");
    EdmMatrix edm{Matrix(n, n)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double g = cloud.coords(i, k) - cloud.coords(j, k);
                s += g * g;
            }
            edm.entries(i, j) = s;
            edm.entries(j, i) = s;
        }
    return edm;
}

inline EdmFactorization factor_edm(const NodeCloud& cloud) {
    const std::size_t n = cloud.n(), d = cloud.dim();
    if (n < 2) throw std::invalid_argument("factor_edm: need at least 2 nodes");
    EdmFactorization f;
    f.x = Matrix(n, d + 2);
    for (std::size_t i = 0; i < n; ++i) {
        f.x(i, 0) = 1.0;
        double nrm = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double v = cloud.coords(i, k);
            f.x(i, k + 1) = v;
            nrm += v * v;
        }
        f.x(i, d + 1) = nrm;
    }
    f.d = Matrix(d + 2, d + 2);
    f.d(0, d + 1) = f.d(d + 1, 0) = 1.0;
    for (std::size_t k = 1; k <= d; ++k) f.d(k, k) = -2.0;
    return f;
}

/// Count of eigenvalue magnitudes above rel_tol * sigma_1. All-zero input
/// has rank 0.
inline int numerical_rank(const EdmMatrix& edm, double rel_tol = 1e-10) {
    if (rel_tol <= 0.0 || rel_tol >= 1.0)
        throw std::invalid_argument("numerical_rank: rel_tol must be in (0,1)");
    if (edm.entries.max_abs() == 0.0) return 0;
    const SymEig e = eig_sym(edm.entries);
    const double sigma1 = std::abs(e.eigvals.front());
    int rank = 0;
    for (double v : e.eigvals)
        if (std::abs(v) > rel_tol * sigma1) ++rank;
    return rank;
}

}  // namespace edmc
