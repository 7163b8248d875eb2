#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "edmcoh/linalg.hpp"
#include "edmcoh/matrix.hpp"
#include "edmcoh/rng.hpp"

namespace edmc {

enum class MaskMode { AllEntries, SymmetricOffdiag };

inline std::string to_string(MaskMode m) {
    return m == MaskMode::AllEntries ? "all-entries" : "symmetric-offdiag";
}

inline MaskMode mask_mode_from_string(const std::string& s) {
    if (s == "all-entries") return MaskMode::AllEntries;
    if (s == "symmetric-offdiag") return MaskMode::SymmetricOffdiag;
    throw std::invalid_argument("unknown mask mode: " + s);
}

/// Observed coordinate set, sampled uniformly without replacement.
struct SampleMask {
    std::vector<std::pair<std::size_t, std::size_t>> coords;
    MaskMode mode = MaskMode::SymmetricOffdiag;
    std::size_t m = 0;
    std::uint64_t seed = 0;
};

namespace detail {

/// Floyd's sampling of `m` distinct integers from [0, universe), driven by
/// the counter RNG so the result is a pure function of the seed.
inline std::vector<std::uint64_t> sample_without_replacement(std::uint64_t universe,
                                                             std::uint64_t m,
                                                             std::uint64_t seed) {
    std::unordered_map<std::uint64_t, bool> chosen;
    chosen.reserve(m * 2);
    std::uint64_t counter = 0;
    for (std::uint64_t j = universe - m; j < universe; ++j) {
        const std::uint64_t r = counter_random(seed, counter++) % (j + 1);
        if (chosen.count(r))
            chosen[j] = true;
        else
            chosen[r] = true;
    }
    std::vector<std::uint64_t> out;
    out.reserve(m);
    for (const auto& kv : chosen) out.push_back(kv.first);
    std::sort(out.begin(), out.end());
    return out;
}

/// Inverse of id = i*(2N-i-1)/2 + (j-i-1) for the strict upper triangle.
inline std::pair<std::size_t, std::size_t> upper_pair_from_id(std::uint64_t id,
                                                              std::size_t n) {
    std::size_t i = 0;
    std::uint64_t rowlen = n - 1;
    while (id >= rowlen) {
        id -= rowlen;
        --rowlen;
        ++i;
    }
    return {i, i + 1 + static_cast<std::size_t>(id)};
}

}  // namespace detail

/// Uniform mask over the admissible coordinate set. In symmetric-offdiag
/// mode m must be even: m/2 unordered off-diagonal pairs are drawn and both
/// orientations observed.
inline SampleMask sample_mask(std::size_t n, std::size_t m, MaskMode mode,
                              std::uint64_t seed) {
    SampleMask mask;
    mask.mode = mode;
    mask.m = m;
    mask.seed = seed;
    if (mode == MaskMode::AllEntries) {
        if (m > n * n) throw std::invalid_argument("sample_mask: m > N^2");
        for (std::uint64_t id : detail::sample_without_replacement(
                 static_cast<std::uint64_t>(n) * n, m, seed))
            mask.coords.emplace_back(id / n, id % n);
    } else {
        if (m % 2 != 0)
            throw std::invalid_argument("sample_mask: m must be even in symmetric mode");
        if (m > n * n - n)
            throw std::invalid_argument("sample_mask: m > N^2 - N in symmetric mode");
        const std::uint64_t universe = static_cast<std::uint64_t>(n) * (n - 1) / 2;
        for (std::uint64_t id :
             detail::sample_without_replacement(universe, m / 2, seed)) {
            const auto [i, j] = detail::upper_pair_from_id(id, n);
            mask.coords.emplace_back(i, j);
            mask.coords.emplace_back(j, i);
        }
    }
    return mask;
}

struct SvtParams {
    double tau = 0.0;   // 0 means default 5N
    double step = 0.0;  // 0 means default 1.2 N^2 / m
    double tol = 1e-4;
    int max_iter = 1000;
    std::size_t rank_start = 6;  // initial truncation rank, grown on demand
};

struct CompletionResult {
    Matrix estimate;
    int iterations = 0;
    std::vector<double> residual_history;  // relative residual on the mask
    double rel_error = -1.0;               // vs ground truth, when provided
    bool converged = false;
};

/// |estimate - truth|_F / |truth|_F; |estimate|_F when truth is zero.
inline double recovery_error(const Matrix& truth, const Matrix& estimate) {
    if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols())
        throw std::invalid_argument("recovery_error: shape mismatch");
    const double denom = truth.frobenius();
    if (denom == 0.0) return estimate.frobenius();
    double s = 0.0;
    for (std::size_t i = 0; i < truth.rows(); ++i)
        for (std::size_t j = 0; j < truth.cols(); ++j) {
            const double r = estimate(i, j) - truth(i, j);
            s += r * r;
        }
    return std::sqrt(s) / denom;
}

/// Singular value thresholding for the nuclear-norm completion program.
/// Per iteration: soft-threshold the singular values of the dual iterate at
/// tau (adaptive-rank truncated SVD, warm-started), then take a gradient
/// step of size `step` on the observed-entry residual. In symmetric-offdiag
/// mode the zero diagonal is added to the constraint set, since it is part
/// of the matrix definition, and the symmetric truncated SVD is used.
inline CompletionResult svt_complete(const std::vector<double>& observed,
                                     const SampleMask& mask, std::size_t n,
                                     SvtParams params = {},
                                     const Matrix* truth = nullptr) {
    if (mask.coords.empty()) throw std::invalid_argument("svt_complete: empty mask");
    if (observed.size() != mask.coords.size())
        throw std::invalid_argument("svt_complete: observed/mask size mismatch");

    const double tau = params.tau > 0.0 ? params.tau : 5.0 * static_cast<double>(n);
    const double step =
        params.step > 0.0
            ? params.step
            : 1.2 * static_cast<double>(n) * n / static_cast<double>(mask.coords.size());
    if (params.tol <= 0.0 || params.max_iter <= 0)
        throw std::invalid_argument("svt_complete: params must be positive");

    // constraint set: the mask plus, in symmetric mode, the zero diagonal
    std::vector<std::pair<std::size_t, std::size_t>> omega = mask.coords;
    std::vector<double> vals = observed;
    const bool symmetric = mask.mode == MaskMode::SymmetricOffdiag;
    if (symmetric) {
        for (std::size_t i = 0; i < n; ++i) {
            omega.emplace_back(i, i);
            vals.push_back(0.0);
        }
    }

    double norm_pm = 0.0;
    for (double v : vals) norm_pm += v * v;
    norm_pm = std::sqrt(norm_pm);
    if (norm_pm == 0.0) norm_pm = 1.0;  // all-zero observations: absolute residual

    Matrix pm(n, n);
    std::vector<char> seen(n * n, 0);
    for (std::size_t k = 0; k < omega.size(); ++k) {
        pm(omega[k].first, omega[k].second) = vals[k];
        seen[omega[k].first * n + omega[k].second] = 1;
    }

    // fully determined: the constraints pin every entry, no iteration needed
    if (std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; })) {
        CompletionResult res;
        res.estimate = pm;
        res.iterations = 1;
        res.residual_history.push_back(0.0);
        res.converged = true;
        if (truth) res.rel_error = recovery_error(*truth, res.estimate);
        return res;
    }

    // kick-start so the first shrinkage is not identically zero
    const double sigma1_pm =
        symmetric ? svd_sym_truncated(pm, 1, 1e-6, 2000, nullptr, false).sigma[0]
                  : svd_truncated(pm, 1, 1e-6, 2000, nullptr, false).sigma[0];
    const double k0 = sigma1_pm > 0.0 ? std::ceil(tau / (step * sigma1_pm)) : 1.0;

    Matrix y(n, n);
    for (std::size_t k = 0; k < omega.size(); ++k)
        y(omega[k].first, omega[k].second) = k0 * step * vals[k];

    CompletionResult res;
    res.estimate = Matrix(n, n);
    std::size_t rank = std::min(params.rank_start, n);
    Matrix warm;  // previous singular vectors, reused as the start basis
    int diverging = 0;

    for (int it = 1; it <= params.max_iter; ++it) {
        // adaptive-rank shrinkage of y at tau
        Matrix x(n, n);
        for (;;) {
            if (symmetric) {
                const TruncatedSymSvd svd = svd_sym_truncated(
                    y, rank, 1e-7, 300, warm.empty() ? nullptr : &warm, false);
                if (svd.sigma.back() > tau && rank < n) {
                    rank = std::min(n, rank + 2);
                    continue;
                }
                warm = svd.u;
                x = Matrix(n, n);
                for (std::size_t l = 0; l < rank; ++l) {
                    const double w = std::max(svd.sigma[l] - tau, 0.0) *
                                     static_cast<double>(svd.signs[l]);
                    if (w == 0.0) continue;
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            x(i, j) += w * svd.u(i, l) * svd.u(j, l);
                }
            } else {
                const TruncatedSvd svd = svd_truncated(y, rank, 1e-7, 300,
                                                       warm.empty() ? nullptr : &warm, false);
                if (svd.sigma.back() > tau && rank < n) {
                    rank = std::min(n, rank + 2);
                    continue;
                }
                warm = svd.v;
                x = Matrix(n, n);
                for (std::size_t l = 0; l < rank; ++l) {
                    const double w = std::max(svd.sigma[l] - tau, 0.0);
                    if (w == 0.0) continue;
                    for (std::size_t i = 0; i < n; ++i)
                        for (std::size_t j = 0; j < n; ++j)
                            x(i, j) += w * svd.u(i, l) * svd.v(j, l);
                }
            }
            break;
        }

        double resid = 0.0;
        for (std::size_t k = 0; k < omega.size(); ++k) {
            const double r = x(omega[k].first, omega[k].second) - vals[k];
            resid += r * r;
        }
        resid = std::sqrt(resid) / norm_pm;
        res.residual_history.push_back(resid);
        res.iterations = it;
        res.estimate = x;

        if (resid <= params.tol) {
            res.converged = true;
            break;
        }
        if (resid > 10.0 * res.residual_history.front()) {
            if (++diverging >= 20)
                throw std::runtime_error("svt_complete: diverged (residual " +
                                         std::to_string(resid) + " after " +
                                         std::to_string(it) + " iterations)");
        } else {
            diverging = 0;
        }

        for (std::size_t k = 0; k < omega.size(); ++k)
            y(omega[k].first, omega[k].second) +=
                step * (vals[k] - x(omega[k].first, omega[k].second));
    }

    if (truth) res.rel_error = recovery_error(*truth, res.estimate);
    return res;
}

}  // namespace edmc
