#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "edmcoh/edm.hpp"
#include "edmcoh/rng.hpp"

namespace edmc {

enum class DistKind { Uniform, TruncatedNormal, BetaScaled };

inline std::string to_string(DistKind k) {
    switch (k) {
        case DistKind::Uniform: return "uniform";
        case DistKind::TruncatedNormal: return "truncated-normal";
        case DistKind::BetaScaled: return "beta-scaled";
    }
    return "?";
}

inline DistKind dist_kind_from_string(const std::string& s) {
    if (s == "uniform") return DistKind::Uniform;
    if (s == "truncated-normal" || s == "truncnorm") return DistKind::TruncatedNormal;
    if (s == "beta-scaled" || s == "beta") return DistKind::BetaScaled;
    throw std::invalid_argument("unknown distribution kind: " + s);
}

/// A coordinate-sampling law before mean-centering. All built-in kinds are
/// absolutely continuous (atomless) with bounded support [a, b].
struct DistributionSpec {
    DistKind kind = DistKind::Uniform;
    double support_lo = -1.0;
    double support_hi = 1.0;
    // kind-specific parameters:
    //   uniform          - unused
    //   truncated-normal - p1 = location, p2 = scale of the parent normal
    //   beta-scaled      - p1, p2 = Beta shape parameters, mapped onto [a, b]
    double p1 = 0.0;
    double p2 = 1.0;

    static DistributionSpec uniform(double a, double b) {
        return {DistKind::Uniform, a, b, 0.0, 0.0};
    }
    static DistributionSpec truncated_normal(double a, double b, double loc, double scale) {
        return {DistKind::TruncatedNormal, a, b, loc, scale};
    }
    static DistributionSpec beta_scaled(double a, double b, double alpha, double beta) {
        return {DistKind::BetaScaled, a, b, alpha, beta};
    }

    std::string id() const {
        std::ostringstream os;
        os << to_string(kind) << "[" << support_lo << "," << support_hi << "]";
        if (kind != DistKind::Uniform) os << "(" << p1 << "," << p2 << ")";
        return os.str();
    }

    void validate() const {
        if (!(support_lo < support_hi))
            throw std::invalid_argument("DistributionSpec: degenerate support (a >= b)");
        if (kind == DistKind::TruncatedNormal && p2 <= 0.0)
            throw std::invalid_argument("truncated-normal: scale must be > 0");
        if (kind == DistKind::BetaScaled && (p1 <= 0.0 || p2 <= 0.0))
            throw std::invalid_argument("beta-scaled: shape parameters must be > 0");
    }
};

/// Central moments m2..m4 of the centered law plus the support radius
/// c = max{|a'|, |b'|}.
struct MomentSet {
    double m2 = 0.0, m3 = 0.0, m4 = 0.0, c = 0.0;

    void validate() const {
        if (!(m2 > 0.0)) throw std::invalid_argument("MomentSet: m2 must be > 0");
        if (m4 < m2 * m2 * (1.0 - 1e-12))
            throw std::invalid_argument("MomentSet: m4 < m2^2 violates Jensen");
        if (!(c > 0.0)) throw std::invalid_argument("MomentSet: c must be > 0");
        if (m2 > c * c * (1.0 + 1e-12))
            throw std::invalid_argument("MomentSet: m2 > c^2 impossible on [-c, c]");
    }
};

namespace detail {

/// Adaptive Simpson quadrature to absolute tolerance tol.
inline double simpson_step(const std::function<double(double)>& f, double a, double b,
                           double fa, double fm, double fb, double whole, double tol,
                           int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_step(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           simpson_step(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b,
                        double tol = 1e-13) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

/// A mean-centered sampling law: support straddles zero, first moment is 0,
/// moments m2..m4 known to quadrature accuracy. Immutable once built.
class Distribution {
public:
    const DistributionSpec& spec() const { return spec_; }
    double support_lo() const { return lo_; }
    double support_hi() const { return hi_; }
    const MomentSet& moments() const { return moments_; }
    std::string id() const { return spec_.id(); }

    /// Inverse-CDF sample on the centered support from a uniform u in [0,1).
    double sample_u(double u) const {
        if (spec_.kind == DistKind::Uniform) return lo_ + (hi_ - lo_) * u;
        // tabulated CDF, binary search + linear interpolation
        const double target = u * cdf_.back();
        std::size_t lo = 0, hi = cdf_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (cdf_[mid] <= target ? lo : hi) = mid;
        }
        const double seg = cdf_[hi] - cdf_[lo];
        const double frac = seg > 0.0 ? (target - cdf_[lo]) / seg : 0.0;
        const double h = (hi_ - lo_) / static_cast<double>(cdf_.size() - 1);
        const double x = lo_ + (static_cast<double>(lo) + frac) * h;
        return std::clamp(x, lo_, hi_);
    }

    friend Distribution make_distribution(const DistributionSpec& spec);

private:
    Distribution() = default;

    DistributionSpec spec_;
    double lo_ = 0.0, hi_ = 0.0;  // centered support
    MomentSet moments_;
    std::vector<double> cdf_;  // cumulative pdf mass at 2^16 knots (non-uniform kinds)
};

inline Distribution make_distribution(const DistributionSpec& spec) {
    spec.validate();
    Distribution dist;
    dist.spec_ = spec;
    const double a = spec.support_lo, b = spec.support_hi;

    if (spec.kind == DistKind::Uniform) {
        const double h = 0.5 * (b - a);
        dist.lo_ = -h;
        dist.hi_ = h;
        dist.moments_ = {h * h / 3.0, 0.0, h * h * h * h / 5.0, h};
    } else {
        // unnormalized pdf on the raw support
        std::function<double(double)> pdf;
        if (spec.kind == DistKind::TruncatedNormal) {
            const double mu = spec.p1, sg = spec.p2;
            pdf = [mu, sg](double x) {
                const double z = (x - mu) / sg;
                return std::exp(-0.5 * z * z);
            };
        } else {
            const double al = spec.p1, be = spec.p2;
            pdf = [a, b, al, be](double x) {
                const double u = (x - a) / (b - a);
                if (u <= 0.0 || u >= 1.0) return 0.0;
                return std::exp((al - 1.0) * std::log(u) + (be - 1.0) * std::log1p(-u));
            };
        }
        double mean;
        if (spec.kind == DistKind::BetaScaled) {
            // exact: raw moments of Beta(alpha, beta) are products, and the
            // density can be endpoint-singular, which adaptive quadrature
            // handles poorly
            const double al = spec.p1, be = spec.p2, w = b - a;
            double r[5] = {1.0, 0, 0, 0, 0};
            for (int k = 1; k <= 4; ++k)
                r[k] = r[k - 1] * (al + k - 1.0) / (al + be + k - 1.0);
            const double c2 = r[2] - r[1] * r[1];
            const double c3 = r[3] - 3.0 * r[1] * r[2] + 2.0 * r[1] * r[1] * r[1];
            const double c4 = r[4] - 4.0 * r[1] * r[3] + 6.0 * r[1] * r[1] * r[2] -
                              3.0 * r[1] * r[1] * r[1] * r[1];
            mean = a + w * r[1];
            dist.moments_.m2 = w * w * c2;
            dist.moments_.m3 = w * w * w * c3;
            dist.moments_.m4 = w * w * w * w * c4;
        } else {
            const double z = detail::integrate(pdf, a, b);
            if (!(z > 0.0))
                throw std::invalid_argument("make_distribution: degenerate density");
            mean = detail::integrate([&](double x) { return x * pdf(x); }, a, b) / z;
            auto moment = [&](int k) {
                return detail::integrate(
                           [&](double x) { return std::pow(x - mean, k) * pdf(x); }, a,
                           b) /
                       z;
            };
            dist.moments_.m2 = moment(2);
            dist.moments_.m3 = moment(3);
            dist.moments_.m4 = moment(4);
        }

        dist.lo_ = a - mean;
        dist.hi_ = b - mean;
        dist.moments_.c = std::max(std::abs(dist.lo_), std::abs(dist.hi_));

        // inverse-CDF table: 2^16 knots, trapezoid accumulation
        constexpr std::size_t knots = 1u << 16;
        dist.cdf_.resize(knots);
        const double h = (dist.hi_ - dist.lo_) / static_cast<double>(knots - 1);
        double acc = 0.0;
        double prev = pdf(dist.lo_ + mean);
        dist.cdf_[0] = 0.0;
        for (std::size_t i = 1; i < knots; ++i) {
            const double x = dist.lo_ + mean + static_cast<double>(i) * h;
            const double cur = pdf(x);
            acc += 0.5 * (prev + cur) * h;
            dist.cdf_[i] = acc;
            prev = cur;
        }
    }

    if (!(dist.lo_ < 0.0 && dist.hi_ > 0.0))
        throw std::invalid_argument(
            "make_distribution: centered support does not straddle 0");
    dist.moments_.validate();
    return dist;
}

/// N x d coordinates drawn i.i.d. from the centered law. Entry (i, j) is a
/// pure function of (seed, i*d + j), so clouds are bit-reproducible and
/// order-independent.
inline NodeCloud sample_coordinates(const Distribution& dist, std::size_t n, std::size_t d,
                                    std::uint64_t seed) {
    if (n < 1 || d < 1)
        throw std::invalid_argument("sample_coordinates: N and d must be >= 1");
    NodeCloud cloud;
    cloud.coords = Matrix(n, d);
    cloud.seed = seed;
    cloud.dist_id = dist.id();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            cloud.coords(i, j) = dist.sample_u(uniform01(seed, i * d + j));
    return cloud;
}

}  // namespace edmc
