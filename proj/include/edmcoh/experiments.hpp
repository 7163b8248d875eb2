#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include "edmcoh/coherence.hpp"
#include "edmcoh/completion.hpp"
#include "edmcoh/distributions.hpp"
#include "edmcoh/edm.hpp"
#include "edmcoh/rng.hpp"
#include "edmcoh/theory.hpp"

namespace edmc {

struct McConfig {
    DistributionSpec dist;
    std::size_t d = 2;
    std::size_t n = 100;
    std::size_t trials = 200;
    double t = 0.5;
    double gamma = 0.1;
    std::uint64_t master_seed = 42;

    void validate() const {
        if (trials < 1) throw std::invalid_argument("McConfig: trials must be >= 1");
        if (n < 2) throw std::invalid_argument("McConfig: N must be >= 2");
        dist.validate();
    }
};

struct TrialRow {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    double mu_u = 0.0;
    double sigma_min_sq_a = 0.0;
    int rank = 0;
    bool failure = false;
    bool error = false;
};

struct McReport {
    std::string claim;
    std::size_t trials = 0;
    std::size_t failures = 0;
    std::size_t errors = 0;  // kernel errors, counted separately from failures
    double empirical_rate = 0.0;
    double bound = 0.0;  // theoretical probability for the tested event
    bool bound_vacuous = false;
    std::vector<TrialRow> rows;
};

namespace detail {

inline unsigned mc_thread_count() {
    if (const char* env = std::getenv("EDM_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

/// Run `count` independent trials, each writing its own row. Results are
/// keyed by trial index so the outcome is identical for any thread count.
inline void run_trials(std::size_t count, const std::function<void(std::size_t)>& body) {
    const unsigned threads = std::min<std::size_t>(mc_thread_count(), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    for (auto& th : pool) th.join();
}

}  // namespace detail

/// Monte Carlo check of the lower-tail concentration event
/// {sigma_min^2(A) <= t N lambda*} against its exponential bound.
inline McReport run_chernoff_mc(const McConfig& cfg) {
    cfg.validate();
    const Distribution dist = make_distribution(cfg.dist);
    const double lam = lambda_star_general(dist.moments(), cfg.d);
    const double th = theta_general(dist.moments(), cfg.d);
    const ChernoffFailure eps =
        chernoff_failure(th, cfg.d, cfg.t, static_cast<long>(cfg.n));

    McReport rep;
    rep.claim = "chernoff";
    rep.trials = cfg.trials;
    rep.bound = eps.eps;
    rep.bound_vacuous = eps.vacuous;
    rep.rows.resize(cfg.trials);

    const double threshold = cfg.t * static_cast<double>(cfg.n) * lam;
    detail::run_trials(cfg.trials, [&](std::size_t i) {
        TrialRow& row = rep.rows[i];
        row.trial = i;
        row.seed = derive_seed(cfg.master_seed, i);
        try {
            const NodeCloud cloud = sample_coordinates(dist, cfg.n, cfg.d, row.seed);
            const CoherenceReport coh = coherence_qr_path(cloud);
            row.mu_u = coh.mu_u;
            row.sigma_min_sq_a = *coh.sigma_min_sq_a;
            row.rank = static_cast<int>(coh.effective_rank);
            row.failure = row.sigma_min_sq_a <= threshold;
        } catch (const std::exception&) {
            row.error = true;
        }
    });

    for (const TrialRow& r : rep.rows) {
        if (r.error)
            ++rep.errors;
        else if (r.failure)
            ++rep.failures;
    }
    rep.empirical_rate =
        static_cast<double>(rep.failures) / static_cast<double>(rep.trials);
    return rep;
}

/// Monte Carlo check that exact coherence stays under the theoretical
/// mu0 / mu1 with failure rate at most gamma.
inline McReport run_coherence_mc(const McConfig& cfg) {
    cfg.validate();
    const Distribution dist = make_distribution(cfg.dist);
    const double th = theta_general(dist.moments(), cfg.d);
    const double dd = static_cast<double>(cfg.d);
    const double mu0 = th / (cfg.t * (dd + 2.0));  // inf at t = 0
    const double mu1 = mu0 * std::sqrt(dd + 2.0);

    McReport rep;
    rep.claim = "coherence";
    rep.trials = cfg.trials;
    rep.bound = cfg.gamma;
    rep.rows.resize(cfg.trials);

    detail::run_trials(cfg.trials, [&](std::size_t i) {
        TrialRow& row = rep.rows[i];
        row.trial = i;
        row.seed = derive_seed(cfg.master_seed, i);
        try {
            const NodeCloud cloud = sample_coordinates(dist, cfg.n, cfg.d, row.seed);
            const CoherenceReport coh = coherence_qr_path(cloud);
            row.mu_u = coh.mu_u;
            row.sigma_min_sq_a = *coh.sigma_min_sq_a;
            row.rank = static_cast<int>(coh.effective_rank);
            row.failure = coh.mu_u > mu0 || coh.mu1_emp > mu1;
        } catch (const std::exception&) {
            row.error = true;
        }
    });

    for (const TrialRow& r : rep.rows) {
        if (r.error)
            ++rep.errors;
        else if (r.failure)
            ++rep.failures;
    }
    rep.empirical_rate =
        static_cast<double>(rep.failures) / static_cast<double>(rep.trials);
    return rep;
}

struct SweepPoint {
    std::size_t m = 0;
    std::size_t trials = 0;
    std::size_t successes = 0;
    double success_rate = 0.0;
    double mean_rel_error = 0.0;
    std::vector<double> rel_errors;  // one per seed, -1 for aborted runs
};

/// Completion success curve over an observation-count grid. Success means
/// rel-error <= 1e-3; solver divergence counts as failure, not abort.
inline std::vector<SweepPoint> run_completion_sweep(
    const DistributionSpec& dist_spec, std::size_t d, std::size_t n,
    const std::vector<std::size_t>& m_grid, std::size_t seeds_per_point,
    SvtParams svt = {}, std::uint64_t master_seed = 42,
    MaskMode mode = MaskMode::SymmetricOffdiag) {
    const Distribution dist = make_distribution(dist_spec);
    std::vector<SweepPoint> out;
    out.reserve(m_grid.size());

    for (std::size_t gi = 0; gi < m_grid.size(); ++gi) {
        SweepPoint pt;
        pt.m = m_grid[gi];
        pt.trials = seeds_per_point;
        pt.rel_errors.assign(seeds_per_point, -1.0);

        detail::run_trials(seeds_per_point, [&](std::size_t s) {
            const std::uint64_t seed = derive_seed(master_seed, gi * 100003 + s);
            try {
                const NodeCloud cloud = sample_coordinates(dist, n, d, seed);
                const EdmMatrix truth = build_edm(cloud);
                const SampleMask mask = sample_mask(n, pt.m, mode, seed + 1);
                std::vector<double> observed;
                observed.reserve(mask.coords.size());
                for (const auto& [i, j] : mask.coords)
                    observed.push_back(truth.entries(i, j));
                const CompletionResult res =
                    svt_complete(observed, mask, n, svt, &truth.entries);
                pt.rel_errors[s] = res.rel_error;
            } catch (const std::exception&) {
                pt.rel_errors[s] = -1.0;  // divergence or invalid point: failure
            }
        });

        double err_sum = 0.0;
        std::size_t err_count = 0;
        for (double e : pt.rel_errors) {
            if (e >= 0.0 && e <= 1e-3) ++pt.successes;
            if (e >= 0.0) {
                err_sum += e;
                ++err_count;
            }
        }
        pt.success_rate =
            static_cast<double>(pt.successes) / static_cast<double>(pt.trials);
        pt.mean_rel_error = err_count > 0 ? err_sum / static_cast<double>(err_count) : -1.0;
        out.push_back(std::move(pt));
    }
    return out;
}

/// The two corrections to prior work plus the sign-invariance observation:
/// lambda_min of the prior-work matrix is not 1/3, the 2-point EDM is not
/// PSD, and mu(U+-) equals mu(U) regardless.
struct Section4Report {
    std::vector<PriorWorkCheck> lambda_checks;  // d = 1, 2, 3
    std::vector<double> two_point_eigenvalues;  // of [[0,1],[1,0]]
    bool not_psd_witness = false;
    double mu_pm_minus_mu = 0.0;  // on a random N=100, d=2 cloud
};

inline Section4Report section4_checks() {
    Section4Report rep;
    for (std::size_t d = 1; d <= 3; ++d)
        rep.lambda_checks.push_back(prior_work_lambda_min(d));

    Matrix ex(2, 2);
    ex(0, 1) = ex(1, 0) = 1.0;
    const SymEig e = eig_sym(ex);
    rep.two_point_eigenvalues = e.eigvals;
    for (double v : e.eigvals)
        if (v < 0.0) rep.not_psd_witness = true;

    const Distribution dist = make_distribution(DistributionSpec::uniform(-1.0, 1.0));
    const NodeCloud cloud = sample_coordinates(dist, 100, 2, 20240817);
    const CoherenceReport coh = coherence_svd_path(build_edm(cloud), 2);
    rep.mu_pm_minus_mu = coh.mu_u_pm - coh.mu_u;
    return rep;
}

}  // namespace edmc
