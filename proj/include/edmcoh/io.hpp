#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "edmcoh/coherence.hpp"
#include "edmcoh/completion.hpp"
#include "edmcoh/edm.hpp"
#include "edmcoh/experiments.hpp"
#include "edmcoh/theory.hpp"

namespace edmc {

/// Round to 12 significant digits so reports are stable across runs.
inline double sig12(double x) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    std::ostringstream os;
    os << std::setprecision(12) << x;
    return std::stod(os.str());
}

inline nlohmann::json num(double x) {
    if (std::isnan(x)) return nullptr;
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return sig12(x);
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open for writing: " + path);
    f << std::setprecision(17);
    return f;
}

}  // namespace detail

inline void write_cloud_csv(const std::string& path, const NodeCloud& cloud) {
    auto f = detail::open_out(path);
    f << "# cloud N=" << cloud.n() << " d=" << cloud.dim() << " seed=" << cloud.seed
      << " dist=" << cloud.dist_id << " rng=" << kRngAlgorithmId << "\n";
    for (std::size_t i = 0; i < cloud.n(); ++i) {
        for (std::size_t j = 0; j < cloud.dim(); ++j)
            f << (j ? "," : "") << cloud.coords(i, j);
        f << "\n";
    }
}

inline NodeCloud read_cloud_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    NodeCloud cloud;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line);
            std::string tok;
            while (hs >> tok) {
                if (tok.rfind("seed=", 0) == 0) cloud.seed = std::stoull(tok.substr(5));
                if (tok.rfind("dist=", 0) == 0) cloud.dist_id = tok.substr(5);
            }
            continue;
        }
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty cloud file: " + path);
    cloud.coords = Matrix(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::runtime_error("ragged cloud file: " + path);
        for (std::size_t j = 0; j < rows[i].size(); ++j) cloud.coords(i, j) = rows[i][j];
    }
    return cloud;
}

inline void write_matrix_csv(const std::string& path, const Matrix& m,
                             const std::string& header = "") {
    auto f = detail::open_out(path);
    if (!header.empty()) f << "# " << header << "\n";
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) f << (j ? "," : "") << m(i, j);
        f << "\n";
    }
}

inline Matrix read_matrix_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open: " + path);
    std::string line;
    std::vector<std::vector<double>> rows;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty matrix file: " + path);
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != rows[0].size())
            throw std::runtime_error("ragged matrix file: " + path);
        for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

inline void write_observations_csv(const std::string& path, const SampleMask& mask,
                                   const std::vector<double>& values) {
    if (values.size() != mask.coords.size())
        throw std::invalid_argument("write_observations_csv: size mismatch");
    auto f = detail::open_out(path);
    f << "i,j,value\n";
    for (std::size_t k = 0; k < mask.coords.size(); ++k)
        f << mask.coords[k].first << "," << mask.coords[k].second << "," << values[k]
          << "\n";
}

inline void write_trials_csv(const std::string& path, const McReport& rep) {
    auto f = detail::open_out(path);
    f << "trial,seed,mu_U,sigma_min_sq_A,rank,failure,error\n";
    for (const TrialRow& r : rep.rows)
        f << r.trial << "," << r.seed << "," << r.mu_u << "," << r.sigma_min_sq_a << ","
          << r.rank << "," << (r.failure ? 1 : 0) << "," << (r.error ? 1 : 0) << "\n";
}

// ---------------------------------------------------------------------------
// JSON reports
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const CoherenceReport& r) {
    nlohmann::json j{{"mu_U", num(r.mu_u)},
                     {"mu_U_pm", num(r.mu_u_pm)},
                     {"mu1_emp", num(r.mu1_emp)},
                     {"N", r.n},
                     {"d", r.d},
                     {"effective_rank", r.effective_rank},
                     {"rank_rel_tol", 1e-10}};
    j["sigma_min_sq_A"] = r.sigma_min_sq_a ? num(*r.sigma_min_sq_a) : nlohmann::json{};
    j["mu_bound_chain"] = r.mu_bound_chain ? num(*r.mu_bound_chain) : nlohmann::json{};
    return j;
}

inline nlohmann::json to_json(const TheoryBounds& b) {
    nlohmann::json j{{"lambda_star", num(b.lambda_star)},
                     {"theta", num(b.theta)},
                     {"mu0", num(b.mu0)},
                     {"mu1", num(b.mu1)},
                     {"N_min", b.n_min},
                     {"log_convention", "natural"}};
    if (b.eps_t) {
        j["eps_t"] = num(b.eps_t->eps);
        j["eps_t_vacuous"] = b.eps_t->vacuous;
    }
    if (b.samples) {
        j["m_general"] = num(b.samples->m_general);
        j["m_general_vacuous"] = b.samples->general_vacuous;
        if (b.samples->m_improved) {
            j["m_improved"] = num(*b.samples->m_improved);
            j["m_improved_vacuous"] = b.samples->improved_vacuous;
        } else {
            j["m_improved"] = "inapplicable";
        }
    }
    return j;
}

inline nlohmann::json to_json(const McReport& r) {
    return nlohmann::json{{"claim", r.claim},
                          {"trials", r.trials},
                          {"failures", r.failures},
                          {"errors", r.errors},
                          {"empirical_rate", num(r.empirical_rate)},
                          {"bound", num(r.bound)},
                          {"bound_vacuous", r.bound_vacuous}};
}

inline nlohmann::json to_json(const CompletionResult& r) {
    nlohmann::json j{{"iterations", r.iterations},
                     {"converged", r.converged},
                     {"final_residual",
                      r.residual_history.empty() ? nlohmann::json{}
                                                 : num(r.residual_history.back())}};
    if (r.rel_error >= 0.0) j["rel_error"] = num(r.rel_error);
    return j;
}

inline nlohmann::json to_json(const Section4Report& r) {
    nlohmann::json j;
    for (std::size_t i = 0; i < r.lambda_checks.size(); ++i) {
        const std::string key = "lambda_min_d" + std::to_string(i + 1);
        j[key] = num(r.lambda_checks[i].lambda_min);
        j[key + "_gap_from_third"] = num(r.lambda_checks[i].gap_from_third);
    }
    j["not_psd_eigenvalues"] = nlohmann::json::array();
    for (double v : r.two_point_eigenvalues) j["not_psd_eigenvalues"].push_back(num(v));
    j["not_psd_witness"] = r.not_psd_witness;
    j["mu_pm_minus_mu"] = num(r.mu_pm_minus_mu);
    return j;
}

inline nlohmann::json to_json(const std::vector<SweepPoint>& sweep) {
    nlohmann::json arr = nlohmann::json::array();
    for (const SweepPoint& p : sweep) {
        nlohmann::json j{{"m", p.m},
                         {"trials", p.trials},
                         {"successes", p.successes},
                         {"success_rate", num(p.success_rate)},
                         {"mean_rel_error", num(p.mean_rel_error)}};
        arr.push_back(std::move(j));
    }
    return arr;
}

}  // namespace edmc
