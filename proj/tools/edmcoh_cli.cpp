// Command-line front end: generates clouds/EDMs, evaluates the closed-form
// bounds, computes coherence, runs the Monte Carlo verifications, and solves
// completion instances. JSON goes to stdout, bulk data to CSV files.
//
// Exit codes: 0 success, 1 a verified claim failed beyond statistical slack,
// 2 usage or validation error.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "edmcoh/coherence.hpp"
#include "edmcoh/completion.hpp"
#include "edmcoh/distributions.hpp"
#include "edmcoh/edm.hpp"
#include "edmcoh/experiments.hpp"
#include "edmcoh/io.hpp"
#include "edmcoh/theory.hpp"

namespace {

using nlohmann::json;

struct DistFlags {
    std::string kind = "uniform";
    double a = -1.0;
    double b = 1.0;
    double mu = 0.0;
    double sigma = 1.0;
    double alpha = 2.0;
    double beta_shape = 2.0;

    edmc::DistributionSpec to_spec() const {
        switch (edmc::dist_kind_from_string(kind)) {
            case edmc::DistKind::Uniform:
                return edmc::DistributionSpec::uniform(a, b);
            case edmc::DistKind::TruncatedNormal:
                return edmc::DistributionSpec::truncated_normal(a, b, mu, sigma);
            case edmc::DistKind::BetaScaled:
                return edmc::DistributionSpec::beta_scaled(a, b, alpha, beta_shape);
        }
        throw std::invalid_argument("unknown distribution kind");
    }
};

void add_dist_options(CLI::App* cmd, DistFlags& f) {
    cmd->add_option("--dist", f.kind, "distribution kind: uniform, truncnorm, beta");
    cmd->add_option("--a", f.a, "support lower endpoint");
    cmd->add_option("--b", f.b, "support upper endpoint");
    cmd->add_option("--mu", f.mu, "truncnorm: parent normal location");
    cmd->add_option("--sigma", f.sigma, "truncnorm: parent normal scale");
    cmd->add_option("--alpha", f.alpha, "beta: first shape parameter");
    cmd->add_option("--beta-shape", f.beta_shape, "beta: second shape parameter");
}

void emit(const json& j) { std::cout << j.dump(2) << std::endl; }

/// Flat JSON config file mirroring long flags: values for keys not already
/// present on the command line are appended as --key=value after parsing
/// order is fixed.
std::vector<std::string> merge_config_args(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + i, args.begin() + i + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + i);
            break;
        }
    }
    if (config_path.empty()) return args;

    std::ifstream f(config_path);
    if (!f) throw std::invalid_argument("cannot open config file: " + config_path);
    json cfg = json::parse(f);
    if (!cfg.is_object()) throw std::invalid_argument("config must be a JSON object");
    for (auto& [key, val] : cfg.items()) {
        const std::string flag = "--" + key;
        bool present = false;
        for (const std::string& a : args)
            if (a == flag || a.rfind(flag + "=", 0) == 0) present = true;
        if (present) continue;
        std::string sval = val.is_string() ? val.get<std::string>() : val.dump();
        args.push_back(flag + "=" + sval);
    }
    return args;
}

int run(int argc, char** argv) {
    CLI::App app{"random-EDM coherence toolkit"};
    app.require_subcommand(1);

    // --- gen -----------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a node cloud and its EDM");
    DistFlags gen_dist;
    add_dist_options(gen, gen_dist);
    std::size_t gen_n = 100, gen_d = 2;
    std::uint64_t gen_seed = 0;
    std::string gen_out = ".";
    gen->add_option("--n", gen_n, "number of nodes");
    gen->add_option("--d", gen_d, "ambient dimension");
    gen->add_option("--seed", gen_seed, "sampling seed");
    gen->add_option("--out", gen_out, "output directory");

    // --- bounds ----------------------------------------------------------
    auto* bounds = app.add_subcommand("bounds", "evaluate the closed-form bounds");
    DistFlags bounds_dist;
    add_dist_options(bounds, bounds_dist);
    std::optional<double> fm2, fm3, fm4, fc;
    bounds->add_option("--m2", fm2, "explicit second central moment");
    bounds->add_option("--m3", fm3, "explicit third central moment");
    bounds->add_option("--m4", fm4, "explicit fourth central moment");
    bounds->add_option("--c", fc, "explicit support radius");
    std::size_t bounds_d = 2;
    double bounds_t = 0.5, bounds_gamma = 0.1, bounds_beta = 3.0, bounds_c_const = 1.0;
    std::optional<long> bounds_n;
    bounds->add_option("--d", bounds_d, "ambient dimension");
    bounds->add_option("--t", bounds_t, "concentration slack in [0,1)");
    bounds->add_option("--gamma", bounds_gamma, "failure probability in (0,1]");
    bounds->add_option("--beta", bounds_beta, "recovery-theorem exponent (> 2)");
    bounds->add_option("--bigC", bounds_c_const, "recovery-theorem constant C");
    bounds->add_option("--n", bounds_n, "node count for eps(t) and sample counts");

    // --- coherence -------------------------------------------------------
    auto* coh = app.add_subcommand("coherence", "exact coherence of a cloud or file");
    DistFlags coh_dist;
    add_dist_options(coh, coh_dist);
    std::string coh_in, coh_path = "both";
    std::size_t coh_n = 200, coh_d = 2;
    std::uint64_t coh_seed = 0;
    coh->add_option("--in", coh_in, "cloud CSV file (generated if omitted)");
    coh->add_option("--n", coh_n, "number of nodes (when generating)");
    coh->add_option("--d", coh_d, "ambient dimension");
    coh->add_option("--seed", coh_seed, "sampling seed (when generating)");
    coh->add_option("--path", coh_path, "qr, svd, or both");

    // --- verify ----------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "Monte Carlo claim verification");
    DistFlags ver_dist;
    add_dist_options(verify, ver_dist);
    std::string ver_claim;
    std::size_t ver_d = 2, ver_trials = 200;
    double ver_t = 0.5, ver_gamma = 0.1;
    std::optional<std::size_t> ver_n;
    std::uint64_t ver_seed = 42;
    std::string ver_out;
    verify->add_option("--claim", ver_claim, "chernoff or coherence")->required();
    verify->add_option("--d", ver_d, "ambient dimension");
    verify->add_option("--t", ver_t, "concentration slack");
    verify->add_option("--gamma", ver_gamma, "failure probability");
    verify->add_option("--n", ver_n, "node count (default: N_min)");
    verify->add_option("--trials", ver_trials, "Monte Carlo trials");
    verify->add_option("--seed", ver_seed, "master seed");
    verify->add_option("--out", ver_out, "directory for the per-trial CSV");

    // --- complete ---------------------------------------------------------
    auto* complete = app.add_subcommand("complete", "recover an EDM from a sample");
    std::string cmp_in, cmp_mode = "symmetric-offdiag", cmp_out;
    std::size_t cmp_m = 0;
    std::uint64_t cmp_seed = 0;
    edmc::SvtParams cmp_params;
    complete->add_option("--in", cmp_in, "ground-truth EDM CSV")->required();
    complete->add_option("--m", cmp_m, "number of observed entries")->required();
    complete->add_option("--mode", cmp_mode, "all-entries or symmetric-offdiag");
    complete->add_option("--seed", cmp_seed, "mask seed");
    complete->add_option("--tau", cmp_params.tau, "threshold (default 5N)");
    complete->add_option("--step", cmp_params.step, "step size (default 1.2 N^2/m)");
    complete->add_option("--tol", cmp_params.tol, "relative residual tolerance");
    complete->add_option("--max-iter", cmp_params.max_iter, "iteration cap");
    complete->add_option("--out", cmp_out, "directory for estimate/observation CSVs");

    // --- section4 ----------------------------------------------------------
    auto* sec4 = app.add_subcommand("section4", "corrections to prior published work");

    std::vector<std::string> args;
    try {
        args = merge_config_args(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::reverse(args.begin(), args.end());  // CLI11 consumes reversed
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (gen->parsed()) {
        if (gen_n < 2) throw std::invalid_argument("N must be >= 2");
        const edmc::Distribution dist = edmc::make_distribution(gen_dist.to_spec());
        const edmc::NodeCloud cloud = edmc::sample_coordinates(dist, gen_n, gen_d, gen_seed);
        const edmc::EdmMatrix edm = edmc::build_edm(cloud);
        std::filesystem::create_directories(gen_out);
        edmc::write_cloud_csv(gen_out + "/cloud.csv", cloud);
        edmc::write_matrix_csv(gen_out + "/edm.csv", edm.entries,
                               "edm N=" + std::to_string(gen_n) +
                                   " d=" + std::to_string(gen_d) +
                                   " seed=" + std::to_string(gen_seed));
        emit(json{{"cloud", gen_out + "/cloud.csv"}, {"edm", gen_out + "/edm.csv"}});
        return 0;
    }

    if (bounds->parsed()) {
        edmc::MomentSet moments;
        if (fm2 || fm3 || fm4 || fc) {
            if (!(fm2 && fm3 && fm4 && fc))
                throw std::invalid_argument("--m2/--m3/--m4/--c must be given together");
            moments = {*fm2, *fm3, *fm4, *fc};
        } else {
            moments = edmc::make_distribution(bounds_dist.to_spec()).moments();
        }
        if (bounds_t >= 1.0) throw std::invalid_argument("t must be < 1 for N_min");
        const edmc::TheoryBounds b =
            edmc::compute_bounds(moments, bounds_d, bounds_t, bounds_gamma, bounds_n,
                                 bounds_beta, bounds_c_const);
        emit(edmc::to_json(b));
        return 0;
    }

    if (coh->parsed()) {
        edmc::NodeCloud cloud;
        if (!coh_in.empty()) {
            cloud = edmc::read_cloud_csv(coh_in);
            coh_d = cloud.dim();
        } else {
            const edmc::Distribution dist = edmc::make_distribution(coh_dist.to_spec());
            cloud = edmc::sample_coordinates(dist, coh_n, coh_d, coh_seed);
        }
        json out;
        if (coh_path == "qr" || coh_path == "both")
            out["qr"] = edmc::to_json(edmc::coherence_qr_path(cloud));
        if (coh_path == "svd" || coh_path == "both")
            out["svd"] =
                edmc::to_json(edmc::coherence_svd_path(edmc::build_edm(cloud), coh_d));
        if (out.empty()) throw std::invalid_argument("--path must be qr, svd, or both");
        emit(out);
        return 0;
    }

    if (verify->parsed()) {
        edmc::McConfig cfg;
        cfg.dist = ver_dist.to_spec();
        cfg.d = ver_d;
        cfg.t = ver_t;
        cfg.gamma = ver_gamma;
        cfg.trials = ver_trials;
        cfg.master_seed = ver_seed;
        if (ver_n) {
            cfg.n = *ver_n;
        } else {
            const edmc::Distribution dist = edmc::make_distribution(cfg.dist);
            cfg.n = static_cast<std::size_t>(edmc::min_nodes(
                edmc::theta_general(dist.moments(), cfg.d), cfg.d, cfg.t, cfg.gamma));
        }

        edmc::McReport rep;
        if (ver_claim == "chernoff")
            rep = edmc::run_chernoff_mc(cfg);
        else if (ver_claim == "coherence")
            rep = edmc::run_coherence_mc(cfg);
        else
            throw std::invalid_argument("--claim must be chernoff or coherence");

        if (!ver_out.empty()) {
            std::filesystem::create_directories(ver_out);
            edmc::write_trials_csv(ver_out + "/trials.csv", rep);
        }
        json out = edmc::to_json(rep);
        out["N"] = cfg.n;
        const double p = std::min(rep.bound, 1.0);
        const double slack =
            3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(rep.trials));
        out["slack"] = edmc::num(slack);
        const bool ok = rep.empirical_rate <= p + slack;
        out["claim_holds"] = ok;
        emit(out);
        return ok ? 0 : 1;
    }

    if (complete->parsed()) {
        const edmc::Matrix truth = edmc::read_matrix_csv(cmp_in);
        if (truth.rows() != truth.cols())
            throw std::invalid_argument("input EDM must be square");
        const std::size_t n = truth.rows();
        const edmc::SampleMask mask =
            edmc::sample_mask(n, cmp_m, edmc::mask_mode_from_string(cmp_mode), cmp_seed);
        std::vector<double> observed;
        observed.reserve(mask.coords.size());
        for (const auto& [i, j] : mask.coords) observed.push_back(truth(i, j));
        const edmc::CompletionResult res =
            edmc::svt_complete(observed, mask, n, cmp_params, &truth);
        if (!cmp_out.empty()) {
            std::filesystem::create_directories(cmp_out);
            edmc::write_matrix_csv(cmp_out + "/estimate.csv", res.estimate, "estimate");
            edmc::write_observations_csv(cmp_out + "/observations.csv", mask, observed);
        }
        emit(edmc::to_json(res));
        return 0;
    }

    if (sec4->parsed()) {
        emit(edmc::to_json(edmc::section4_checks()));
        return 0;
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
