#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "schurlab/csv.hpp"
#include "schurlab/ddm.hpp"
#include "schurlab/krylov.hpp"
#include "schurlab/mixedfem.hpp"
#include "schurlab/mmio.hpp"
#include "schurlab/rng.hpp"
#include "schurlab/spectra.hpp"

namespace fs = std::filesystem;
using namespace schurlab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertionFailed = 1;
constexpr int kExitConfigError = 2;

fs::path output_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("SCHURLAB_OUT")) return env;
    return ".";
}

bool rel_agree(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

// Bbar = (B B^t)^{-1} B, so that Bbar^t is the minimum-norm right inverse.
DenseMatrix min_norm_right_inverse(const DenseMatrix& b) {
    const DenseMatrix gram = matmul(b, transpose(b));
    return cholesky_solve(gram, b);
}

int run_verify(int trials, std::uint64_t seed, const fs::path& out) {
    if (trials <= 0) {
        std::fprintf(stderr, "verify: trials must be positive\n");
        return kExitConfigError;
    }
    csv::Writer w;
    w.meta("command", "verify");
    w.meta("trials", std::to_string(trials));
    w.meta("seed", std::to_string(seed));
    w.header({"trial", "kind", "op", "lmin_direct", "lmax_direct", "lmin_oracle",
              "lmax_oracle", "pass"});
    bool all_pass = true;
    auto emit = [&](int trial, const char* kind, const std::string& op,
                    const spectra::SpectralReport& a, const spectra::SpectralReport& b,
                    bool pass) {
        w.cell(trial);
        w.cell(std::string(kind));
        w.cell(op);
        w.cell(a.lambda_min);
        w.cell(a.lambda_max);
        w.cell(b.lambda_min);
        w.cell(b.lambda_max);
        w.cell(std::string(pass ? "1" : "0"));
        w.end_row();
        all_pass = all_pass && pass;
    };
    auto routes_pass = [&](const spectra::SpectralReport& a, const spectra::SpectralReport& b) {
        return rel_agree(a.lambda_min, b.lambda_min, 1e-8) &&
               rel_agree(a.lambda_max, b.lambda_max, 1e-8);
    };

    for (int t = 0; t < trials; ++t) {
        SplitMix64 rng(seed + static_cast<std::uint64_t>(t));
        const int n = 4 + static_cast<int>(rng.next() % 9);               // <= 12
        const int m = 2 + static_cast<int>(rng.next() % std::min<std::uint64_t>(7, n - 3));
        const std::uint64_t sys_seed = rng.next();

        const SaddleSystem spd = random_spd_system(n, m, sys_seed);
        {
            const auto [direct, oracle] = spectra::eigs_schur(spd);
            emit(t, "SPD", "S", direct, oracle, routes_pass(direct, oracle));

            const auto [lower, upper] = spectra::bounds_cor_schur(spd);
            const bool sandwich = direct.lambda_min >= lower * (1.0 - 1e-10) &&
                                  direct.lambda_max <= upper * (1.0 + 1e-10);
            emit(t, "SPD", "S_bounds",
                 spectra::report_from_extremes(lower, upper, spectra::Route::DirectEig, "cor"),
                 direct, sandwich);

            const DenseMatrix L = random_spd(m, sys_seed ^ 0x9e3779b97f4a7c15ull);
            const auto [ld, lo] = spectra::eigs_schur_preconditioned(spd, L);
            emit(t, "SPD", "LS", ld, lo, routes_pass(ld, lo));

            const DenseMatrix bbar = min_norm_right_inverse(spd.B);
            const auto rep = spectra::eigs_right_inverse_preconditioner(spd, bbar);
            emit(t, "SPD", "LS_rightinv", rep, rep, rep.lambda_min >= 1.0 - 1e-9);
        }

        // Keep null_dim < m so the projected multiplier space is nontrivial.
        const int null_dim = (m >= 3) ? 1 + static_cast<int>(sys_seed % 2) : 1;
        const SaddleSystem semi = random_semispd_system(n + 1, m, null_dim, sys_seed + 1);
        {
            const DualReduction red = projected_schur(semi);
            const auto [direct, oracle] = spectra::eigs_projected_schur(semi, red);
            emit(t, "SemiSPD", "S0", direct, oracle, routes_pass(direct, oracle));

            const int m0 = red.S_or_S0.rows();
            const DenseMatrix L = random_spd(m0, sys_seed ^ 0xdeadbeefull);
            const auto [ld, lo] =
                spectra::eigs_projected_schur_preconditioned_routes(semi, red, L);
            emit(t, "SemiSPD", "LS0", ld, lo, routes_pass(ld, lo));

            const DenseMatrix bbar = min_norm_right_inverse(semi.B);
            const DenseMatrix lproj =
                spectra::projected_right_inverse_preconditioner(semi, red, bbar);
            const auto rep =
                spectra::eigs_projected_schur_preconditioned(semi, red, lproj, false);
            emit(t, "SemiSPD", "LS0_rightinv", rep, rep, rep.lambda_min >= 1.0 - 1e-9);
        }
    }
    fs::create_directories(out);
    w.save((out / "verify.csv").string());
    return all_pass ? kExitOk : kExitAssertionFailed;
}

int run_alm(std::vector<double> eps_grid, int n, int m, std::uint64_t seed, const fs::path& out) {
    if (eps_grid.empty() || n <= 0 || m <= 0 || m > n) {
        std::fprintf(stderr, "alm: invalid configuration\n");
        return kExitConfigError;
    }
    for (double e : eps_grid)
        if (e <= 0.0) {
            std::fprintf(stderr, "alm: epsilon values must be positive\n");
            return kExitConfigError;
        }
    std::sort(eps_grid.begin(), eps_grid.end());

    const SaddleSystem sys = random_spd_system(n, m, seed);
    csv::Writer w;
    w.meta("command", "alm");
    w.meta("seed", std::to_string(seed));
    w.header({"epsilon", "lambda_min_S", "lambda_max_S", "lambda_min_Seps", "lambda_max_Seps",
              "contraction", "measured_contraction", "kappa_Seps"});
    bool ok = true;
    double prev_kappa = 0.0;
    for (double eps : eps_grid) {
        const krylov::AlmDiagnostics d = krylov::alm_diagnostics(sys, eps);
        const double measured = krylov::measure_alm_contraction(sys, eps);
        w.cell(eps);
        w.cell(d.lambda_min_S);
        w.cell(d.lambda_max_S);
        w.cell(d.lambda_min_Seps);
        w.cell(d.lambda_max_Seps);
        w.cell(d.contraction);
        w.cell(measured);
        w.cell(d.kappa_Seps);
        w.end_row();
        ok = ok && std::abs(measured - d.contraction) <= 1e-6;
        ok = ok && d.kappa_Seps >= prev_kappa * (1.0 - 1e-12);  // monotone in epsilon
        prev_kappa = d.kappa_Seps;
    }
    fs::create_directories(out);
    w.save((out / "alm.csv").string());
    return ok ? kExitOk : kExitAssertionFailed;
}

void save_kappa_sweep(const mixedfem::KappaSweep& sweep, const char* cmd, const fs::path& out,
                      const std::string& file) {
    csv::Writer w;
    w.meta("command", cmd);
    w.meta("slope", csv::fmt(sweep.slope));
    w.header({"n", "h", "lambda_min", "lambda_max", "kappa"});
    for (const auto& r : sweep.rows) {
        w.cell(r.n);
        w.cell(r.h);
        w.cell(r.lambda_min);
        w.cell(r.lambda_max);
        w.cell(r.kappa);
        w.end_row();
    }
    fs::create_directories(out);
    w.save((out / file).string());
}

int run_darcy(const std::vector<int>& n_list, const fs::path& out) {
    if (n_list.size() < 2 || !std::is_sorted(n_list.begin(), n_list.end())) {
        std::fprintf(stderr, "darcy: need an increasing list of at least two mesh sizes\n");
        return kExitConfigError;
    }
    const mixedfem::KappaSweep sweep = mixedfem::darcy_kappa_sweep(n_list);
    save_kappa_sweep(sweep, "darcy", out, "darcy.csv");
    bool ok = sweep.slope >= -2.3 && sweep.slope <= -1.5;
    // lambda_min scales like h^2: the normalized column stays bounded below.
    double lo = 1e300, hi = 0.0;
    for (const auto& r : sweep.rows) {
        const double v = r.lambda_min / (r.h * r.h);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    ok = ok && hi <= 4.0 * lo;
    return ok ? kExitOk : kExitAssertionFailed;
}

int run_stokes(const std::vector<int>& n_list, const fs::path& out) {
    if (n_list.size() < 2 || !std::is_sorted(n_list.begin(), n_list.end())) {
        std::fprintf(stderr, "stokes: need an increasing list of at least two mesh sizes\n");
        return kExitConfigError;
    }
    try {
        const mixedfem::KappaSweep sweep = mixedfem::stokes_kappa_sweep(n_list);
        save_kappa_sweep(sweep, "stokes", out, "stokes.csv");
    } catch (const Error& e) {
        std::fprintf(stderr, "stokes: %s\n", e.what());
        return kExitAssertionFailed;
    }
    return kExitOk;
}

int run_ddm(ddm::Mode mode, bool precond, const std::vector<int>& M_list,
            const std::vector<int>& n_list, std::uint64_t seed, const fs::path& out) {
    if (M_list.empty() || n_list.empty()) {
        std::fprintf(stderr, "ddm: sweep lists must be nonempty\n");
        return kExitConfigError;
    }
    const auto rows = ddm::ddm_sweep(mode, precond, M_list, n_list, seed);
    csv::Writer w;
    w.meta("command", mode == ddm::Mode::FETI ? "feti" : "fetidp");
    w.meta("seed", std::to_string(seed));
    w.header({"method", "preconditioned", "M", "n", "H_over_h", "lambda_min", "lambda_max",
              "kappa", "cg_iters", "seed"});
    for (const auto& r : rows) {
        w.cell(std::string(r.method == ddm::Mode::FETI ? "FETI" : "FETIDP"));
        w.cell(r.preconditioned ? 1 : 0);
        w.cell(r.M);
        w.cell(r.n);
        w.cell(r.H_over_h);
        w.cell(r.lambda_min);
        w.cell(r.lambda_max);
        w.cell(r.kappa);
        w.cell(r.cg_iters);
        w.cell(static_cast<long>(seed));
        w.end_row();
    }
    fs::create_directories(out);
    w.save((out / (std::string(mode == ddm::Mode::FETI ? "feti" : "fetidp") + ".csv")).string());

    bool ok = true;
    for (int M : M_list) {
        std::vector<ddm::DdmRow> group;
        for (const auto& r : rows)
            if (r.M == M) group.push_back(r);
        if (group.size() < 2) continue;
        if (precond) {
            for (const auto& r : group) ok = ok && r.lambda_min >= 1.0 - 1e-8;
            const auto& a = group.front();
            const auto& b = group.back();
            const double growth =
                std::pow((1.0 + std::log(b.H_over_h)) / (1.0 + std::log(a.H_over_h)), 2);
            ok = ok && b.kappa <= a.kappa * growth * 1.5;
        } else {
            double lo = 1e300, hi = 0.0;
            for (const auto& r : group) {
                const double norm = mode == ddm::Mode::FETI
                                        ? r.H_over_h
                                        : r.H_over_h * (1.0 + std::log(r.H_over_h));
                const double v = r.kappa / norm;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            ok = ok && hi <= 4.0 * lo;
        }
    }
    return ok ? kExitOk : kExitAssertionFailed;
}

int run_solve(const std::string& dir, const std::string& strategy, double tol, double eps,
              const fs::path& out) {
    SaddleSystem sys = load_system(dir);
    SaddleSolution sol;
    krylov::IterationTrace trace;

    if (strategy == "direct") {
        sol = solve_direct(sys);
    } else if (strategy == "schur-cg") {
        const DualReduction red =
            sys.kind == SystemKind::SPD ? schur(sys) : projected_schur(sys);
        const krylov::KrylovResult r = krylov::cg(
            krylov::matrix_apply(red.S_or_S0), red.d_or_d0, tol, 100000);
        trace = r.trace;
        sol = back_substitute(sys, red, r.solution);
    } else if (strategy == "alm") {
        const krylov::AlmResult r =
            krylov::alm_iterate(sys, eps, Vector(sys.m(), 0.0), tol, 1000000);
        trace = r.trace;
        sol = r.solution;
    } else if (strategy == "minres-mgw") {
        const krylov::KrylovResult r = krylov::minres_mgw(sys, tol, 100000);
        trace = r.trace;
        sol = krylov::solve_minres_mgw(sys, tol, 100000);
    } else {
        std::fprintf(stderr, "solve: unknown strategy %s\n", strategy.c_str());
        return kExitConfigError;
    }

    fs::create_directories(out);
    mmio::write_vector(out / "u.mtx", sol.u);
    mmio::write_vector(out / "p.mtx", sol.p);
    csv::Writer w;
    w.meta("command", "solve");
    w.meta("strategy", strategy);
    w.meta("residual_primal", csv::fmt(sol.residual_primal));
    w.meta("residual_dual", csv::fmt(sol.residual_dual));
    w.header({"iteration", "residual"});
    for (std::size_t k = 0; k < trace.residual_norms.size(); ++k) {
        w.cell(static_cast<long>(k));
        w.cell(trace.residual_norms[k]);
        w.end_row();
    }
    w.save((out / "trace.csv").string());
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Saddle point spectral analysis and experiment runner"};
    app.require_subcommand(1);

    std::string out_flag;
    app.add_option("--out", out_flag, "output directory (overrides SCHURLAB_OUT)");

    int trials = 50;
    std::uint64_t seed = 1;
    auto* verify = app.add_subcommand("verify", "spectral identity suite on random systems");
    verify->add_option("--trials", trials, "number of random systems");
    verify->add_option("--seed", seed, "base seed");

    std::vector<double> eps_grid{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0};
    int alm_n = 8, alm_m = 3;
    auto* alm = app.add_subcommand("alm", "augmented Lagrangian diagnostics grid");
    alm->add_option("--eps", eps_grid, "penalty grid")->delimiter(',');
    alm->add_option("--n", alm_n, "primal dimension");
    alm->add_option("--m", alm_m, "constraint count");
    alm->add_option("--seed", seed, "system seed");

    std::vector<int> mesh_list{4, 8, 16, 32};
    auto* darcy = app.add_subcommand("darcy", "flux-pressure condition number sweep");
    darcy->add_option("--n", mesh_list, "mesh sizes")->delimiter(',');

    std::vector<int> stokes_list{4, 8, 16};
    auto* stokes = app.add_subcommand("stokes", "velocity-pressure condition number sweep");
    stokes->add_option("--n", stokes_list, "mesh sizes")->delimiter(',');

    std::vector<int> M_list{3};
    std::vector<int> sub_list{2, 4, 8, 16};
    bool precond = false;
    auto* feti = app.add_subcommand("feti", "dual domain decomposition sweep");
    feti->add_option("--M", M_list, "subdomains per side")->delimiter(',');
    feti->add_option("--n", sub_list, "cells per subdomain side")->delimiter(',');
    feti->add_flag("--precond", precond, "apply the scaled Dirichlet preconditioner");
    feti->add_option("--seed", seed, "rhs seed");

    auto* fetidp = app.add_subcommand("fetidp", "dual-primal domain decomposition sweep");
    fetidp->add_option("--M", M_list, "subdomains per side")->delimiter(',');
    fetidp->add_option("--n", sub_list, "cells per subdomain side")->delimiter(',');
    fetidp->add_flag("--precond", precond, "apply the Dirichlet preconditioner");
    fetidp->add_option("--seed", seed, "rhs seed");

    std::string sys_dir;
    std::string strategy = "direct";
    double tol = 1e-10;
    double alm_eps = 1e-2;
    auto* solve = app.add_subcommand("solve", "solve a saddle point system from disk");
    solve->add_option("--dir", sys_dir, "system directory")->required();
    solve->add_option("--strategy", strategy, "direct | schur-cg | alm | minres-mgw");
    solve->add_option("--tol", tol, "iterative tolerance");
    solve->add_option("--eps", alm_eps, "augmented Lagrangian penalty");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfigError;
    }

    const fs::path out = output_dir(out_flag);
    try {
        if (verify->parsed()) return run_verify(trials, seed, out);
        if (alm->parsed()) return run_alm(eps_grid, alm_n, alm_m, seed, out);
        if (darcy->parsed()) return run_darcy(mesh_list, out);
        if (stokes->parsed()) return run_stokes(stokes_list, out);
        if (feti->parsed()) return run_ddm(ddm::Mode::FETI, precond, M_list, sub_list, seed, out);
        if (fetidp->parsed())
            return run_ddm(ddm::Mode::FETIDP, precond, M_list, sub_list, seed, out);
        if (solve->parsed()) return run_solve(sys_dir, strategy, tol, alm_eps, out);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfigError;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAssertionFailed;
    }
    return kExitConfigError;
}
