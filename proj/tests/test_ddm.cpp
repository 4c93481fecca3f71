#include <cmath>

#include "doctest.h"
#include "schurlab/ddm.hpp"
#include "schurlab/spectra.hpp"

using namespace schurlab;
using namespace schurlab::ddm;

TEST_CASE("decomposition: counting and floating classification") {
    const Decomposition d22 = build_decomposition(2, 2);
    CHECK(d22.subs.size() == 4);
    CHECK(d22.cross_points.size() == 1);
    for (const auto& sd : d22.subs) CHECK_FALSE(sd.floating);

    const Decomposition d32 = build_decomposition(3, 2);
    int floating = 0;
    for (const auto& sd : d32.subs) floating += sd.floating;
    CHECK(floating == 1);
    CHECK(d32.subs[4].floating);  // center of the 3x3 grid

    CHECK_THROWS_AS(build_decomposition(1, 2), Error);
}

TEST_CASE("interface schur blocks: symmetry, definiteness, null spaces") {
    const Decomposition dec = build_decomposition(3, 4);
    const InterfaceOperator op = local_interface_schur(dec);
    for (std::size_t j = 0; j < op.S_blocks.size(); ++j) {
        const DenseMatrix& s = op.S_blocks[j];
        CHECK(symmetry_defect(s) < 1e-10);
        const SymEig eig = sym_eig(s);
        if (op.null_flags[j]) {
            // Floating: exactly the constants are annihilated.
            Vector ones(s.rows(), 1.0);
            CHECK(norm2(matvec(s, ones)) < 1e-10 * frob_norm(s));
            CHECK(eig.eigenvalues[0] < 1e-10 * eig.eigenvalues.back());
            CHECK(eig.eigenvalues[1] > 1e-6 * eig.eigenvalues.back());
        } else {
            CHECK(eig.eigenvalues.front() > 0.0);
        }
    }
}

TEST_CASE("jump operators: rank, incidence, scaling identity") {
    for (int M : {2, 3, 4}) {
        const Decomposition dec = build_decomposition(M, 2);
        const JumpOperators feti = build_jump_operators(dec, Mode::FETI);
        // Every row has exactly one +1 and one -1.
        for (int r = 0; r < feti.B.rows(); ++r) {
            int plus = 0, minus = 0, other = 0;
            for (int c = 0; c < feti.B.cols(); ++c) {
                if (feti.B(r, c) == 1.0) ++plus;
                else if (feti.B(r, c) == -1.0) ++minus;
                else if (feti.B(r, c) != 0.0) ++other;
            }
            CHECK(plus == 1);
            CHECK(minus == 1);
            CHECK(other == 0);
        }
        CHECK(rank(feti.B) == feti.B.rows());

        // B B_D^t = I.
        const DenseMatrix prod = matmul(feti.B, transpose(feti.B_D));
        CHECK(frob_norm(add(prod, DenseMatrix::identity(feti.B.rows()), -1.0)) < 1e-12);

        // Eigenvalues of B B^t stay in the expected band.
        const SymEig eig = sym_eig(matmul(feti.B, transpose(feti.B)));
        CHECK(eig.eigenvalues.front() >= 0.5);
        CHECK(eig.eigenvalues.back() <= 4.0);

        const JumpOperators dp = build_jump_operators(dec, Mode::FETIDP);
        const DenseMatrix bbt = matmul(dp.B, transpose(dp.B));
        for (int i = 0; i < bbt.rows(); ++i)
            for (int j = 0; j < bbt.cols(); ++j)
                CHECK(bbt(i, j) == (i == j ? 2.0 : 0.0));  // exact integer arithmetic
        const DenseMatrix dprod = matmul(dp.B, transpose(dp.B_D));
        CHECK(frob_norm(add(dprod, DenseMatrix::identity(dp.B.rows()), -1.0)) < 1e-12);
    }
}

TEST_CASE("feti: projector structure and operator definiteness") {
    const Decomposition dec = build_decomposition(3, 4);
    const FetiAssembly fa = feti_assembly(dec);
    CHECK(fa.sys.kind == SystemKind::SemiSPD);
    CHECK(fa.red.N.cols() == 1);  // one floating subdomain

    // P kills the range of B restricted to the null space of S.
    const DenseMatrix bn = matmul(fa.sys.B, fa.red.N);
    CHECK(frob_norm(matmul(fa.red.P, bn)) < 1e-10 * std::max(1.0, frob_norm(bn)));

    const SymEig eig = sym_eig(fa.red.S_or_S0);
    CHECK(eig.eigenvalues.front() > 0.0);

    // M = 2: no floating subdomains, plain SPD dual operator.
    const FetiAssembly fa2 = feti_assembly(build_decomposition(2, 4));
    CHECK(fa2.sys.kind == SystemKind::SPD);
    const SymEig eig2 = sym_eig(fa2.red.S_or_S0);
    CHECK(eig2.eigenvalues.front() > 0.0);

    // Preconditioning helps in the M = 2 case.
    const DenseMatrix l2 = feti_preconditioner(fa2);
    const DenseMatrix lh = spd_sqrt(l2);
    const SymEig peig = sym_eig(matmul(matmul(lh, fa2.red.S_or_S0), lh));
    const double kappa_plain = eig2.eigenvalues.back() / eig2.eigenvalues.front();
    const double kappa_prec = peig.eigenvalues.back() / peig.eigenvalues.front();
    CHECK(kappa_prec <= kappa_plain);
    CHECK(peig.eigenvalues.front() >= 1.0 - 1e-8);
}

TEST_CASE("feti solution matches the direct global solve") {
    for (int M : {2, 3}) {
        const Decomposition dec = build_decomposition(M, 4);
        const Vector direct = direct_poisson_solve(dec);
        const Vector feti = feti_solve_global(dec);
        double diff = 0.0, ref = 0.0;
        for (std::size_t i = 0; i < direct.size(); ++i) {
            diff += (direct[i] - feti[i]) * (direct[i] - feti[i]);
            ref += direct[i] * direct[i];
        }
        CHECK(std::sqrt(diff) <= 1e-7 * std::sqrt(ref));
    }
}

TEST_CASE("fetidp: subassembled operator is SPD and floors hold") {
    const Decomposition dec = build_decomposition(3, 4);
    const FetidpAssembly fa = fetidp_assembly(dec);
    const SymEig seig = sym_eig(fa.Stilde);
    CHECK(seig.eigenvalues.front() > 0.0);
    const SymEig feig = sym_eig(fa.F);
    CHECK(feig.eigenvalues.front() > 0.0);

    const DenseMatrix l = fetidp_preconditioner(fa);
    const DenseMatrix lh = spd_sqrt(l);
    const SymEig peig = sym_eig(matmul(matmul(lh, fa.F), lh));
    CHECK(peig.eigenvalues.front() >= 1.0 - 1e-8);

    // Smallest case is well posed too.
    const FetidpAssembly small = fetidp_assembly(build_decomposition(2, 2));
    CHECK(sym_eig(small.Stilde).eigenvalues.front() > 0.0);
}

TEST_CASE("sweeps: growth trends and iteration counts") {
    const std::vector<int> n_list{2, 4, 8};
    const auto feti_rows = ddm_sweep(Mode::FETI, false, {3}, n_list, 7);
    double lo = 1e300, hi = 0.0;
    for (const auto& r : feti_rows) {
        const double v = r.kappa / r.H_over_h;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
        CHECK(r.cg_iters > 0);
    }
    CHECK(hi <= 4.0 * lo);

    const auto prec_rows = ddm_sweep(Mode::FETI, true, {3}, n_list, 7);
    for (const auto& r : prec_rows) CHECK(r.lambda_min >= 1.0 - 1e-8);
    // Preconditioned iteration counts do not exceed the plain ones.
    for (std::size_t i = 0; i < prec_rows.size(); ++i)
        CHECK(prec_rows[i].cg_iters <= feti_rows[i].cg_iters);

    const auto dp_rows = ddm_sweep(Mode::FETIDP, false, {3}, n_list, 7);
    lo = 1e300;
    hi = 0.0;
    for (const auto& r : dp_rows) {
        const double v = r.kappa / (r.H_over_h * (1.0 + std::log(r.H_over_h)));
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi <= 4.0 * lo);

    const auto dp_prec = ddm_sweep(Mode::FETIDP, true, {3}, n_list, 7);
    for (const auto& r : dp_prec) CHECK(r.lambda_min >= 1.0 - 1e-8);
    const double growth = std::pow((1.0 + std::log(8.0)) / (1.0 + std::log(2.0)), 2);
    CHECK(dp_prec.back().kappa <= dp_prec.front().kappa * growth * 1.5);
}
