#include "schurlab/ddm.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "schurlab/krylov.hpp"
#include "schurlab/rng.hpp"

namespace schurlab::ddm {

namespace {

DenseMatrix symmetrize(const DenseMatrix& m) {
    DenseMatrix s(m.rows(), m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

// Linear element stiffness and load for the triangle with vertices p0 p1 p2
// (counterclockwise): K_ij = |T| grad(l_i) . grad(l_j), load_i = |T| / 3.
void p1_element(const std::array<std::array<double, 2>, 3>& p,
                std::array<std::array<double, 3>, 3>& k, double& area) {
    area = 0.5 * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) -
                  (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]));
    std::array<std::array<double, 2>, 3> g;
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        const int m = (i + 2) % 3;
        g[i] = {(p[j][1] - p[m][1]) / (2.0 * area), (p[m][0] - p[j][0]) / (2.0 * area)};
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) k[i][j] = area * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
}

struct LocalBlocks {
    DenseMatrix S;
    Vector f_cond;
    // Kept for interior back-substitution.
    DenseMatrix K_IG;
    Vector f_I;
    DenseMatrix K_II;
};

// Assembles the subdomain stiffness over non-Dirichlet nodes, eliminates
// the interior block, and returns the interface Schur complement together
// with the condensed right-hand side for the unit source.
LocalBlocks assemble_local(const Decomposition& dec, const Subdomain& sd) {
    const int side = dec.side;
    const double h = dec.h;
    std::map<int, int> index;  // gid -> position, interior first then interface
    const int ni = static_cast<int>(sd.interior.size());
    const int ng = static_cast<int>(sd.iface.size());
    for (int k = 0; k < ni; ++k) index[sd.interior[k]] = k;
    for (int k = 0; k < ng; ++k) index[sd.iface[k]] = ni + k;

    DenseMatrix k_full(ni + ng, ni + ng);
    Vector load(ni + ng, 0.0);
    const int i0 = sd.a * dec.n;
    const int j0 = sd.b * dec.n;
    for (int cj = j0; cj < j0 + dec.n; ++cj)
        for (int ci = i0; ci < i0 + dec.n; ++ci) {
            const int v00 = cj * side + ci;
            const int v10 = cj * side + ci + 1;
            const int v11 = (cj + 1) * side + ci + 1;
            const int v01 = (cj + 1) * side + ci;
            const std::array<std::array<int, 3>, 2> tris{{{v00, v10, v11}, {v00, v11, v01}}};
            for (const auto& tri : tris) {
                std::array<std::array<double, 2>, 3> p;
                for (int v = 0; v < 3; ++v)
                    p[v] = {h * (tri[v] % side), h * (tri[v] / side)};
                std::array<std::array<double, 3>, 3> ke;
                double area = 0.0;
                p1_element(p, ke, area);
                for (int a = 0; a < 3; ++a) {
                    const auto ia = index.find(tri[a]);
                    if (ia == index.end()) continue;
                    load[ia->second] += area / 3.0;
                    for (int c = 0; c < 3; ++c) {
                        const auto ic = index.find(tri[c]);
                        if (ic == index.end()) continue;
                        k_full(ia->second, ic->second) += ke[a][c];
                    }
                }
            }
        }

    LocalBlocks lb;
    lb.K_II = DenseMatrix(ni, ni);
    lb.K_IG = DenseMatrix(ni, ng);
    DenseMatrix k_gg(ng, ng);
    lb.f_I.assign(ni, 0.0);
    Vector f_g(ng, 0.0);
    for (int i = 0; i < ni; ++i) {
        lb.f_I[i] = load[i];
        for (int j = 0; j < ni; ++j) lb.K_II(i, j) = k_full(i, j);
        for (int j = 0; j < ng; ++j) lb.K_IG(i, j) = k_full(i, ni + j);
    }
    for (int i = 0; i < ng; ++i) {
        f_g[i] = load[ni + i];
        for (int j = 0; j < ng; ++j) k_gg(i, j) = k_full(ni + i, ni + j);
    }

    const CholeskyFactor chol(lb.K_II);
    const DenseMatrix x = chol.solve(lb.K_IG);  // K_II^{-1} K_IG
    lb.S = symmetrize(add(k_gg, matmul(transpose(lb.K_IG), x), -1.0));
    Vector y = chol.solve(lb.f_I);
    lb.f_cond = f_g;
    axpy(-1.0, matvec_transposed(lb.K_IG, y), lb.f_cond);
    return lb;
}

int iface_position(const Subdomain& sd, int gid) {
    const auto it = std::lower_bound(sd.iface.begin(), sd.iface.end(), gid);
    return static_cast<int>(it - sd.iface.begin());
}

} // namespace

Decomposition build_decomposition(int M, int n) {
    if (M < 2 || n < 2) throw Error("build_decomposition: need M >= 2 and n >= 2");
    Decomposition dec;
    dec.M = M;
    dec.n = n;
    dec.H = 1.0 / M;
    dec.h = 1.0 / (M * n);
    dec.side = M * n + 1;
    dec.node_mult.assign(dec.num_nodes(), 0);

    for (int b = 0; b < M; ++b)
        for (int a = 0; a < M; ++a) {
            Subdomain sd;
            sd.a = a;
            sd.b = b;
            sd.floating = a > 0 && a < M - 1 && b > 0 && b < M - 1;
            for (int j = b * n; j <= (b + 1) * n; ++j)
                for (int i = a * n; i <= (a + 1) * n; ++i) {
                    const int gid = j * dec.side + i;
                    if (dec.on_dirichlet(gid)) continue;
                    const bool on_iface =
                        i == a * n || i == (a + 1) * n || j == b * n || j == (b + 1) * n;
                    if (on_iface)
                        sd.iface.push_back(gid);
                    else
                        sd.interior.push_back(gid);
                }
            for (int gid : sd.iface) ++dec.node_mult[gid];
            dec.subs.push_back(std::move(sd));
        }

    for (int b = 1; b < M; ++b)
        for (int a = 1; a < M; ++a)
            dec.cross_points.push_back(b * n * dec.side + a * n);
    std::sort(dec.cross_points.begin(), dec.cross_points.end());
    return dec;
}

InterfaceOperator local_interface_schur(const Decomposition& dec) {
    InterfaceOperator op;
    for (const auto& sd : dec.subs) {
        const LocalBlocks lb = assemble_local(dec, sd);
        op.offset.push_back(op.total);
        op.total += lb.S.rows();
        op.S_blocks.push_back(lb.S);
        op.f_blocks.push_back(lb.f_cond);
        op.null_flags.push_back(sd.floating);
    }
    return op;
}

JumpOperators build_jump_operators(const Decomposition& dec, Mode mode) {
    const int J = static_cast<int>(dec.subs.size());
    std::vector<int> offset(J, 0);

    if (mode == Mode::FETI) {
        int total = 0;
        for (int j = 0; j < J; ++j) {
            offset[j] = total;
            total += static_cast<int>(dec.subs[j].iface.size());
        }
        // Group the shared nodes with the subdomains holding them.
        std::map<int, std::vector<int>> owners;
        for (int j = 0; j < J; ++j)
            for (int gid : dec.subs[j].iface) owners[gid].push_back(j);

        int rows = 0;
        for (const auto& [gid, subs] : owners) rows += static_cast<int>(subs.size()) - 1;

        JumpOperators out;
        out.B = DenseMatrix(rows, total);
        out.B_D = DenseMatrix(rows, total);
        int r = 0;
        for (const auto& [gid, subs] : owners) {
            const int k = static_cast<int>(subs.size());
            if (k < 2) continue;
            std::vector<int> cols(k);
            for (int t = 0; t < k; ++t)
                cols[t] = offset[subs[t]] + iface_position(dec.subs[subs[t]], gid);
            // Chain constraints along the subdomain-index ordering.
            DenseMatrix bn(k - 1, k);
            for (int t = 0; t < k - 1; ++t) {
                bn(t, t) = 1.0;
                bn(t, t + 1) = -1.0;
            }
            // Per-node scaling block (Bn Bn^t)^{-1} Bn, the unique choice
            // with row space equal to Bn's and B B_D^t = I. It reduces to
            // halving for two subdomains.
            const DenseMatrix gram = matmul(bn, transpose(bn));
            const DenseMatrix bd = lu_solve(gram, bn);
            for (int t = 0; t < k - 1; ++t)
                for (int c = 0; c < k; ++c) {
                    out.B(r + t, cols[c]) = bn(t, c);
                    out.B_D(r + t, cols[c]) = bd(t, c);
                }
            r += k - 1;
        }
        if (rank(out.B) != rows)
            throw RankDeficient("build_jump_operators: jump operator lost rank");
        return out;
    }

    // Dual-primal mode: columns over the corner-subassembled layout, rows
    // only for the edge-interior (multiplicity 2) nodes.
    const int primal = static_cast<int>(dec.cross_points.size());
    std::vector<int> dual_count(J, 0);
    int total = primal;
    for (int j = 0; j < J; ++j) {
        offset[j] = total;
        for (int gid : dec.subs[j].iface)
            if (!std::binary_search(dec.cross_points.begin(), dec.cross_points.end(), gid))
                ++dual_count[j];
        total += dual_count[j];
    }
    auto dual_index = [&](int j, int gid) {
        int pos = 0;
        for (int g : dec.subs[j].iface) {
            if (g == gid) return offset[j] + pos;
            if (!std::binary_search(dec.cross_points.begin(), dec.cross_points.end(), g)) ++pos;
        }
        throw Error("build_jump_operators: node not found in subdomain");
    };

    std::map<int, std::vector<int>> owners;
    for (int j = 0; j < J; ++j)
        for (int gid : dec.subs[j].iface)
            if (!std::binary_search(dec.cross_points.begin(), dec.cross_points.end(), gid))
                owners[gid].push_back(j);

    int rows = 0;
    for (const auto& [gid, subs] : owners)
        if (subs.size() == 2) ++rows;

    JumpOperators out;
    out.B = DenseMatrix(rows, total);
    int r = 0;
    for (const auto& [gid, subs] : owners) {
        if (subs.size() != 2)
            throw RankDeficient("build_jump_operators: unexpected node multiplicity");
        out.B(r, dual_index(subs[0], gid)) = 1.0;
        out.B(r, dual_index(subs[1], gid)) = -1.0;
        ++r;
    }
    out.B_D = scale(out.B, 0.5);
    return out;
}

FetiAssembly feti_assembly(const Decomposition& dec) {
    FetiAssembly fa;
    fa.iface = local_interface_schur(dec);
    JumpOperators jumps = build_jump_operators(dec, Mode::FETI);

    DenseMatrix s(fa.iface.total, fa.iface.total);
    Vector f(fa.iface.total, 0.0);
    for (std::size_t j = 0; j < fa.iface.S_blocks.size(); ++j) {
        const int o = fa.iface.offset[j];
        const DenseMatrix& sj = fa.iface.S_blocks[j];
        for (int a = 0; a < sj.rows(); ++a) {
            f[o + a] = fa.iface.f_blocks[j][a];
            for (int c = 0; c < sj.rows(); ++c) s(o + a, o + c) = sj(a, c);
        }
    }
    const Vector g(jumps.B.rows(), 0.0);
    fa.sys = validate(s, jumps.B, f, g);
    fa.red = fa.sys.kind == SystemKind::SemiSPD ? projected_schur(fa.sys) : schur(fa.sys);
    fa.B_D = std::move(jumps.B_D);
    return fa;
}

DenseMatrix feti_preconditioner(const FetiAssembly& fa) {
    const DenseMatrix pbd = matmul(fa.red.P, fa.B_D);
    const DenseMatrix full = symmetrize(matmul(matmul(pbd, fa.sys.A), transpose(pbd)));
    return symmetrize(
        matmul(matmul(transpose(fa.red.W0_basis), full), fa.red.W0_basis));
}

FetidpAssembly fetidp_assembly(const Decomposition& dec) {
    FetidpAssembly fa;
    fa.iface = local_interface_schur(dec);
    JumpOperators jumps = build_jump_operators(dec, Mode::FETIDP);
    fa.primal = static_cast<int>(dec.cross_points.size());

    const int J = static_cast<int>(dec.subs.size());
    const int total = jumps.B.cols();
    // Subassembled index per (subdomain, local interface dof).
    std::vector<std::vector<int>> assem(J);
    {
        int next = fa.primal;
        for (int j = 0; j < J; ++j) {
            assem[j].resize(dec.subs[j].iface.size());
            for (std::size_t k = 0; k < dec.subs[j].iface.size(); ++k) {
                const int gid = dec.subs[j].iface[k];
                const auto it =
                    std::lower_bound(dec.cross_points.begin(), dec.cross_points.end(), gid);
                if (it != dec.cross_points.end() && *it == gid)
                    assem[j][k] = static_cast<int>(it - dec.cross_points.begin());
                else
                    assem[j][k] = next++;
            }
        }
        if (next != total) throw Error("fetidp_assembly: layout mismatch");
    }

    fa.Stilde = DenseMatrix(total, total);
    for (int j = 0; j < J; ++j) {
        const DenseMatrix& sj = fa.iface.S_blocks[j];
        for (int a = 0; a < sj.rows(); ++a)
            for (int c = 0; c < sj.rows(); ++c)
                fa.Stilde(assem[j][a], assem[j][c]) += sj(a, c);
    }
    fa.Stilde = symmetrize(fa.Stilde);

    try {
        fa.F = symmetrize(matmul(jumps.B, cholesky_solve(fa.Stilde, transpose(jumps.B))));
    } catch (const NotSPD&) {
        throw NotSPD("fetidp_assembly: subassembled operator is singular; "
                     "cross-point identification is broken");
    }
    fa.B = std::move(jumps.B);
    fa.B_D = std::move(jumps.B_D);
    return fa;
}

DenseMatrix fetidp_preconditioner(const FetidpAssembly& fa) {
    return symmetrize(scale(matmul(fa.B, matmul(fa.Stilde, transpose(fa.B))), 0.25));
}

Vector direct_poisson_solve(const Decomposition& dec) {
    const int side = dec.side;
    const double h = dec.h;
    std::vector<int> free_index(dec.num_nodes(), -1);
    int nfree = 0;
    for (int gid = 0; gid < dec.num_nodes(); ++gid)
        if (!dec.on_dirichlet(gid)) free_index[gid] = nfree++;

    DenseMatrix k(nfree, nfree);
    Vector load(nfree, 0.0);
    const int cells = dec.M * dec.n;
    for (int cj = 0; cj < cells; ++cj)
        for (int ci = 0; ci < cells; ++ci) {
            const int v00 = cj * side + ci;
            const int v10 = cj * side + ci + 1;
            const int v11 = (cj + 1) * side + ci + 1;
            const int v01 = (cj + 1) * side + ci;
            const std::array<std::array<int, 3>, 2> tris{{{v00, v10, v11}, {v00, v11, v01}}};
            for (const auto& tri : tris) {
                std::array<std::array<double, 2>, 3> p;
                for (int v = 0; v < 3; ++v)
                    p[v] = {h * (tri[v] % side), h * (tri[v] / side)};
                std::array<std::array<double, 3>, 3> ke;
                double area = 0.0;
                p1_element(p, ke, area);
                for (int a = 0; a < 3; ++a) {
                    const int fa = free_index[tri[a]];
                    if (fa < 0) continue;
                    load[fa] += area / 3.0;
                    for (int c = 0; c < 3; ++c) {
                        const int fc = free_index[tri[c]];
                        if (fc >= 0) k(fa, fc) += ke[a][c];
                    }
                }
            }
        }
    const Vector x = cholesky_solve(k, load);
    Vector out(dec.num_nodes(), 0.0);
    for (int gid = 0; gid < dec.num_nodes(); ++gid)
        if (free_index[gid] >= 0) out[gid] = x[free_index[gid]];
    return out;
}

Vector feti_solve_global(const Decomposition& dec) {
    const FetiAssembly fa = feti_assembly(dec);
    const Vector p0 = cholesky_solve(fa.red.S_or_S0, fa.red.d_or_d0);
    const SaddleSolution sol = back_substitute(fa.sys, fa.red, p0);

    Vector out(dec.num_nodes(), 0.0);
    for (std::size_t j = 0; j < dec.subs.size(); ++j) {
        const Subdomain& sd = dec.subs[j];
        const int o = fa.iface.offset[j];
        const int ng = static_cast<int>(sd.iface.size());
        Vector u_g(ng);
        for (int k = 0; k < ng; ++k) {
            u_g[k] = sol.u[o + k];
            out[sd.iface[k]] = u_g[k];
        }
        const LocalBlocks lb = assemble_local(dec, sd);
        Vector rhs = lb.f_I;
        axpy(-1.0, matvec(lb.K_IG, u_g), rhs);
        const Vector u_i = cholesky_solve(lb.K_II, rhs);
        for (std::size_t k = 0; k < sd.interior.size(); ++k) out[sd.interior[k]] = u_i[k];
    }
    return out;
}

std::vector<DdmRow> ddm_sweep(Mode method, bool preconditioned,
                              const std::vector<int>& M_list,
                              const std::vector<int>& n_list,
                              std::uint64_t seed) {
    if (M_list.empty() || n_list.empty()) throw Error("ddm_sweep: empty sweep lists");
    std::vector<DdmRow> rows;
    for (int M : M_list)
        for (int n : n_list) {
            const Decomposition dec = build_decomposition(M, n);
            DenseMatrix op;
            DenseMatrix precond;
            if (method == Mode::FETI) {
                const FetiAssembly fa = feti_assembly(dec);
                op = fa.red.S_or_S0;
                if (preconditioned) precond = feti_preconditioner(fa);
            } else {
                const FetidpAssembly fa = fetidp_assembly(dec);
                op = fa.F;
                if (preconditioned) precond = fetidp_preconditioner(fa);
            }

            DdmRow row;
            row.method = method;
            row.preconditioned = preconditioned;
            row.M = M;
            row.n = n;
            row.H_over_h = n;
            if (preconditioned) {
                const DenseMatrix lh = spd_sqrt(precond);
                const SymEig eig = sym_eig(symmetrize(matmul(matmul(lh, op), lh)));
                row.lambda_min = eig.eigenvalues.front();
                row.lambda_max = eig.eigenvalues.back();
            } else {
                const SymEig eig = sym_eig(op);
                row.lambda_min = eig.eigenvalues.front();
                row.lambda_max = eig.eigenvalues.back();
            }
            row.kappa = row.lambda_max / row.lambda_min;

            SplitMix64 rng(seed * 1000003ull + static_cast<std::uint64_t>(M) * 101ull +
                           static_cast<std::uint64_t>(n));
            Vector rhs(op.rows());
            for (double& x : rhs) x = rng.uniform(-1.0, 1.0);
            const krylov::KrylovResult cg_res = krylov::cg(
                krylov::matrix_apply(op), rhs, 1e-8, 20000,
                preconditioned ? krylov::matrix_apply(precond) : krylov::ApplyFn());
            row.cg_iters = cg_res.trace.iterations;
            rows.push_back(row);
        }
    return rows;
}

} // namespace schurlab::ddm
