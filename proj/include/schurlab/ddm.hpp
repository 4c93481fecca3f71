#pragma once

#include <cstdint>

#include "schurlab/saddle.hpp"

namespace schurlab::ddm {

enum class Mode { FETI, FETIDP };

/// Structured M x M decomposition of the unit square Poisson problem with
/// homogeneous Dirichlet boundary, linear elements on a per-subdomain n x n
/// grid of squares split into triangle pairs. H = 1/M, h = 1/(M n).
struct Subdomain {
    int a = 0, b = 0;            // grid position
    bool floating = false;       // closure does not touch the domain boundary
    std::vector<int> interior;   // global fine-node ids strictly inside
    std::vector<int> iface;      // boundary-of-subdomain ids off the Dirichlet boundary, sorted
};

struct Decomposition {
    int M = 0, n = 0;
    double H = 0.0, h = 0.0;
    int side = 0;                // fine nodes per side, M n + 1
    std::vector<Subdomain> subs;
    std::vector<int> cross_points;  // global ids of interior subdomain corners, sorted
    std::vector<int> node_mult;     // subdomain multiplicity per global node

    int num_nodes() const { return side * side; }
    bool on_dirichlet(int gid) const {
        const int i = gid % side, j = gid / side;
        return i == 0 || j == 0 || i == side - 1 || j == side - 1;
    }
};

Decomposition build_decomposition(int M, int n);

/// Stacked interface-space data: per-subdomain interface Schur complements
/// from interior elimination, condensed right-hand sides (source = 1), and
/// the block layout of the product space W.
struct InterfaceOperator {
    std::vector<DenseMatrix> S_blocks;
    std::vector<bool> null_flags;
    std::vector<Vector> f_blocks;
    std::vector<int> offset;  // start of each subdomain block in W
    int total = 0;
};

InterfaceOperator local_interface_schur(const Decomposition& dec);

/// Signed jump operator and its scaled companion with B B_D^t = I.
/// FETI mode: columns over the stacked interface space, one chain of
/// constraints per shared node (spanning tree over the subdomains sharing
/// it, ordered by subdomain index). FETIDP mode: columns over the
/// corner-subassembled space, rows only for edge-interior nodes.
struct JumpOperators {
    DenseMatrix B;
    DenseMatrix B_D;
};

JumpOperators build_jump_operators(const Decomposition& dec, Mode mode);

/// Dual FETI pipeline: the semidefinite product-space system
/// (S, B, f, 0) reduced by the coarse projection. F0 = red.S_or_S0.
struct FetiAssembly {
    InterfaceOperator iface;
    SaddleSystem sys;
    DualReduction red;
    DenseMatrix B_D;
};

FetiAssembly feti_assembly(const Decomposition& dec);

/// Scaled Dirichlet preconditioner (P B_D) S (P B_D)^t in the W0 basis.
DenseMatrix feti_preconditioner(const FetiAssembly& fa);

/// Corner-subassembled dual-primal pipeline. Layout of the subassembled
/// space: cross-point dofs (one each, sorted), then per subdomain its
/// non-corner interface dofs. Stilde is SPD; F = B Stilde^{-1} B^t.
struct FetidpAssembly {
    InterfaceOperator iface;
    DenseMatrix Stilde;
    DenseMatrix F;
    DenseMatrix B;
    DenseMatrix B_D;
    int primal = 0;  // number of corner dofs
};

FetidpAssembly fetidp_assembly(const Decomposition& dec);

/// Dirichlet preconditioner Bbar Stilde Bbar^t with Bbar = B / 2.
DenseMatrix fetidp_preconditioner(const FetidpAssembly& fa);

/// Nodal solution of the Poisson model problem (source = 1) on the full
/// fine grid, zeros on the Dirichlet boundary.
Vector direct_poisson_solve(const Decomposition& dec);
Vector feti_solve_global(const Decomposition& dec);

struct DdmRow {
    Mode method = Mode::FETI;
    bool preconditioned = false;
    int M = 0, n = 0;
    double H_over_h = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
    int cg_iters = 0;
};

std::vector<DdmRow> ddm_sweep(Mode method, bool preconditioned,
                              const std::vector<int>& M_list,
                              const std::vector<int>& n_list,
                              std::uint64_t seed);

} // namespace schurlab::ddm
