#pragma once

#include <array>
#include <functional>

#include "schurlab/saddle.hpp"

namespace schurlab::mixedfem {

/// Structured triangulation of the unit square: n x n squares, each split
/// into two triangles along the (i,j)->(i+1,j+1) diagonal. All triangles
/// are counterclockwise; edges are oriented from lower to higher vertex
/// index and carry a fixed unit normal (tangent rotated by -90 degrees).
struct TriMesh {
    int n = 0;
    double h = 0.0;
    std::vector<std::array<double, 2>> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<std::array<int, 2>> edges;
    std::vector<std::array<int, 2>> edge_tris;       // adjacent triangles, -1 when absent
    std::vector<std::array<int, 3>> tri_edges;       // edge ids per triangle
    std::vector<std::array<int, 3>> tri_edge_signs;  // +1 if the global edge normal is outward
    std::vector<bool> boundary_edge;
    std::vector<bool> boundary_vertex;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_triangles() const { return static_cast<int>(triangles.size()); }
    int num_edges() const { return static_cast<int>(edges.size()); }
    double tri_area(int t) const;
    double edge_length(int e) const;
};

TriMesh build_mesh(int n);

using ScalarField = std::function<double(double, double)>;
using VectorField = std::function<std::array<double, 2>(double, double)>;

struct MixedDiscretization {
    SaddleSystem sys;
    DenseMatrix M_V;
    DenseMatrix M_W;
    double h = 0.0;
    int velocity_dofs = 0;
    int pressure_dofs = 0;

    // Lowest-order mixed discretization only: signed incidence-over-area
    // divergence map with B = -M_W * Div.
    DenseMatrix Div;
    // Taylor-Hood-style discretization only: divergence integrals over all
    // velocity nodes (boundary included) and the zero-mean pressure basis.
    DenseMatrix div_full;
    DenseMatrix pressure_basis;
};

/// Flux-based mixed discretization of -div(grad p) = b with p = 0 on the
/// boundary: lowest-order face elements for the flux, piecewise constants
/// for the pressure. A is the flux mass matrix.
MixedDiscretization assemble_darcy(const TriMesh& mesh, const ScalarField& b);

/// Velocity-pressure discretization of Stokes flow with no-slip boundary:
/// continuous quadratic velocities (boundary nodes eliminated), piecewise
/// constant pressures restricted to an orthonormal zero-mean basis.
MixedDiscretization assemble_stokes(const TriMesh& mesh, const VectorField& f);

/// sqrt of the smallest eigenvalue of the pressure-mass-normalized Schur
/// complement; the discrete inf-sup constant.
double inf_sup_constant(const MixedDiscretization& md);

struct KappaRow {
    int n = 0;
    double h = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double kappa = 0.0;
};

struct KappaSweep {
    std::vector<KappaRow> rows;
    double slope = 0.0;  // fitted slope of log kappa vs log h
};

KappaSweep darcy_kappa_sweep(const std::vector<int>& n_list);

/// Asserts uniform boundedness: kappa at the finest mesh must not exceed
/// 1.5x the coarsest. Throws Error otherwise.
KappaSweep stokes_kappa_sweep(const std::vector<int>& n_list);

} // namespace schurlab::mixedfem
