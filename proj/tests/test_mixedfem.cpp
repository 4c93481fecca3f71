#include <cmath>

#include "doctest.h"
#include "schurlab/mixedfem.hpp"

using namespace schurlab;
using namespace schurlab::mixedfem;

namespace {

double one(double, double) { return 1.0; }

} // namespace

TEST_CASE("mesh: counts, areas, incidence") {
    const TriMesh m2 = build_mesh(2);
    CHECK(m2.num_triangles() == 8);
    CHECK(m2.num_vertices() == 9);
    const TriMesh m4 = build_mesh(4);
    CHECK(m4.num_triangles() == 32);

    for (const TriMesh* m : {&m2, &m4}) {
        double total = 0.0;
        for (int t = 0; t < m->num_triangles(); ++t) {
            CHECK(m->tri_area(t) > 0.0);
            total += m->tri_area(t);
        }
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
        for (int e = 0; e < m->num_edges(); ++e) {
            const int adj = (m->edge_tris[e][0] >= 0) + (m->edge_tris[e][1] >= 0);
            CHECK(adj == (m->boundary_edge[e] ? 1 : 2));
        }
    }
    CHECK_THROWS_AS(build_mesh(1), AssemblyError);
}

TEST_CASE("darcy assembly: incidence, source, divergence exactness") {
    const TriMesh mesh = build_mesh(2);
    const MixedDiscretization md = assemble_darcy(mesh, one);

    // B = -M_W * Div holds by construction; re-verify the product.
    const DenseMatrix prod = scale(matmul(md.M_W, md.Div), -1.0);
    CHECK(frob_norm(add(prod, md.sys.B, -1.0)) < 1e-12);

    // Unit flux on a single interior edge: divergence supported on its two
    // neighbors with opposite signs.
    int interior_edge = -1;
    for (int e = 0; e < mesh.num_edges(); ++e)
        if (!mesh.boundary_edge[e]) {
            interior_edge = e;
            break;
        }
    REQUIRE(interior_edge >= 0);
    Vector v(mesh.num_edges(), 0.0);
    v[interior_edge] = 1.0;
    const Vector div = matvec(md.Div, v);
    double pos = 0.0, neg = 0.0;
    int nonzero = 0;
    for (int t = 0; t < mesh.num_triangles(); ++t)
        if (std::abs(div[t]) > 1e-14) {
            ++nonzero;
            if (div[t] > 0) pos = div[t];
            if (div[t] < 0) neg = div[t];
        }
    CHECK(nonzero == 2);
    CHECK(pos == doctest::Approx(-neg).epsilon(1e-12));

    // Unit source: g entries are minus the element areas.
    for (int t = 0; t < mesh.num_triangles(); ++t)
        CHECK(md.sys.g[t] == doctest::Approx(-1.0 / 8.0).epsilon(1e-12));

    // Interpolant of the constant field (1,0): flux dof = normal component.
    Vector w(mesh.num_edges());
    for (int e = 0; e < mesh.num_edges(); ++e) {
        const auto& ed = mesh.edges[e];
        const double tx = mesh.vertices[ed[1]][0] - mesh.vertices[ed[0]][0];
        const double ty = mesh.vertices[ed[1]][1] - mesh.vertices[ed[0]][1];
        const double len = std::hypot(tx, ty);
        w[e] = ty / len;  // (1,0) . n with n the -90 degree rotation of the tangent
    }
    const Vector divw = matvec(md.Div, w);
    for (double x : divw) CHECK(std::abs(x) < 1e-10);
}

TEST_CASE("darcy: validated system is SPD with surjective constraints") {
    const TriMesh mesh = build_mesh(3);
    const MixedDiscretization md = assemble_darcy(mesh, one);
    const SaddleSystem sys = validate(md.sys.A, md.sys.B, md.sys.f, md.sys.g);
    CHECK(sys.kind == SystemKind::SPD);
}

TEST_CASE("mass matrix scaling is h^2 on canonical vectors") {
    double c_min = 1e300, c_max = 0.0;
    for (int n : {4, 8, 16}) {
        const TriMesh mesh = build_mesh(n);
        const MixedDiscretization md = assemble_darcy(mesh, one);
        const double h2 = md.h * md.h;
        for (int i = 0; i < md.M_V.rows(); ++i) {
            c_min = std::min(c_min, md.M_V(i, i) / h2);
            c_max = std::max(c_max, md.M_V(i, i) / h2);
        }
        for (int i = 0; i < md.M_W.rows(); ++i) {
            c_min = std::min(c_min, md.M_W(i, i) / h2);
            c_max = std::max(c_max, md.M_W(i, i) / h2);
        }
    }
    CHECK(c_min > 0.0);
    CHECK(c_max / c_min <= 20.0);
}

TEST_CASE("stokes assembly: structure and zero data") {
    const TriMesh mesh = build_mesh(4);
    const MixedDiscretization md =
        assemble_stokes(mesh, [](double, double) { return std::array<double, 2>{0.0, 0.0}; });
    CHECK(md.pressure_dofs == mesh.num_triangles() - 1);
    CHECK(symmetry_defect(md.sys.A) < 1e-12);

    // Zero body force gives the zero solution.
    const SaddleSolution sol = solve_direct(md.sys);
    CHECK(norm2(sol.u) < 1e-12);
    CHECK(norm2(sol.p) < 1e-12);

    // The quadratic interpolant of a constant field has zero elementwise
    // divergence (checked on the full divergence map, boundary included).
    const int nodes = md.div_full.cols() / 2;
    Vector v(2 * nodes, 0.0);
    for (int a = 0; a < nodes; ++a) v[a] = 1.0;  // x component = 1 everywhere
    const Vector div = matvec(md.div_full, v);
    for (double x : div) CHECK(std::abs(x) < 1e-10);

    // Pressure basis is orthonormal and mean-free.
    const DenseMatrix z = md.pressure_basis;
    const DenseMatrix gram = matmul(transpose(z), z);
    CHECK(frob_norm(add(gram, DenseMatrix::identity(z.cols()), -1.0)) < 1e-12);
    for (int j = 0; j < z.cols(); ++j) {
        double s = 0.0;
        for (int i = 0; i < z.rows(); ++i) s += z(i, j);
        CHECK(std::abs(s) < 1e-12);
    }

    const SaddleSystem sys = validate(md.sys.A, md.sys.B, md.sys.f, md.sys.g);
    CHECK(sys.kind == SystemKind::SPD);
}

TEST_CASE("stokes inf-sup constant is stable under refinement") {
    auto zero_force = [](double, double) { return std::array<double, 2>{0.0, 0.0}; };
    const double b4 = inf_sup_constant(assemble_stokes(build_mesh(4), zero_force));
    const double b8 = inf_sup_constant(assemble_stokes(build_mesh(8), zero_force));
    CHECK(b4 > 0.0);
    CHECK(b8 > 0.0);
    CHECK(std::abs(b8 - b4) <= 0.1 * b4);
}

TEST_CASE("darcy condition number grows like h^-2, stokes stays bounded") {
    const KappaSweep darcy = darcy_kappa_sweep({4, 8, 16});
    CHECK(darcy.slope >= -2.3);
    CHECK(darcy.slope <= -1.5);
    // lambda_max bounded, lambda_min ~ h^2.
    double lmax_lo = 1e300, lmax_hi = 0.0, ratio_lo = 1e300, ratio_hi = 0.0;
    for (const auto& r : darcy.rows) {
        lmax_lo = std::min(lmax_lo, r.lambda_max);
        lmax_hi = std::max(lmax_hi, r.lambda_max);
        ratio_lo = std::min(ratio_lo, r.lambda_min / (r.h * r.h));
        ratio_hi = std::max(ratio_hi, r.lambda_min / (r.h * r.h));
    }
    CHECK(lmax_hi <= 4.0 * lmax_lo);
    CHECK(ratio_hi <= 4.0 * ratio_lo);

    const KappaSweep stokes = stokes_kappa_sweep({4, 8});
    CHECK(stokes.rows.back().kappa <= 1.5 * stokes.rows.front().kappa);
    for (const auto& r : stokes.rows) {
        CHECK(r.lambda_min / (r.h * r.h) > 0.0);
        CHECK(r.lambda_max / (r.h * r.h) > 0.0);
    }
}
