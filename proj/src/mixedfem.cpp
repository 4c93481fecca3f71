#include "schurlab/mixedfem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace schurlab::mixedfem {

namespace {

double signed_area(const std::array<double, 2>& p0, const std::array<double, 2>& p1,
                   const std::array<double, 2>& p2) {
    return 0.5 * ((p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]));
}

// Least squares slope of y against x.
double fit_slope(const Vector& x, const Vector& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

} // namespace

double TriMesh::tri_area(int t) const {
    const auto& tr = triangles[t];
    return signed_area(vertices[tr[0]], vertices[tr[1]], vertices[tr[2]]);
}

double TriMesh::edge_length(int e) const {
    const auto& ed = edges[e];
    const double dx = vertices[ed[1]][0] - vertices[ed[0]][0];
    const double dy = vertices[ed[1]][1] - vertices[ed[0]][1];
    return std::hypot(dx, dy);
}

TriMesh build_mesh(int n) {
    if (n < 2) throw AssemblyError("build_mesh: n must be at least 2");
    TriMesh mesh;
    mesh.n = n;
    mesh.h = 1.0 / n;

    const int vs = n + 1;
    auto vid = [vs](int i, int j) { return j * vs + i; };
    mesh.vertices.resize(static_cast<std::size_t>(vs) * vs);
    mesh.boundary_vertex.assign(mesh.vertices.size(), false);
    for (int j = 0; j < vs; ++j)
        for (int i = 0; i < vs; ++i) {
            mesh.vertices[vid(i, j)] = {static_cast<double>(i) / n, static_cast<double>(j) / n};
            if (i == 0 || j == 0 || i == n || j == n) mesh.boundary_vertex[vid(i, j)] = true;
        }

    // Each square split along its (i,j)->(i+1,j+1) diagonal; both triangles
    // counterclockwise.
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            mesh.triangles.push_back({vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)});
            mesh.triangles.push_back({vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)});
        }

    std::map<std::pair<int, int>, int> edge_id;
    mesh.tri_edges.resize(mesh.triangles.size());
    mesh.tri_edge_signs.resize(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
        const auto& tr = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = tr[k];
            const int b = tr[(k + 1) % 3];
            const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
            auto it = edge_id.find(key);
            int e;
            if (it == edge_id.end()) {
                e = static_cast<int>(mesh.edges.size());
                edge_id.emplace(key, e);
                mesh.edges.push_back({key.first, key.second});
                mesh.edge_tris.push_back({-1, -1});
            } else {
                e = it->second;
            }
            mesh.tri_edges[t][k] = e;
            // Counterclockwise traversal in the low-to-high direction means
            // the global edge normal points out of this triangle.
            mesh.tri_edge_signs[t][k] = (a < b) ? 1 : -1;
            if (mesh.edge_tris[e][0] < 0)
                mesh.edge_tris[e][0] = static_cast<int>(t);
            else
                mesh.edge_tris[e][1] = static_cast<int>(t);
        }
    }
    mesh.boundary_edge.assign(mesh.edges.size(), false);
    for (std::size_t e = 0; e < mesh.edges.size(); ++e)
        mesh.boundary_edge[e] = mesh.edge_tris[e][1] < 0;
    return mesh;
}

MixedDiscretization assemble_darcy(const TriMesh& mesh, const ScalarField& b) {
    const int ne = mesh.num_edges();
    const int nt = mesh.num_triangles();

    MixedDiscretization md;
    md.h = mesh.h;
    md.velocity_dofs = ne;
    md.pressure_dofs = nt;
    md.M_V = DenseMatrix(ne, ne);
    md.M_W = DenseMatrix(nt, nt);
    md.Div = DenseMatrix(nt, ne);

    for (int t = 0; t < nt; ++t) {
        const double area = mesh.tri_area(t);
        if (area <= 0.0) throw AssemblyError("assemble_darcy: degenerate element");
        md.M_W(t, t) = area;
        const auto& tr = mesh.triangles[t];
        const std::array<std::array<double, 2>, 3> p{
            mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]]};
        const std::array<std::array<double, 2>, 3> mid{{
            {0.5 * (p[0][0] + p[1][0]), 0.5 * (p[0][1] + p[1][1])},
            {0.5 * (p[1][0] + p[2][0]), 0.5 * (p[1][1] + p[2][1])},
            {0.5 * (p[2][0] + p[0][0]), 0.5 * (p[2][1] + p[0][1])},
        }};
        // Local flux basis for the edge opposite vertex k+2 (the edge from
        // vertex k to k+1): phi(x) = sign * |e| / (2 |T|) * (x - p_opp).
        std::array<std::array<std::array<double, 2>, 3>, 3> phi{};  // [basis][quad point][xy]
        for (int k = 0; k < 3; ++k) {
            const int e = mesh.tri_edges[t][k];
            const double c = mesh.tri_edge_signs[t][k] * mesh.edge_length(e) / (2.0 * area);
            const auto& opp = p[(k + 2) % 3];
            for (int q = 0; q < 3; ++q) {
                phi[k][q][0] = c * (mid[q][0] - opp[0]);
                phi[k][q][1] = c * (mid[q][1] - opp[1]);
            }
            md.Div(t, e) = mesh.tri_edge_signs[t][k] * mesh.edge_length(e) / area;
        }
        for (int a = 0; a < 3; ++a)
            for (int c = 0; c < 3; ++c) {
                double s = 0.0;
                for (int q = 0; q < 3; ++q)
                    s += phi[a][q][0] * phi[c][q][0] + phi[a][q][1] * phi[c][q][1];
                md.M_V(mesh.tri_edges[t][a], mesh.tri_edges[t][c]) += area / 3.0 * s;
            }
    }

    md.sys.A = md.M_V;
    md.sys.B = scale(matmul(md.M_W, md.Div), -1.0);
    md.sys.f.assign(ne, 0.0);
    md.sys.g.assign(nt, 0.0);
    for (int t = 0; t < nt; ++t) {
        const auto& tr = mesh.triangles[t];
        const std::array<std::array<double, 2>, 3> p{
            mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]]};
        double s = 0.0;
        for (int k = 0; k < 3; ++k)
            s += b(0.5 * (p[k][0] + p[(k + 1) % 3][0]), 0.5 * (p[k][1] + p[(k + 1) % 3][1]));
        md.sys.g[t] = -mesh.tri_area(t) / 3.0 * s;
    }
    md.sys.kind = SystemKind::SPD;
    return md;
}

namespace {

// Quadratic Lagrange machinery on a triangle. Local node order: three
// vertices, then midpoints of edges (0,1), (1,2), (2,0).

struct BaryTerm {
    double coef;
    std::array<int, 3> pow;
};

std::vector<BaryTerm> shape_terms(int a) {
    if (a < 3) {
        std::array<int, 3> sq{}, lin{};
        sq[a] = 2;
        lin[a] = 1;
        return {{2.0, sq}, {-1.0, lin}};
    }
    const int i = a - 3;
    const int j = (i + 1) % 3;
    std::array<int, 3> pw{};
    pw[i] += 1;
    pw[j] += 1;
    return {{4.0, pw}};
}

double bary_monomial_integral(const std::array<int, 3>& pw, double area) {
    auto fact = [](int k) {
        double f = 1.0;
        for (int i = 2; i <= k; ++i) f *= i;
        return f;
    };
    const int total = pw[0] + pw[1] + pw[2];
    return 2.0 * area * fact(pw[0]) * fact(pw[1]) * fact(pw[2]) / fact(total + 2);
}

// Exact local quadratic mass matrix via barycentric monomial integrals.
std::array<std::array<double, 6>, 6> p2_local_mass(double area) {
    std::array<std::array<double, 6>, 6> m{};
    for (int a = 0; a < 6; ++a)
        for (int c = a; c < 6; ++c) {
            double s = 0.0;
            for (const auto& ta : shape_terms(a))
                for (const auto& tc : shape_terms(c)) {
                    const std::array<int, 3> pw{ta.pow[0] + tc.pow[0], ta.pow[1] + tc.pow[1],
                                                ta.pow[2] + tc.pow[2]};
                    s += ta.coef * tc.coef * bary_monomial_integral(pw, area);
                }
            m[a][c] = s;
            m[c][a] = s;
        }
    return m;
}

// Gradient of local shape a at barycentric coordinates lam, with g the
// (constant) barycentric gradients.
std::array<double, 2> p2_shape_grad(int a, const std::array<double, 3>& lam,
                                    const std::array<std::array<double, 2>, 3>& g) {
    if (a < 3)
        return {(4.0 * lam[a] - 1.0) * g[a][0], (4.0 * lam[a] - 1.0) * g[a][1]};
    const int i = a - 3;
    const int j = (i + 1) % 3;
    return {4.0 * (lam[i] * g[j][0] + lam[j] * g[i][0]),
            4.0 * (lam[i] * g[j][1] + lam[j] * g[i][1])};
}

double p2_shape_value(int a, const std::array<double, 3>& lam) {
    if (a < 3) return lam[a] * (2.0 * lam[a] - 1.0);
    const int i = a - 3;
    const int j = (i + 1) % 3;
    return 4.0 * lam[i] * lam[j];
}

constexpr std::array<std::array<double, 3>, 3> kMidpointQuad{{
    {0.5, 0.5, 0.0},
    {0.0, 0.5, 0.5},
    {0.5, 0.0, 0.5},
}};

} // namespace

MixedDiscretization assemble_stokes(const TriMesh& mesh, const VectorField& force) {
    const int nv = mesh.num_vertices();
    const int ne = mesh.num_edges();
    const int nt = mesh.num_triangles();
    const int nodes = nv + ne;  // quadratic nodes: vertices then edge midpoints

    std::vector<bool> node_boundary(nodes, false);
    for (int v = 0; v < nv; ++v) node_boundary[v] = mesh.boundary_vertex[v];
    for (int e = 0; e < ne; ++e) node_boundary[nv + e] = mesh.boundary_edge[e];
    std::vector<int> free_index(nodes, -1);
    int nfree = 0;
    for (int a = 0; a < nodes; ++a)
        if (!node_boundary[a]) free_index[a] = nfree++;

    DenseMatrix k_scalar(nfree, nfree);  // scalar stiffness on free nodes
    DenseMatrix m_scalar(nfree, nfree);
    DenseMatrix div_full(nt, 2 * nodes);
    Vector load(2 * nfree, 0.0);

    for (int t = 0; t < nt; ++t) {
        const auto& tr = mesh.triangles[t];
        const double area = mesh.tri_area(t);
        if (area <= 0.0) throw AssemblyError("assemble_stokes: degenerate element");
        const std::array<std::array<double, 2>, 3> p{
            mesh.vertices[tr[0]], mesh.vertices[tr[1]], mesh.vertices[tr[2]]};
        std::array<std::array<double, 2>, 3> g;
        for (int i = 0; i < 3; ++i) {
            const int j = (i + 1) % 3;
            const int k = (i + 2) % 3;
            g[i] = {(p[j][1] - p[k][1]) / (2.0 * area), (p[k][0] - p[j][0]) / (2.0 * area)};
        }
        std::array<int, 6> gn;  // global quadratic node ids
        for (int i = 0; i < 3; ++i) gn[i] = tr[i];
        for (int k = 0; k < 3; ++k) gn[3 + k] = nv + mesh.tri_edges[t][k];

        const auto mass = p2_local_mass(area);
        for (int a = 0; a < 6; ++a) {
            const int fa = free_index[gn[a]];
            // Divergence integrals over every node, boundary included.
            std::array<double, 2> dint{};
            for (const auto& lam : kMidpointQuad) {
                const auto ga = p2_shape_grad(a, lam, g);
                dint[0] += ga[0];
                dint[1] += ga[1];
            }
            div_full(t, gn[a]) += area / 3.0 * dint[0];
            div_full(t, nodes + gn[a]) += area / 3.0 * dint[1];

            if (fa < 0) continue;
            for (int c = 0; c < 6; ++c) {
                const int fc = free_index[gn[c]];
                if (fc < 0) continue;
                double s = 0.0;
                for (const auto& lam : kMidpointQuad) {
                    const auto ga = p2_shape_grad(a, lam, g);
                    const auto gc = p2_shape_grad(c, lam, g);
                    s += ga[0] * gc[0] + ga[1] * gc[1];
                }
                k_scalar(fa, fc) += area / 3.0 * s;
                m_scalar(fa, fc) += mass[a][c];
            }
            // Body force by midpoint quadrature.
            for (const auto& lam : kMidpointQuad) {
                const double x = lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0];
                const double y = lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1];
                const auto fv = force(x, y);
                const double na = p2_shape_value(a, lam);
                load[fa] += area / 3.0 * fv[0] * na;
                load[nfree + fa] += area / 3.0 * fv[1] * na;
            }
        }
    }

    // Orthonormal basis of the zero-mean pressure subspace (all elements
    // have equal area, so the mean constraint is the all-ones direction),
    // taken from a Householder reflector mapping e1 to that direction.
    DenseMatrix z(nt, nt - 1);
    {
        Vector a(nt, 1.0 / std::sqrt(static_cast<double>(nt)));
        Vector w = a;
        w[0] -= 1.0;
        const double nw = norm2(w);
        for (auto& x : w) x /= nw;
        for (int i = 0; i < nt; ++i)
            for (int j = 1; j < nt; ++j)
                z(i, j - 1) = (i == j ? 1.0 : 0.0) - 2.0 * w[i] * w[j];
    }

    MixedDiscretization md;
    md.h = mesh.h;
    md.velocity_dofs = 2 * nfree;
    md.pressure_dofs = nt - 1;
    md.div_full = div_full;
    md.pressure_basis = z;

    md.sys.A = DenseMatrix(2 * nfree, 2 * nfree);
    md.M_V = DenseMatrix(2 * nfree, 2 * nfree);
    for (int i = 0; i < nfree; ++i)
        for (int j = 0; j < nfree; ++j) {
            md.sys.A(i, j) = k_scalar(i, j);
            md.sys.A(nfree + i, nfree + j) = k_scalar(i, j);
            md.M_V(i, j) = m_scalar(i, j);
            md.M_V(nfree + i, nfree + j) = m_scalar(i, j);
        }

    DenseMatrix b_free(nt, 2 * nfree);
    for (int t = 0; t < nt; ++t)
        for (int a = 0; a < nodes; ++a) {
            const int fa = free_index[a];
            if (fa < 0) continue;
            b_free(t, fa) = -div_full(t, a);
            b_free(t, nfree + fa) = -div_full(t, nodes + a);
        }
    md.sys.B = matmul(transpose(z), b_free);

    // Pressure mass in the reduced basis: all areas equal, so it is a
    // multiple of the identity; assembled explicitly anyway.
    DenseMatrix mw_full(nt, nt);
    for (int t = 0; t < nt; ++t) mw_full(t, t) = mesh.tri_area(t);
    md.M_W = matmul(transpose(z), matmul(mw_full, z));

    md.sys.f = load;
    md.sys.g.assign(nt - 1, 0.0);
    md.sys.kind = SystemKind::SPD;
    return md;
}

double inf_sup_constant(const MixedDiscretization& md) {
    const DualReduction red = schur(md.sys);
    const DenseMatrix wi = spd_inv_sqrt(md.M_W);
    const SymEig eig = sym_eig(matmul(matmul(wi, red.S_or_S0), wi));
    return std::sqrt(eig.eigenvalues.front());
}

namespace {

KappaRow sweep_point(int n, const DenseMatrix& s) {
    const Vector eigs = sym_eigenvalues(s);
    KappaRow row;
    row.n = n;
    row.h = 1.0 / n;
    row.lambda_min = eigs.front();
    row.lambda_max = eigs.back();
    row.kappa = row.lambda_max / row.lambda_min;
    return row;
}

double kappa_slope(const std::vector<KappaRow>& rows) {
    Vector lx, ly;
    for (const auto& r : rows) {
        lx.push_back(std::log(r.h));
        ly.push_back(std::log(r.kappa));
    }
    return fit_slope(lx, ly);
}

} // namespace

KappaSweep darcy_kappa_sweep(const std::vector<int>& n_list) {
    KappaSweep sweep;
    for (int n : n_list) {
        const TriMesh mesh = build_mesh(n);
        const MixedDiscretization md = assemble_darcy(mesh, [](double, double) { return 1.0; });
        sweep.rows.push_back(sweep_point(n, schur(md.sys).S_or_S0));
    }
    sweep.slope = kappa_slope(sweep.rows);
    return sweep;
}

KappaSweep stokes_kappa_sweep(const std::vector<int>& n_list) {
    KappaSweep sweep;
    for (int n : n_list) {
        const TriMesh mesh = build_mesh(n);
        const MixedDiscretization md =
            assemble_stokes(mesh, [](double, double) { return std::array<double, 2>{0.0, 0.0}; });
        sweep.rows.push_back(sweep_point(n, schur(md.sys).S_or_S0));
    }
    sweep.slope = kappa_slope(sweep.rows);
    if (sweep.rows.back().kappa > 1.5 * sweep.rows.front().kappa)
        throw Error("stokes_kappa_sweep: condition number is not uniformly bounded");
    return sweep;
}

} // namespace schurlab::mixedfem
