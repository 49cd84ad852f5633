#include "chb/fem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "chb/errors.hpp"

namespace chb {

namespace {

using Triplet = Eigen::Triplet<double>;

inline std::array<Vec2, 3> tri_grads(const BulkMesh& mesh, int t) {
  const auto& tri = mesh.triangles[t];
  const Vec2& p0 = mesh.nodes[tri[0]];
  const Vec2& p1 = mesh.nodes[tri[1]];
  const Vec2& p2 = mesh.nodes[tri[2]];
  const double inv2A = 1.0 / (2.0 * mesh.element_areas[t]);
  // grad(lambda_i) is the inward-rotated opposite edge over twice the area.
  return {Vec2((p1.y() - p2.y()) * inv2A, (p2.x() - p1.x()) * inv2A),
          Vec2((p2.y() - p0.y()) * inv2A, (p0.x() - p2.x()) * inv2A),
          Vec2((p0.y() - p1.y()) * inv2A, (p1.x() - p0.x()) * inv2A)};
}

inline Vec2 bary_point(const BulkMesh& mesh, const std::array<int, 3>& tri,
                       double l0, double l1, double l2) {
  return l0 * mesh.nodes[tri[0]] + l1 * mesh.nodes[tri[1]] + l2 * mesh.nodes[tri[2]];
}

}  // namespace

std::array<Vec2, 3> barycentric_gradients(const BulkMesh& mesh, int t) {
  return tri_grads(mesh, t);
}

SpMat p1_mass(const BulkMesh& mesh) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tri[i], tri[j], A / 12.0 * (i == j ? 2.0 : 1.0));
  }
  SpMat M(mesh.num_nodes(), mesh.num_nodes());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

SpMat p1_stiffness(const BulkMesh& mesh) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto g = tri_grads(mesh, t);
    const double A = mesh.element_areas[t];
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tri[i], tri[j], A * g[i].dot(g[j]));
  }
  SpMat K(mesh.num_nodes(), mesh.num_nodes());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

double p1_eval(const Eigen::VectorXd& phi, const std::array<int, 3>& tri,
               double l0, double l1, double l2) {
  return l0 * phi[tri[0]] + l1 * phi[tri[1]] + l2 * phi[tri[2]];
}

Vec2 p1_gradient(const BulkMesh& mesh, const Eigen::VectorXd& phi, int t) {
  const auto& tri = mesh.triangles[t];
  const auto g = tri_grads(mesh, t);
  return phi[tri[0]] * g[0] + phi[tri[1]] * g[1] + phi[tri[2]] * g[2];
}

SpMat p1_weighted_stiffness(const BulkMesh& mesh, const Eigen::VectorXd& phi,
                            const ScalarFn& w, const TriQuad& quad) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const auto g = tri_grads(mesh, t);
    const double A = mesh.element_areas[t];
    double wbar = 0.0;
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      wbar += p.w * w(p1_eval(phi, tri, p.l0, p.l1, p.l2));
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tri[i], tri[j], wbar * A * g[i].dot(g[j]));
  }
  SpMat K(mesh.num_nodes(), mesh.num_nodes());
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

SpMat p1_weighted_mass(const BulkMesh& mesh, const Eigen::VectorXd& phi,
                       const ScalarFn& w, const TriQuad& quad) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    double loc[3][3] = {{0, 0, 0}, {0, 0, 0}, {0, 0, 0}};
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      const double wv = p.w * A * w(p1_eval(phi, tri, p.l0, p.l1, p.l2));
      const double l[3] = {p.l0, p.l1, p.l2};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) loc[i][j] += wv * l[i] * l[j];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) trip.emplace_back(tri[i], tri[j], loc[i][j]);
  }
  SpMat M(mesh.num_nodes(), mesh.num_nodes());
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Eigen::VectorXd p1_nonlinear_load(const BulkMesh& mesh, const Eigen::VectorXd& phi,
                                  const ScalarFn& f, const TriQuad& quad) {
  Eigen::VectorXd L = Eigen::VectorXd::Zero(mesh.num_nodes());
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      const double fv = p.w * A * f(p1_eval(phi, tri, p.l0, p.l1, p.l2));
      L[tri[0]] += fv * p.l0;
      L[tri[1]] += fv * p.l1;
      L[tri[2]] += fv * p.l2;
    }
  }
  return L;
}

double p1_integrate(const BulkMesh& mesh, const Eigen::VectorXd& phi,
                    const ScalarFn& f, const TriQuad& quad) {
  double acc = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      acc += p.w * A * f(p1_eval(phi, tri, p.l0, p.l1, p.l2));
    }
  }
  return acc;
}

SpMat surf_weighted_stiffness(const SurfaceMesh& surf, const Eigen::VectorXd& psi,
                              const ScalarFn& w, const SegQuad& quad) {
  const int S = surf.num_nodes();
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(4) * S);
  for (int k = 0; k < S; ++k) {
    const int a = k, b = (k + 1) % S;
    const double h = surf.segment_length[k];
    double wbar = 0.0;
    for (int q = 0; q < quad.n; ++q) {
      const double xi = quad.pts[q].x;
      wbar += quad.pts[q].w * w((1.0 - xi) * psi[a] + xi * psi[b]);
    }
    const double kk = wbar / h;
    trip.emplace_back(a, a, kk);
    trip.emplace_back(b, b, kk);
    trip.emplace_back(a, b, -kk);
    trip.emplace_back(b, a, -kk);
  }
  SpMat K(S, S);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

Eigen::VectorXd surf_nonlinear_load(const SurfaceMesh& surf,
                                    const Eigen::VectorXd& psi, const ScalarFn& f,
                                    const SegQuad& quad) {
  const int S = surf.num_nodes();
  Eigen::VectorXd L = Eigen::VectorXd::Zero(S);
  for (int k = 0; k < S; ++k) {
    const int a = k, b = (k + 1) % S;
    const double h = surf.segment_length[k];
    for (int q = 0; q < quad.n; ++q) {
      const double xi = quad.pts[q].x;
      const double fv = quad.pts[q].w * h * f((1.0 - xi) * psi[a] + xi * psi[b]);
      L[a] += fv * (1.0 - xi);
      L[b] += fv * xi;
    }
  }
  return L;
}

double surf_integrate(const SurfaceMesh& surf, const Eigen::VectorXd& psi,
                      const ScalarFn& f, const SegQuad& quad) {
  const int S = surf.num_nodes();
  double acc = 0.0;
  for (int k = 0; k < S; ++k) {
    const int a = k, b = (k + 1) % S;
    const double h = surf.segment_length[k];
    for (int q = 0; q < quad.n; ++q) {
      const double xi = quad.pts[q].x;
      acc += quad.pts[q].w * h * f((1.0 - xi) * psi[a] + xi * psi[b]);
    }
  }
  return acc;
}

SpMat trace_matrix(const TraceMap& tm) {
  const int S = static_cast<int>(tm.to_bulk.size());
  std::vector<Triplet> trip;
  trip.reserve(S);
  for (int k = 0; k < S; ++k) trip.emplace_back(k, tm.to_bulk[k], 1.0);
  SpMat T(S, tm.bulk_node_count);
  T.setFromTriplets(trip.begin(), trip.end());
  return T;
}

// ---------------------------------------------------------------------------
// P2 space
// ---------------------------------------------------------------------------

std::array<double, 6> P2Space::shape(double l0, double l1, double l2) {
  return {l0 * (2.0 * l0 - 1.0), l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0),
          4.0 * l1 * l2, 4.0 * l2 * l0, 4.0 * l0 * l1};
}

std::array<Vec2, 6> P2Space::shape_grad(double l0, double l1, double l2,
                                        const std::array<Vec2, 3>& g) {
  return {(4.0 * l0 - 1.0) * g[0],
          (4.0 * l1 - 1.0) * g[1],
          (4.0 * l2 - 1.0) * g[2],
          4.0 * (l1 * g[2] + l2 * g[1]),
          4.0 * (l2 * g[0] + l0 * g[2]),
          4.0 * (l0 * g[1] + l1 * g[0])};
}

std::array<int, 6> P2Space::tri_dofs(int t) const {
  const auto& tri = mesh->triangles[t];
  const int nv = num_vertices();
  return {tri[0], tri[1], tri[2], nv + tri_edges[t][0], nv + tri_edges[t][1],
          nv + tri_edges[t][2]};
}

std::array<int, 3> P2Space::segment_dofs(int k, const TraceMap& tm) const {
  const int S = static_cast<int>(tm.to_bulk.size());
  return {tm.to_bulk[k], tm.to_bulk[(k + 1) % S],
          num_vertices() + boundary_segment_edge[k]};
}

P2Space build_p2_space(const BulkMesh& mesh, const Geometry& geom) {
  P2Space sp;
  sp.mesh = &mesh;
  std::map<std::pair<int, int>, int> edge_id;
  auto get_edge = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    auto it = edge_id.find({a, b});
    if (it != edge_id.end()) return it->second;
    const int id = static_cast<int>(sp.edges.size());
    edge_id[{a, b}] = id;
    sp.edges.push_back({a, b});
    sp.edge_midpoints.push_back(0.5 * (mesh.nodes[a] + mesh.nodes[b]));
    return id;
  };
  sp.tri_edges.resize(mesh.num_triangles());
  std::map<std::pair<int, int>, int> edge_tri;  // boundary lookup
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int k = 0; k < 3; ++k) {
      int a = tri[(k + 1) % 3], b = tri[(k + 2) % 3];
      sp.tri_edges[t][k] = get_edge(a, b);
      if (a > b) std::swap(a, b);
      edge_tri[{a, b}] = t;  // boundary edges belong to exactly one triangle
    }
  }
  const auto& tm = geom.trace_map;
  const int S = static_cast<int>(tm.to_bulk.size());
  sp.boundary_segment_edge.resize(S);
  sp.boundary_segment_triangle.resize(S);
  for (int k = 0; k < S; ++k) {
    int a = tm.to_bulk[k], b = tm.to_bulk[(k + 1) % S];
    if (a > b) std::swap(a, b);
    const auto it = edge_id.find({a, b});
    if (it == edge_id.end())
      throw DomainError("build_p2_space: boundary segment is not a mesh edge");
    sp.boundary_segment_edge[k] = it->second;
    sp.boundary_segment_triangle[k] = edge_tri.at({a, b});
  }
  return sp;
}

Vec2 p2_vector_eval(const P2Space& space, const Eigen::VectorXd& u, int t,
                    double l0, double l1, double l2) {
  const auto dofs = space.tri_dofs(t);
  const auto N = P2Space::shape(l0, l1, l2);
  Vec2 v(0.0, 0.0);
  for (int a = 0; a < 6; ++a) {
    v.x() += N[a] * u[2 * dofs[a]];
    v.y() += N[a] * u[2 * dofs[a] + 1];
  }
  return v;
}

Vec2 p2_vector_eval_segment(const P2Space& space, const TraceMap& tm,
                            const Eigen::VectorXd& u, int k, double xi) {
  const auto dofs = space.segment_dofs(k, tm);
  const double N[3] = {(1.0 - xi) * (1.0 - 2.0 * xi), xi * (2.0 * xi - 1.0),
                       4.0 * xi * (1.0 - xi)};
  Vec2 v(0.0, 0.0);
  for (int a = 0; a < 3; ++a) {
    v.x() += N[a] * u[2 * dofs[a]];
    v.y() += N[a] * u[2 * dofs[a] + 1];
  }
  return v;
}

namespace {

// Generic assembler of \int c(x) [pattern] over triangles for the vector P2
// space; pattern selects mass / full gradient / symmetric gradient.
enum class VecForm { Mass, Grad, SymGrad };

SpMat p2_vector_form(const P2Space& space, VecForm form) {
  const BulkMesh& mesh = *space.mesh;
  const TriQuad& quad = tri_quad_deg4();
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 144);
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto dofs = space.tri_dofs(t);
    const auto g = tri_grads(mesh, t);
    const double A = mesh.element_areas[t];
    double loc[12][12] = {};
    for (int q = 0; q < quad.n; ++q) {
      const auto& p = quad.pts[q];
      const double w = p.w * A;
      const auto N = P2Space::shape(p.l0, p.l1, p.l2);
      const auto dN = P2Space::shape_grad(p.l0, p.l1, p.l2, g);
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          if (form == VecForm::Mass) {
            const double m = w * N[a] * N[b];
            loc[2 * a][2 * b] += m;
            loc[2 * a + 1][2 * b + 1] += m;
          } else if (form == VecForm::Grad) {
            const double s = w * dN[a].dot(dN[b]);
            loc[2 * a][2 * b] += s;
            loc[2 * a + 1][2 * b + 1] += s;
          } else {
            // 2 D(u):D(w) = grad u : grad w + grad u : (grad w)^T
            const double s = w * dN[a].dot(dN[b]);
            for (int d = 0; d < 2; ++d)
              for (int c = 0; c < 2; ++c) {
                double v = (d == c) ? s : 0.0;
                v += w * dN[a][c] * dN[b][d];
                loc[2 * b + c][2 * a + d] += v;
              }
          }
        }
      }
    }
    for (int i = 0; i < 12; ++i)
      for (int j = 0; j < 12; ++j)
        if (loc[i][j] != 0.0)
          trip.emplace_back(2 * dofs[i / 2] + (i % 2), 2 * dofs[j / 2] + (j % 2),
                            loc[i][j]);
  }
  const int n = 2 * space.num_scalar_dofs();
  SpMat M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

}  // namespace

SpMat p2_vector_mass(const P2Space& space) { return p2_vector_form(space, VecForm::Mass); }

SpMat p2_vector_grad_stiffness(const P2Space& space) {
  return p2_vector_form(space, VecForm::Grad);
}

SpMat p2_vector_sym_stiffness(const P2Space& space) {
  return p2_vector_form(space, VecForm::SymGrad);
}

SpMat p2_vector_boundary_mass(const P2Space& space, const Geometry& geom) {
  const auto& tm = geom.trace_map;
  const int S = static_cast<int>(tm.to_bulk.size());
  const SegQuad quad = seg_gauss(3);
  std::vector<Triplet> trip;
  for (int k = 0; k < S; ++k) {
    const auto dofs = space.segment_dofs(k, tm);
    const double h = geom.surface.segment_length[k];
    double loc[3][3] = {};
    for (int q = 0; q < quad.n; ++q) {
      const double xi = quad.pts[q].x;
      const double w = quad.pts[q].w * h;
      const double N[3] = {(1.0 - xi) * (1.0 - 2.0 * xi), xi * (2.0 * xi - 1.0),
                           4.0 * xi * (1.0 - xi)};
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) loc[a][b] += w * N[a] * N[b];
    }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int d = 0; d < 2; ++d)
          trip.emplace_back(2 * dofs[a] + d, 2 * dofs[b] + d, loc[a][b]);
  }
  const int n = 2 * space.num_scalar_dofs();
  SpMat M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

Discretization::Discretization(int n) : Discretization(build_square_mesh(n)) {}

Discretization::Discretization(Geometry g) : geom(std::move(g)) {
  mass_b = p1_mass(geom.bulk);
  stiff_b = p1_stiffness(geom.bulk);
  mass_s = surface_mass_matrix(geom.surface);
  stiff_s = surface_stiffness_matrix(geom.surface);
  trace = trace_matrix(geom.trace_map);
  velocity = build_p2_space(geom.bulk, geom);
}

}  // namespace chb
