#include "chb/geometry.hpp"

#include <cmath>

#include "chb/errors.hpp"

namespace chb {

double BulkMesh::area() const {
  double a = 0.0;
  for (double e : element_areas) a += e;
  return a;
}

double BulkMesh::max_edge_length() const {
  double m = 0.0;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k) {
      const Vec2 d = nodes[t[(k + 1) % 3]] - nodes[t[k]];
      m = std::max(m, d.norm());
    }
  }
  return m;
}

double SurfaceMesh::length() const {
  double l = 0.0;
  for (double s : segment_length) l += s;
  return l;
}

Vec2 Geometry::point_at_arclength(double s) const {
  const double L = surface.length();
  s = std::fmod(s, L);
  if (s < 0) s += L;
  const int n = surface.num_nodes();
  // arclength[] is increasing; locate the segment containing s.
  int k = n - 1;
  for (int i = 0; i < n; ++i) {
    const double hi = (i + 1 < n) ? surface.arclength[i + 1] : L;
    if (s < hi) {
      k = i;
      break;
    }
  }
  const double xi = (s - surface.arclength[k]) / surface.segment_length[k];
  const Vec2 a = bulk.nodes[trace_map.to_bulk[k]];
  const Vec2 b = bulk.nodes[trace_map.to_bulk[(k + 1) % n]];
  return a + xi * (b - a);
}

Geometry build_square_mesh(int n) {
  if (n < 1) throw DomainError("build_square_mesh: subdivision count must be >= 1");
  Geometry g;
  BulkMesh& bulk = g.bulk;
  const int m = n + 1;
  bulk.nodes.resize(static_cast<size_t>(m) * m);
  for (int j = 0; j < m; ++j)
    for (int i = 0; i < m; ++i)
      bulk.nodes[static_cast<size_t>(j) * m + i] =
          Vec2(static_cast<double>(i) / n, static_cast<double>(j) / n);

  bulk.triangles.reserve(static_cast<size_t>(2) * n * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int a = j * m + i;
      const int b = a + 1;
      const int c = b + m;
      const int d = a + m;
      bulk.triangles.push_back({a, b, c});
      bulk.triangles.push_back({a, c, d});
    }
  }
  bulk.element_areas.resize(bulk.triangles.size());
  for (size_t t = 0; t < bulk.triangles.size(); ++t) {
    const auto& tri = bulk.triangles[t];
    const Vec2 e1 = bulk.nodes[tri[1]] - bulk.nodes[tri[0]];
    const Vec2 e2 = bulk.nodes[tri[2]] - bulk.nodes[tri[0]];
    const double a2 = e1.x() * e2.y() - e1.y() * e2.x();
    if (a2 <= 0.0) throw DomainError("build_square_mesh: non-positive triangle area");
    bulk.element_areas[t] = 0.5 * a2;
  }

  // Surface nodes in CCW cyclic order starting at the origin.
  TraceMap& tm = g.trace_map;
  tm.bulk_node_count = bulk.num_nodes();
  tm.to_bulk.reserve(static_cast<size_t>(4) * n);
  for (int i = 0; i < n; ++i) tm.to_bulk.push_back(i);                // bottom
  for (int j = 0; j < n; ++j) tm.to_bulk.push_back(n + j * m);        // right
  for (int i = n; i > 0; --i) tm.to_bulk.push_back(n * m + i);        // top
  for (int j = n; j > 0; --j) tm.to_bulk.push_back(j * m);            // left
  const int S = static_cast<int>(tm.to_bulk.size());
  for (int k = 0; k < S; ++k) tm.to_surface[tm.to_bulk[k]] = k;

  bulk.boundary_edges.reserve(S);
  for (int k = 0; k < S; ++k)
    bulk.boundary_edges.push_back({tm.to_bulk[k], tm.to_bulk[(k + 1) % S]});

  SurfaceMesh& surf = g.surface;
  surf.segment_length.resize(S);
  surf.arclength.resize(S);
  double acc = 0.0;
  for (int k = 0; k < S; ++k) {
    surf.arclength[k] = acc;
    const Vec2 d = bulk.nodes[tm.to_bulk[(k + 1) % S]] - bulk.nodes[tm.to_bulk[k]];
    surf.segment_length[k] = d.norm();
    acc += surf.segment_length[k];
  }

  NormalField& nf = g.normals;
  nf.edge_normal.resize(S);
  nf.node_normal.resize(S);
  nf.corner.resize(S);
  for (int k = 0; k < S; ++k) {
    const Vec2 tdir =
        (bulk.nodes[tm.to_bulk[(k + 1) % S]] - bulk.nodes[tm.to_bulk[k]]).normalized();
    nf.edge_normal[k] = Vec2(tdir.y(), -tdir.x());  // outward for a CCW loop
  }
  for (int k = 0; k < S; ++k) {
    const Vec2 prev = nf.edge_normal[(k + S - 1) % S];
    const Vec2 cur = nf.edge_normal[k];
    nf.node_normal[k] = (prev + cur).normalized();
    nf.corner[k] = prev.dot(cur) < 1.0 - 1e-12;
  }
  return g;
}

Eigen::VectorXd trace(const Eigen::VectorXd& bulk_field, const TraceMap& tm) {
  if (bulk_field.size() != tm.bulk_node_count)
    throw DomainError("trace: field length does not match the bulk node count");
  Eigen::VectorXd out(static_cast<Eigen::Index>(tm.to_bulk.size()));
  for (size_t k = 0; k < tm.to_bulk.size(); ++k) out[k] = bulk_field[tm.to_bulk[k]];
  return out;
}

SpMat surface_derivative_matrix(const SurfaceMesh& surf) {
  const int S = surf.num_nodes();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(2) * S);
  for (int k = 0; k < S; ++k) {
    const double h = surf.segment_length[k];
    if (!(h > 1e-300)) throw DomainError("surface_derivative_matrix: degenerate segment");
    trip.emplace_back(k, k, -1.0 / h);
    trip.emplace_back(k, (k + 1) % S, 1.0 / h);
  }
  SpMat D(S, S);
  D.setFromTriplets(trip.begin(), trip.end());
  return D;
}

SpMat surface_mass_matrix(const SurfaceMesh& surf) {
  const int S = surf.num_nodes();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<size_t>(4) * S);
  for (int k = 0; k < S; ++k) {
    const double h = surf.segment_length[k];
    const int a = k, b = (k + 1) % S;
    trip.emplace_back(a, a, h / 3.0);
    trip.emplace_back(b, b, h / 3.0);
    trip.emplace_back(a, b, h / 6.0);
    trip.emplace_back(b, a, h / 6.0);
  }
  SpMat M(S, S);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

SpMat surface_stiffness_matrix(const SurfaceMesh& surf) {
  const SpMat D = surface_derivative_matrix(surf);
  const int S = surf.num_nodes();
  Eigen::VectorXd h(S);
  for (int k = 0; k < S; ++k) h[k] = surf.segment_length[k];
  return SpMat(D.transpose() * h.asDiagonal() * D);
}

}  // namespace chb
