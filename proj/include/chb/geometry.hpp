#pragma once

// Coupled bulk/surface discretization of a 2D domain: a triangulation of the
// unit square together with its boundary polyline, the node identification
// between the two, and outward normals. Meshes are immutable after
// construction and safe to share read-only across threads.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <unordered_map>
#include <vector>

namespace chb {

using Vec2 = Eigen::Vector2d;
using SpMat = Eigen::SparseMatrix<double>;

struct BulkMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;       // CCW orientation
  std::vector<std::array<int, 2>> boundary_edges;  // one closed CCW loop
  std::vector<double> element_areas;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  double area() const;
  double max_edge_length() const;
};

struct SurfaceMesh {
  // Surface nodes are indexed 0..S-1 in cyclic (CCW) order; segment k joins
  // node k to node (k+1) mod S.
  std::vector<double> arclength;       // cumulative, arclength[0] = 0
  std::vector<double> segment_length;  // length S

  int num_nodes() const { return static_cast<int>(segment_length.size()); }
  double length() const;
};

struct TraceMap {
  std::vector<int> to_bulk;                  // surface index -> bulk node
  std::unordered_map<int, int> to_surface;   // bulk node -> surface index
  int bulk_node_count = 0;
};

struct NormalField {
  std::vector<Vec2> edge_normal;  // per segment, outward unit normal
  std::vector<Vec2> node_normal;  // averaged over adjacent segments, unit
  std::vector<bool> corner;       // tangent discontinuity at this node
};

struct Geometry {
  BulkMesh bulk;
  SurfaceMesh surface;
  TraceMap trace_map;
  NormalField normals;

  // Position on the boundary at arclength s (periodic in |Gamma|).
  Vec2 point_at_arclength(double s) const;
};

// Structured triangulation of the unit square with n subdivisions per side:
// (n+1)^2 nodes, 2n^2 triangles, 4n surface nodes. Throws DomainError for
// n < 1.
Geometry build_square_mesh(int n);

// Restriction of a bulk nodal field to the surface nodes, in cyclic order.
// Throws DomainError on length mismatch.
Eigen::VectorXd trace(const Eigen::VectorXd& bulk_field, const TraceMap& tm);

// First-order arclength derivative on the closed boundary curve: maps the S
// nodal values to the S per-segment constant derivatives. Throws DomainError
// on a degenerate (zero-length) segment.
SpMat surface_derivative_matrix(const SurfaceMesh& surf);

// P1 mass and stiffness forms on the closed curve. The stiffness equals
// D^T diag(segment_length) D with D the derivative matrix above; every row
// sums to zero.
SpMat surface_mass_matrix(const SurfaceMesh& surf);
SpMat surface_stiffness_matrix(const SurfaceMesh& surf);

}  // namespace chb
