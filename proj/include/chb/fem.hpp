#pragma once

// P1 operators on the bulk triangulation and the boundary curve, the P2
// scalar space used for velocities, and the Discretization bundle shared by
// the flow, phase-field and diagnostics code.

#include <functional>

#include "chb/geometry.hpp"
#include "chb/quadrature.hpp"

namespace chb {

using ScalarFn = std::function<double(double)>;

// ---------------------------------------------------------------------------
// P1 bulk operators
// ---------------------------------------------------------------------------

SpMat p1_mass(const BulkMesh& mesh);
SpMat p1_stiffness(const BulkMesh& mesh);

// Weighted stiffness \int w(phi) grad(u) . grad(v) with w evaluated at
// quadrature points of the P1 interpolant phi.
SpMat p1_weighted_stiffness(const BulkMesh& mesh, const Eigen::VectorXd& phi,
                            const ScalarFn& w, const TriQuad& quad);

// Weighted mass \int w(phi) u v (same evaluation convention).
SpMat p1_weighted_mass(const BulkMesh& mesh, const Eigen::VectorXd& phi,
                       const ScalarFn& w, const TriQuad& quad);

// Load vector L_i = \int f(phi) chi_i.
Eigen::VectorXd p1_nonlinear_load(const BulkMesh& mesh,
                                  const Eigen::VectorXd& phi, const ScalarFn& f,
                                  const TriQuad& quad);

// \int f(phi) over the bulk.
double p1_integrate(const BulkMesh& mesh, const Eigen::VectorXd& phi,
                    const ScalarFn& f, const TriQuad& quad);

// P1 interpolant evaluated from barycentric coordinates of a triangle.
double p1_eval(const Eigen::VectorXd& phi, const std::array<int, 3>& tri,
               double l0, double l1, double l2);

// Constant gradient of the P1 interpolant on a triangle.
Vec2 p1_gradient(const BulkMesh& mesh, const Eigen::VectorXd& phi, int tri);

// ---------------------------------------------------------------------------
// P1 surface operators (closed curve)
// ---------------------------------------------------------------------------

SpMat surf_weighted_stiffness(const SurfaceMesh& surf, const Eigen::VectorXd& psi,
                              const ScalarFn& w, const SegQuad& quad);
Eigen::VectorXd surf_nonlinear_load(const SurfaceMesh& surf,
                                    const Eigen::VectorXd& psi, const ScalarFn& f,
                                    const SegQuad& quad);
double surf_integrate(const SurfaceMesh& surf, const Eigen::VectorXd& psi,
                      const ScalarFn& f, const SegQuad& quad);

// Selection matrix T (S x N) with (T phi)_k = phi at the bulk node carrying
// surface node k.
SpMat trace_matrix(const TraceMap& tm);

// ---------------------------------------------------------------------------
// P2 scalar space (velocity components)
// ---------------------------------------------------------------------------

struct P2Space {
  const BulkMesh* mesh = nullptr;
  std::vector<std::array<int, 2>> edges;          // vertex pairs, sorted
  std::vector<std::array<int, 3>> tri_edges;      // edge opposite local vertex k
  std::vector<Vec2> edge_midpoints;
  std::vector<int> boundary_segment_edge;         // surface segment -> edge id
  std::vector<int> boundary_segment_triangle;     // surface segment -> triangle id

  int num_vertices() const { return mesh->num_nodes(); }
  int num_edges() const { return static_cast<int>(edges.size()); }
  int num_scalar_dofs() const { return num_vertices() + num_edges(); }

  // Scalar P2 basis on the reference triangle: vertices then midnodes, with
  // midnode 3+k on the edge opposite vertex k.
  static std::array<double, 6> shape(double l0, double l1, double l2);
  // Gradients of the six basis functions given the (constant) barycentric
  // gradients of the triangle.
  static std::array<Vec2, 6> shape_grad(double l0, double l1, double l2,
                                        const std::array<Vec2, 3>& grad_l);

  // Global scalar dof ids of the six local nodes of a triangle.
  std::array<int, 6> tri_dofs(int t) const;
  // Scalar dofs of the three nodes of boundary segment k (endpoint, endpoint,
  // midnode), matching the 1D quadratic trace basis.
  std::array<int, 3> segment_dofs(int k, const TraceMap& tm) const;
};

P2Space build_p2_space(const BulkMesh& mesh, const Geometry& geom);

// Barycentric gradients of a triangle.
std::array<Vec2, 3> barycentric_gradients(const BulkMesh& mesh, int t);

// Evaluate a P2 vector field (layout ux_0, uy_0, ux_1, ...) at a barycentric
// point of a triangle.
Vec2 p2_vector_eval(const P2Space& space, const Eigen::VectorXd& u, int t,
                    double l0, double l1, double l2);

// Evaluate the trace of a P2 vector field on boundary segment k at parameter
// xi in [0,1].
Vec2 p2_vector_eval_segment(const P2Space& space, const TraceMap& tm,
                            const Eigen::VectorXd& u, int k, double xi);

// Vector-field matrices on the P2 space (2 dofs per scalar node):
SpMat p2_vector_mass(const P2Space& space);                       // \int u.v
SpMat p2_vector_grad_stiffness(const P2Space& space);             // \int grad u : grad v
SpMat p2_vector_sym_stiffness(const P2Space& space);              // \int 2 D(u):D(v)
SpMat p2_vector_boundary_mass(const P2Space& space, const Geometry& geom);  // \int_G u.v

// ---------------------------------------------------------------------------
// Discretization bundle
// ---------------------------------------------------------------------------

struct Discretization {
  Geometry geom;
  SpMat mass_b, stiff_b;   // bulk P1
  SpMat mass_s, stiff_s;   // surface P1
  SpMat trace;             // S x N selection
  P2Space velocity;

  explicit Discretization(int n);
  explicit Discretization(Geometry g);

  int n_bulk() const { return geom.bulk.num_nodes(); }
  int n_surf() const { return geom.surface.num_nodes(); }
};

}  // namespace chb
