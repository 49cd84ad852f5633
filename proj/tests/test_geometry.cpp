#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "chb/errors.hpp"
#include "chb/fem.hpp"
#include "chb/io.hpp"
#include "oracle.hpp"

using namespace chb;

TEST_CASE("square mesh counts and measures") {
  {
    const Geometry g = build_square_mesh(1);
    CHECK(g.bulk.num_nodes() == 4);
    CHECK(g.bulk.num_triangles() == 2);
    CHECK(g.surface.num_nodes() == 4);
    CHECK(g.bulk.area() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.surface.length() == doctest::Approx(4.0).epsilon(1e-14));
  }
  {
    const Geometry g = build_square_mesh(2);
    CHECK(g.bulk.num_nodes() == 9);
    CHECK(g.bulk.num_triangles() == 8);
    CHECK(g.surface.num_nodes() == 8);
  }
  {
    const Geometry g = build_square_mesh(8);
    CHECK(std::abs(g.bulk.area() - 1.0) <= 1e-12);
    CHECK(std::abs(g.surface.length() - 4.0) <= 1e-12);
  }
  // n = 5: coordinates are not exactly representable, sums still tight.
  {
    const Geometry g = build_square_mesh(5);
    CHECK(std::abs(g.bulk.area() - 1.0) <= 1e-12);
    CHECK(std::abs(g.surface.length() - 4.0) <= 1e-12);
  }
  CHECK_THROWS_AS(build_square_mesh(0), DomainError);
}

TEST_CASE("triangles positively oriented, boundary forms a single loop") {
  const Geometry g = build_square_mesh(6);
  for (int t = 0; t < g.bulk.num_triangles(); ++t) {
    const auto& tri = g.bulk.triangles[t];
    const Vec2 e1 = g.bulk.nodes[tri[1]] - g.bulk.nodes[tri[0]];
    const Vec2 e2 = g.bulk.nodes[tri[2]] - g.bulk.nodes[tri[0]];
    CHECK(e1.x() * e2.y() - e1.y() * e2.x() > 0.0);
  }
  // Every boundary node has degree 2 in the boundary-edge graph.
  std::map<int, int> degree;
  for (const auto& e : g.bulk.boundary_edges) {
    degree[e[0]]++;
    degree[e[1]]++;
  }
  CHECK(degree.size() == static_cast<size_t>(g.surface.num_nodes()));
  for (const auto& [node, d] : degree) CHECK(d == 2);
  // Walking the edges comes back to the start after exactly S steps.
  int cur = g.bulk.boundary_edges[0][0];
  std::set<int> seen;
  for (int k = 0; k < g.surface.num_nodes(); ++k) {
    seen.insert(cur);
    cur = g.bulk.boundary_edges[k][1];
    CHECK(g.bulk.boundary_edges[k][0] == g.trace_map.to_bulk[k]);
  }
  CHECK(cur == g.bulk.boundary_edges[0][0]);
  CHECK(seen.size() == static_cast<size_t>(g.surface.num_nodes()));
}

TEST_CASE("trace restriction") {
  const Geometry g = build_square_mesh(1);
  Eigen::VectorXd xcoord(4);
  for (int i = 0; i < 4; ++i) xcoord[i] = g.bulk.nodes[i].x();
  const Eigen::VectorXd tr = trace(xcoord, g.trace_map);
  REQUIRE(tr.size() == 4);
  CHECK(tr[0] == 0.0);
  CHECK(tr[1] == 1.0);
  CHECK(tr[2] == 1.0);
  CHECK(tr[3] == 0.0);

  const Eigen::VectorXd c = Eigen::VectorXd::Constant(4, 0.7);
  CHECK((trace(c, g.trace_map) - Eigen::VectorXd::Constant(4, 0.7)).norm() == 0.0);

  CHECK_THROWS_AS(trace(Eigen::VectorXd::Zero(5), g.trace_map), DomainError);

  // Interior-supported field has zero trace.
  const Geometry g3 = build_square_mesh(3);
  Eigen::VectorXd interior = Eigen::VectorXd::Zero(g3.bulk.num_nodes());
  for (int i = 0; i < g3.bulk.num_nodes(); ++i)
    if (!g3.trace_map.to_surface.count(i)) interior[i] = 1.0;
  CHECK(trace(interior, g3.trace_map).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("trace map is a bijection matching coordinates") {
  const Geometry g = build_square_mesh(7);
  const int S = g.surface.num_nodes();
  std::set<int> bulk_ids;
  for (int k = 0; k < S; ++k) {
    const int b = g.trace_map.to_bulk[k];
    bulk_ids.insert(b);
    CHECK(g.trace_map.to_surface.at(b) == k);
    // Coordinates agree exactly under the map (same node).
    CHECK(g.bulk.nodes[b] == g.point_at_arclength(g.surface.arclength[k]));
  }
  CHECK(bulk_ids.size() == static_cast<size_t>(S));
}

TEST_CASE("surface derivative and stiffness") {
  const Geometry g = build_square_mesh(4);
  const SpMat D = surface_derivative_matrix(g.surface);
  const Eigen::VectorXd c = Eigen::VectorXd::Constant(g.surface.num_nodes(), 3.25);
  CHECK((D * c).lpNorm<Eigen::Infinity>() == 0.0);

  const SpMat K = surface_stiffness_matrix(g.surface);
  const Eigen::VectorXd rows = K * Eigen::VectorXd::Ones(K.cols());
  CHECK(rows.lpNorm<Eigen::Infinity>() <= 1e-12);

  SurfaceMesh degenerate;
  degenerate.segment_length = {0.5, 0.0, 0.5};
  degenerate.arclength = {0.0, 0.5, 0.5};
  CHECK_THROWS_AS(surface_derivative_matrix(degenerate), DomainError);
}

TEST_CASE("discrete H1 seminorm of a boundary sine converges to the integral") {
  const auto goldens =
      oracle::load_goldens(std::string(CHB_SOURCE_DIR) + "/tests/data/goldens.csv");
  const double target = M_PI * M_PI / 2.0;  // = 2 pi^2 / |Gamma|
  // Oracle quadrature of the exact integral.
  const double via_simpson = oracle::simpson(
      [](double s) {
        const double d = (2.0 * M_PI / 4.0) * std::cos(2.0 * M_PI * s / 4.0);
        return d * d;
      },
      0.0, 4.0, 4096);
  CHECK(std::abs(via_simpson - target) <= 1e-10);
  CHECK(std::abs(via_simpson - goldens.at("surface_h1_sin_integral").value) <=
        goldens.at("surface_h1_sin_integral").tolerance);

  auto seminorm = [](int n) {
    const Geometry g = build_square_mesh(n);
    const int S = g.surface.num_nodes();
    Eigen::VectorXd u(S);
    for (int k = 0; k < S; ++k)
      u[k] = std::sin(2.0 * M_PI * g.surface.arclength[k] / 4.0);
    const SpMat D = surface_derivative_matrix(g.surface);
    const Eigen::VectorXd du = D * u;
    double acc = 0.0;
    for (int k = 0; k < S; ++k) acc += g.surface.segment_length[k] * du[k] * du[k];
    return acc;
  };
  const double e64 = std::abs(seminorm(64) - target);
  const double e128 = std::abs(seminorm(128) - target);
  CHECK(e128 <= 5e-4);
  CHECK(e64 / e128 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("refinement halves the maximum edge length exactly") {
  for (int n : {1, 2, 4, 8}) {
    const Geometry coarse = build_square_mesh(n);
    const Geometry fine = build_square_mesh(2 * n);
    CHECK(coarse.bulk.max_edge_length() == 2.0 * fine.bulk.max_edge_length());
  }
}

TEST_CASE("surface mass of the constant-1 field equals |Gamma|") {
  for (int n : {3, 8, 16}) {
    const Geometry g = build_square_mesh(n);
    const SpMat M = surface_mass_matrix(g.surface);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.surface.num_nodes());
    CHECK(std::abs(ones.dot(M * ones) - 4.0) <= 1e-12);
  }
}

TEST_CASE("outward unit normals and corner flags") {
  const Geometry g = build_square_mesh(5);
  const int S = g.surface.num_nodes();
  int corners = 0;
  for (int k = 0; k < S; ++k) {
    CHECK(std::abs(g.normals.edge_normal[k].norm() - 1.0) <= 1e-14);
    const Vec2 a = g.bulk.nodes[g.trace_map.to_bulk[k]];
    const Vec2 b = g.bulk.nodes[g.trace_map.to_bulk[(k + 1) % S]];
    const Vec2 mid = 0.5 * (a + b);
    const Vec2 centroid(0.5, 0.5);
    CHECK(g.normals.edge_normal[k].dot(mid - centroid) > 0.0);
    if (g.normals.corner[k]) ++corners;
  }
  CHECK(corners == 4);
}

TEST_CASE("vtk export writes legacy unstructured grids") {
  const Discretization disc(3);
  const std::string dir = std::filesystem::temp_directory_path().string();
  const std::string path = dir + "/chb_test_mesh.vtk";
  Eigen::VectorXd f(disc.n_bulk());
  for (int i = 0; i < disc.n_bulk(); ++i) f[i] = disc.geom.bulk.nodes[i].x();
  write_vtk_bulk(path, disc, {{"phi", f}});
  std::ifstream is(path);
  REQUIRE(is.good());
  std::string line;
  std::getline(is, line);
  CHECK(line == "# vtk DataFile Version 3.0");
  bool has_cells = false, has_scalars = false;
  while (std::getline(is, line)) {
    if (line.rfind("CELL_TYPES", 0) == 0) has_cells = true;
    if (line.rfind("SCALARS phi", 0) == 0) has_scalars = true;
  }
  CHECK(has_cells);
  CHECK(has_scalars);
  std::filesystem::remove(path);
}

TEST_CASE("point_at_arclength walks the boundary counterclockwise") {
  const Geometry g = build_square_mesh(4);
  CHECK((g.point_at_arclength(0.0) - Vec2(0, 0)).norm() <= 1e-14);
  CHECK((g.point_at_arclength(1.5) - Vec2(1.0, 0.5)).norm() <= 1e-14);
  CHECK((g.point_at_arclength(2.25) - Vec2(0.75, 1.0)).norm() <= 1e-14);
  CHECK((g.point_at_arclength(4.25) - Vec2(0.25, 0.0)).norm() <= 1e-14);
}
