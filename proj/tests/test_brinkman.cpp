#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "chb/brinkman.hpp"
#include "chb/errors.hpp"
#include "chb/mms.hpp"
#include "oracle.hpp"

using namespace chb;

namespace {

Coefficients constant_coeffs(double nu, double lambda, double gamma) {
  Coefficients c;
  c.nu = CoefficientFn::constant("nu", nu);
  c.lambda = CoefficientFn::constant("lambda", lambda);
  c.gamma = CoefficientFn::constant("gamma", gamma);
  return c;
}

}  // namespace

TEST_CASE("zero forcing gives the zero flow") {
  const Discretization disc(6);
  BrinkmanSolver solver(disc, constant_coeffs(1.0, 1.0, 1.0));
  const FlowSolution sol = solver.solve(BrinkmanForcing{});
  CHECK(sol.velocity.lpNorm<Eigen::Infinity>() <= 1e-13);
  CHECK(sol.pressure.lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("constant phase fields produce no capillary forcing") {
  const Discretization disc(6);
  BrinkmanSolver solver(disc, constant_coeffs(1.0, 0.5, 1.0));
  BrinkmanForcing f;
  f.phi = Eigen::VectorXd::Constant(disc.n_bulk(), 0.4);
  f.mu = Eigen::VectorXd::Constant(disc.n_bulk(), -0.7);
  f.psi = Eigen::VectorXd::Constant(disc.n_surf(), 0.4);
  f.theta = Eigen::VectorXd::Constant(disc.n_surf(), 1.3);
  const FlowSolution sol = solver.solve(f);
  CHECK(sol.velocity.lpNorm<Eigen::Infinity>() <= 1e-13);
}

TEST_CASE("velocity block is symmetric") {
  const Discretization disc(5);
  BrinkmanSolver solver(disc, constant_coeffs(2.0, 0.3, 0.8));
  Eigen::VectorXd phi(disc.n_bulk());
  for (int i = 0; i < disc.n_bulk(); ++i)
    phi[i] = 0.3 * std::sin(7.0 * i);  // arbitrary phase field
  const Eigen::VectorXd psi = disc.trace * phi;
  const SpMat& A = solver.velocity_block(phi, psi);
  const SpMat diff = SpMat(A - SpMat(A.transpose()));
  double worst = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SpMat::InnerIterator it(diff, k); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  CHECK(worst <= 1e-13);
}

TEST_CASE("impermeability, divergence residual and mean pressure") {
  const Discretization disc(8);
  BrinkmanSolver solver(disc, constant_coeffs(1.0, 1.0, 1.0));
  BrinkmanManufactured mms{1.0, 1.0, 1.0};
  BrinkmanForcing f;
  f.body_force = [&](const Vec2& x) { return mms.body_force(x); };
  f.boundary_force = [&](const Vec2& x) { return mms.boundary_force(x); };
  const FlowSolution sol = solver.solve(f);

  // v.n vanishes exactly at every constrained boundary component.
  const auto& geom = disc.geom;
  for (int k = 0; k < geom.surface.num_nodes(); ++k) {
    const auto dofs = disc.velocity.segment_dofs(k, geom.trace_map);
    const Vec2 n = geom.normals.edge_normal[k];
    for (int a = 0; a < 3; ++a) {
      const Vec2 v(sol.velocity[2 * dofs[a]], sol.velocity[2 * dofs[a] + 1]);
      CHECK(std::abs(v.dot(n)) == 0.0);
    }
  }
  CHECK(sol.div_residual <= 1e-10);
  CHECK(std::abs(sol.mean_pressure) <= 1e-12);
  CHECK(sol.energy_residual <= 1e-8);
}

TEST_CASE("forcing scales linearly") {
  const Discretization disc(8);
  BrinkmanSolver solver(disc, constant_coeffs(1.0, 0.5, 1.0));
  Eigen::VectorXd phi(disc.n_bulk()), mu(disc.n_bulk());
  for (int i = 0; i < disc.n_bulk(); ++i) {
    const Vec2& x = disc.geom.bulk.nodes[i];
    phi[i] = 0.3 * std::cos(M_PI * x.x());
    mu[i] = std::sin(M_PI * x.y()) + 0.2 * x.x();
  }
  Eigen::VectorXd psi = disc.trace * phi;
  Eigen::VectorXd theta(disc.n_surf());
  for (int k = 0; k < disc.n_surf(); ++k)
    theta[k] = std::cos(2.0 * M_PI * disc.geom.surface.arclength[k] / 4.0);

  BrinkmanForcing f1{phi, mu, psi, theta, {}, {}};
  BrinkmanForcing f2{phi, Eigen::VectorXd(2.0 * mu), psi, Eigen::VectorXd(2.0 * theta), {}, {}};
  const FlowSolution s1 = solver.solve(f1);
  const FlowSolution s2 = solver.solve(f2);
  CHECK((s2.velocity - 2.0 * s1.velocity).lpNorm<Eigen::Infinity>() <=
        1e-10 * std::max(1.0, s1.velocity.lpNorm<Eigen::Infinity>()));
  CHECK((s2.pressure - 2.0 * s1.pressure).lpNorm<Eigen::Infinity>() <=
        1e-10 * std::max(1.0, s1.pressure.lpNorm<Eigen::Infinity>()));
}

TEST_CASE("manufactured velocity converges at second order or better") {
  // Brinkman (lambda > 0) and the Stokes cases gamma > 0 / gamma = 0.
  struct Case {
    double lambda, gamma;
  };
  for (const Case c : {Case{1.0, 1.0}, Case{0.0, 1.0}, Case{0.0, 0.0}}) {
    BrinkmanManufactured mms{1.0, c.lambda, c.gamma};
    std::vector<double> hs, errs;
    for (int n : {4, 8, 16}) {
      const Discretization disc(n);
      BrinkmanSolver solver(disc, constant_coeffs(mms.nu, mms.lambda, mms.gamma));
      BrinkmanForcing f;
      f.body_force = [&](const Vec2& x) { return mms.body_force(x); };
      if (c.gamma > 0.0)
        f.boundary_force = [&](const Vec2& x) { return mms.boundary_force(x); };
      const FlowSolution sol = solver.solve(f);
      hs.push_back(1.0 / n);
      errs.push_back(brinkman_velocity_l2_error(disc, sol, mms));
      CHECK(sol.energy_residual <= 1e-8);
    }
    const double order = oracle::loglog_slope(hs, errs);
    CHECK(order >= 1.7);
  }
}

TEST_CASE("pressure is recovered under refinement") {
  BrinkmanManufactured mms{1.0, 1.0, 1.0};
  double prev = 0.0;
  for (int n : {4, 8, 16}) {
    const Discretization disc(n);
    BrinkmanSolver solver(disc, constant_coeffs(1.0, 1.0, 1.0));
    BrinkmanForcing f;
    f.body_force = [&](const Vec2& x) { return mms.body_force(x); };
    f.boundary_force = [&](const Vec2& x) { return mms.boundary_force(x); };
    const double err = pressure_l2_error(disc, solver.solve(f), mms);
    if (prev > 0.0) CHECK(err < 0.6 * prev);  // bounded pressure, converging
    prev = err;
  }
}

TEST_CASE("stokes with gamma1 = 0 stays coercive on the divergence-free subspace") {
  // Dense eigenvalue check at n = 4, lambda = gamma = 0 (pure Stokes on the
  // square, where the domain shape provides coercivity).
  const Discretization disc(4);
  BrinkmanSolver solver(disc, constant_coeffs(1.0, 0.0, 0.0));
  const Eigen::MatrixXd A =
      Eigen::MatrixXd(solver.velocity_block(Eigen::VectorXd(), Eigen::VectorXd()));
  const Eigen::MatrixXd B = Eigen::MatrixXd(solver.divergence_block());
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(B);
  const Eigen::MatrixXd Z = lu.kernel();
  REQUIRE(Z.cols() > 0);
  const Eigen::MatrixXd Ared = Z.transpose() * A * Z;
  const Eigen::MatrixXd M = Z.transpose() * Z;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (Ared + Ared.transpose()), M);
  CHECK(eig.eigenvalues().minCoeff() > 1e-8);
}

TEST_CASE("korn diagnostics") {
  const Discretization disc(8);
  BrinkmanSolver solver(disc, constant_coeffs(1.0, 0.0, 0.0));

  // A rigid rotation has nonzero normal trace on the square: constraining it
  // strictly shrinks the field.
  const P2Space& sp = disc.velocity;
  Eigen::VectorXd rot(2 * sp.num_scalar_dofs());
  for (int a = 0; a < sp.num_scalar_dofs(); ++a) {
    const Vec2 x = a < sp.num_vertices() ? disc.geom.bulk.nodes[a]
                                         : sp.edge_midpoints[a - sp.num_vertices()];
    rot[2 * a] = -(x.y() - 0.3);
    rot[2 * a + 1] = x.x() - 0.7;
  }
  const Eigen::VectorXd constrained = solver.constrain(rot);
  CHECK(constrained.norm() < rot.norm());
  CHECK((constrained - rot).norm() > 0.1);

  // A gradient field (non-solenoidal) yields a finite ratio.
  Eigen::VectorXd gradf(2 * sp.num_scalar_dofs());
  for (int a = 0; a < sp.num_scalar_dofs(); ++a) {
    const Vec2 x = a < sp.num_vertices() ? disc.geom.bulk.nodes[a]
                                         : sp.edge_midpoints[a - sp.num_vertices()];
    gradf[2 * a] = 2.0 * x.x() * x.y();  // grad(x^2 y)
    gradf[2 * a + 1] = x.x() * x.x();
  }
  const Eigen::VectorXd gf = solver.constrain(gradf);
  const SpMat Kg = p2_vector_grad_stiffness(sp);
  SpMat Ks = p2_vector_sym_stiffness(sp);
  Ks *= 0.5;
  const double ratio =
      std::sqrt(gf.dot(Kg * gf)) / std::sqrt(std::max(gf.dot(Ks * gf), 1e-300));
  CHECK(std::isfinite(ratio));
  CHECK(ratio > 0.0);

  // Sampled Korn constants are stable under reseeding (+-10%).
  const KornReport a = verify_korn(disc, 100, 11);
  const KornReport b = verify_korn(disc, 100, 2024);
  CHECK(a.max_ratio_full > 0.0);
  CHECK(a.max_ratio_boundary > 0.0);
  CHECK(a.max_ratio_full == doctest::Approx(b.max_ratio_full).epsilon(0.10));
  CHECK(a.max_ratio_boundary == doctest::Approx(b.max_ratio_boundary).epsilon(0.10));
}

TEST_CASE("coefficient bound violations are caught at quadrature points") {
  const Discretization disc(4);
  Coefficients c = constant_coeffs(1.0, 0.0, 0.0);
  // Table dips below the declared lower bound only in a narrow band that the
  // setup spot checks miss; assembling with phi inside the band trips it.
  c.nu = CoefficientFn::tabulated("nu", {-1.0, 0.24, 0.25, 0.26, 1.0},
                                  {1.0, 1.0, 0.1, 1.0, 1.0}, 0.5, 1.0);
  BrinkmanForcing f;
  f.phi = Eigen::VectorXd::Constant(disc.n_bulk(), 0.25);
  f.mu = Eigen::VectorXd::Constant(disc.n_bulk(), 0.0);
  CHECK_THROWS_WITH_AS(
      [&] {
        BrinkmanSolver solver(disc, c);
        solver.solve(f);
      }(),
      doctest::Contains("bound"), ValidationError);
}

TEST_CASE("declared coefficient bounds are validated at setup") {
  Coefficients c;
  c.nu = CoefficientFn::constant("nu", -1.0);
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("nu"), ValidationError);
  Coefficients c2;
  c2.mob_bulk = CoefficientFn::constant("M_Omega", 0.0);
  CHECK_THROWS_WITH_AS(c2.validate(), doctest::Contains("M_Omega"), ValidationError);
}
