#pragma once

// Double-well potentials with their convex/smooth splittings, maximal
// monotone graphs, and the Moreau-Yosida machinery (resolvent, Yosida
// approximation, Moreau envelope). All objects are immutable values;
// evaluation is pure and reentrant.

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace chb {

constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Maximal monotone graphs with 0 in beta(0)
// ---------------------------------------------------------------------------

enum class GraphKind { Linear, Cubic, Logarithmic, Obstacle, Custom };

struct MonotoneGraph {
  GraphKind kind = GraphKind::Linear;
  double scale = 1.0;   // Linear: s*r ; Cubic: s*r^3 ; Logarithmic: s*atanh(r)
  double dom_lo = -kInf, dom_hi = kInf;  // closure of D(beta)
  // Custom graphs: single-valued monotone function on the open domain.
  std::function<double(double)> fn, dfn, primitive;

  static MonotoneGraph linear(double s = 1.0);
  static MonotoneGraph cubic(double s = 1.0);
  static MonotoneGraph logarithmic(double theta = 1.0);  // (theta/2) ln((1+r)/(1-r))
  static MonotoneGraph obstacle();                        // subdifferential of I_[-1,1]
  static MonotoneGraph custom(std::function<double(double)> f,
                              std::function<double(double)> df,
                              std::function<double(double)> prim,
                              double lo, double hi);

  bool in_domain(double r) const { return r >= dom_lo && r <= dom_hi; }
  bool in_interior(double r) const { return r > dom_lo && r < dom_hi; }

  // Minimal section beta°(r); defined on the closure of D(beta). For the
  // obstacle graph this is identically zero. Throws DomainError outside.
  double minimal_section(double r) const;
  // Pointwise derivative where the graph is a differentiable function.
  double derivative(double r) const;
  // Convex primitive beta_hat with beta_hat(0) = 0; +infinity outside the
  // domain closure.
  double primitive_value(double r) const;
};

// ---------------------------------------------------------------------------
// Yosida approximation
// ---------------------------------------------------------------------------

struct ResolventOptions {
  double tol = 1e-12;  // |y + eps*beta(y) - r|
  int max_iter = 200;
};

struct YosidaGraph {
  MonotoneGraph base;
  double eps = 0.5;  // in (0,1)
  ResolventOptions opts;

  // J_eps(r) = (I + eps*beta)^{-1}(r). Closed forms for the linear and
  // obstacle graphs; safeguarded bisection/Newton otherwise. Throws
  // SolverError on non-convergence.
  double resolvent(double r) const;
  // beta_eps(r) = (r - J_eps(r))/eps; monotone and 1/eps-Lipschitz.
  double value(double r) const;
  // a.e. derivative of beta_eps.
  double derivative(double r) const;
  // Moreau envelope beta_hat_eps(r) = beta_hat(J) + (r-J)^2/(2 eps); equals
  // the primitive of beta_eps.
  double envelope(double r) const;
};

// ---------------------------------------------------------------------------
// Potentials and splittings
// ---------------------------------------------------------------------------

enum class PotentialKind { Polynomial, Logarithmic, DoubleObstacle, CustomRegular };

struct PotentialEval {
  double value;
  double d1;
  double d2;
};

// One side (bulk or surface) of a potential pair, split as
// F = beta_hat + pi_hat with beta_hat convex, beta_hat(0) = 0, and pi
// Lipschitz.
struct SplitPotential {
  PotentialKind kind = PotentialKind::Polynomial;
  double alpha = 1.0;                   // polynomial strength
  double theta = 1.0, theta_c = 2.0;    // logarithmic temperatures
  // CustomRegular: callables and growth exponent.
  std::function<double(double)> cust_value, cust_d1, cust_d2;
  MonotoneGraph cust_graph;
  std::function<double(double)> cust_pi, cust_pi_hat;
  double cust_pi_lipschitz = 0.0;
  double growth_exponent = 4.0;

  static SplitPotential polynomial(double alpha = 1.0);
  static SplitPotential logarithmic(double theta = 1.0, double theta_c = 2.0);
  static SplitPotential double_obstacle();

  // F and its derivatives. Logarithmic: |r| >= 1 throws DomainError.
  // Obstacle: derivative queries throw UnsupportedOperation (use the graph
  // machinery instead); value() itself is defined on [-1,1] only.
  PotentialEval eval(double r) const;
  double value(double r) const;

  // Splitting pieces.
  MonotoneGraph convex_graph() const;     // beta = d(beta_hat)
  double beta_hat(double r) const;
  double pi(double r) const;
  double pi_hat(double r) const;
  double pi_lipschitz() const;
  bool is_singular() const;
  // Closure of the finiteness domain of F.
  double domain_lo() const;
  double domain_hi() const;
};

struct PotentialPair {
  SplitPotential bulk, surface;
  bool singular_mode = false;
  double yosida_eps = 0.125;     // singular runs only
  double kappa1 = 1.0, kappa2 = 1.0;
  double shift_bulk = 0.0, shift_surf = 0.0;  // nonnegativity normalization

  // Computes the shifts making the (regularized) potentials nonnegative on a
  // sampling grid; no-op for potentials already >= 0.
  void normalize_nonnegative();
};

// The nonlinearity the time stepper actually uses: convex-part derivative
// (Yosida-regularized in singular mode) plus the smooth perturbation.
struct ConvexSplit {
  std::function<double(double)> beta, dbeta, beta_hat;
  std::function<double(double)> pi, pi_hat;
  double shift = 0.0;
};

ConvexSplit make_convex_split(const SplitPotential& pot, bool singular,
                              double eps, double shift);

// ---------------------------------------------------------------------------
// Graph domination (boundary controls bulk)
// ---------------------------------------------------------------------------

struct DominationReport {
  bool pass = false;
  double worst_r = 0.0;
  double worst_excess = 0.0;   // |beta| - (k1 |beta_G| + k2) at the worst sample
  double min_feasible_kappa1 = 0.0;  // at the given kappa2; +inf if infeasible
};

// Checks |beta°(r)| <= kappa1 |beta_G°(r)| + kappa2 at every sample (samples
// must lie in D(beta_G), which must be contained in D(beta)).
DominationReport check_domination(const MonotoneGraph& bulk,
                                  const MonotoneGraph& surf, double kappa1,
                                  double kappa2,
                                  const std::vector<double>& samples);

// Same inequality transferred to the Yosida approximations, checked for every
// eps in the list over arbitrary real samples.
DominationReport check_domination_transfer(const MonotoneGraph& bulk,
                                           const MonotoneGraph& surf,
                                           double kappa1, double kappa2,
                                           const std::vector<double>& samples,
                                           const std::vector<double>& eps_list);

}  // namespace chb
