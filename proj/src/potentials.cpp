#include "chb/potentials.hpp"

#include <algorithm>
#include <cmath>

#include "chb/errors.hpp"

namespace chb {

namespace {

inline double sqr(double x) { return x * x; }

// Primitive of the logarithmic monotone part, (theta/2)[(1+r)ln(1+r) +
// (1-r)ln(1-r)], extended by its limit theta*ln(2) at the endpoints.
double log_primitive(double theta, double r) {
  const double a = (1.0 + r) <= 0.0 ? 0.0 : (1.0 + r) * std::log1p(r);
  const double b = (1.0 - r) <= 0.0 ? 0.0 : (1.0 - r) * std::log1p(-r);
  return 0.5 * theta * (a + b);
}

}  // namespace

// ---------------------------------------------------------------------------
// MonotoneGraph
// ---------------------------------------------------------------------------

MonotoneGraph MonotoneGraph::linear(double s) {
  MonotoneGraph g;
  g.kind = GraphKind::Linear;
  g.scale = s;
  return g;
}

MonotoneGraph MonotoneGraph::cubic(double s) {
  MonotoneGraph g;
  g.kind = GraphKind::Cubic;
  g.scale = s;
  return g;
}

MonotoneGraph MonotoneGraph::logarithmic(double theta) {
  MonotoneGraph g;
  g.kind = GraphKind::Logarithmic;
  g.scale = theta;
  g.dom_lo = -1.0;
  g.dom_hi = 1.0;
  return g;
}

MonotoneGraph MonotoneGraph::obstacle() {
  MonotoneGraph g;
  g.kind = GraphKind::Obstacle;
  g.dom_lo = -1.0;
  g.dom_hi = 1.0;
  return g;
}

MonotoneGraph MonotoneGraph::custom(std::function<double(double)> f,
                                    std::function<double(double)> df,
                                    std::function<double(double)> prim, double lo,
                                    double hi) {
  MonotoneGraph g;
  g.kind = GraphKind::Custom;
  g.fn = std::move(f);
  g.dfn = std::move(df);
  g.primitive = std::move(prim);
  g.dom_lo = lo;
  g.dom_hi = hi;
  return g;
}

double MonotoneGraph::minimal_section(double r) const {
  if (!in_domain(r)) throw DomainError("minimal_section: argument outside D(beta)");
  switch (kind) {
    case GraphKind::Linear: return scale * r;
    case GraphKind::Cubic: return scale * r * r * r;
    case GraphKind::Logarithmic:
      if (r <= -1.0 || r >= 1.0)
        throw DomainError("minimal_section: logarithmic graph needs |r| < 1");
      return scale * std::atanh(r);
    case GraphKind::Obstacle:
      return 0.0;  // 0 is the element of least modulus everywhere on [-1,1]
    case GraphKind::Custom: return fn(r);
  }
  return 0.0;
}

double MonotoneGraph::derivative(double r) const {
  switch (kind) {
    case GraphKind::Linear: return scale;
    case GraphKind::Cubic: return 3.0 * scale * r * r;
    case GraphKind::Logarithmic: return scale / std::max(1.0 - r * r, 1e-300);
    case GraphKind::Obstacle:
      throw UnsupportedOperation("derivative: obstacle graph is multivalued");
    case GraphKind::Custom: return dfn(r);
  }
  return 0.0;
}

double MonotoneGraph::primitive_value(double r) const {
  if (r < dom_lo || r > dom_hi) return kInf;
  switch (kind) {
    case GraphKind::Linear: return 0.5 * scale * r * r;
    case GraphKind::Cubic: return 0.25 * scale * r * r * r * r;
    case GraphKind::Logarithmic: return log_primitive(scale, r);
    case GraphKind::Obstacle: return 0.0;
    case GraphKind::Custom: return primitive(r);
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// YosidaGraph
// ---------------------------------------------------------------------------

double YosidaGraph::resolvent(double r) const {
  switch (base.kind) {
    case GraphKind::Linear:
      return r / (1.0 + eps * base.scale);
    case GraphKind::Obstacle:
      return std::clamp(r, -1.0, 1.0);
    case GraphKind::Logarithmic: {
      // Solve tanh(t) + eps*theta*t = r in t (well conditioned for all r);
      // then J = tanh(t) and beta_eps(r) = theta*t. Newton converges
      // quadratically, so we polish well below the contract tolerance.
      const double c = eps * base.scale;
      double lo = std::min(0.0, r / c), hi = std::max(0.0, r / c);
      const double target = 1e-15 * (1.0 + std::abs(r));
      auto res = [&](double t) { return std::tanh(t) + c * t - r; };
      double t = std::clamp(r, lo, hi);
      for (int it = 0; it < opts.max_iter; ++it) {
        const double f = res(t);
        if (std::abs(f) <= target) break;
        (f > 0.0 ? hi : lo) = t;
        const double df = 1.0 - sqr(std::tanh(t)) + c;
        double tn = t - f / df;
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);  // bisection safeguard
        t = tn;
      }
      if (std::abs(res(t)) > opts.tol)
        throw SolverError("resolvent: logarithmic solve did not converge");
      return std::tanh(t);
    }
    case GraphKind::Cubic:
    case GraphKind::Custom: {
      // y + eps*beta(y) = r with beta monotone, 0 in beta(0): the root lies
      // between 0 and r (intersected with the graph domain).
      auto beta = [&](double y) {
        return base.kind == GraphKind::Cubic ? base.scale * y * y * y : base.fn(y);
      };
      auto dbeta = [&](double y) {
        return base.kind == GraphKind::Cubic ? 3.0 * base.scale * y * y : base.dfn(y);
      };
      const double margin = 1e-12 * (base.dom_hi - base.dom_lo);
      double lo = std::max(std::min(0.0, r), base.dom_lo + (std::isfinite(base.dom_lo) ? margin : 0.0));
      double hi = std::min(std::max(0.0, r), base.dom_hi - (std::isfinite(base.dom_hi) ? margin : 0.0));
      const double target = 1e-15 * (1.0 + std::abs(r));
      auto res = [&](double y) { return y + eps * beta(y) - r; };
      double y = std::clamp(r, lo, hi);
      double f = res(y);
      for (int it = 0; it < opts.max_iter && std::abs(f) > target; ++it) {
        (f > 0.0 ? hi : lo) = y;
        const double df = 1.0 + eps * dbeta(y);
        double yn = y - f / df;
        if (!(yn > lo && yn < hi)) yn = 0.5 * (lo + hi);
        y = yn;
        f = res(y);
      }
      if (std::abs(f) > opts.tol)
        throw SolverError("resolvent: iteration cap reached, |residual| = " +
                          std::to_string(std::abs(f)));
      return y;
    }
  }
  return r;
}

double YosidaGraph::value(double r) const {
  const double j = resolvent(r);
  return (r - j) / eps;
}

double YosidaGraph::derivative(double r) const {
  switch (base.kind) {
    case GraphKind::Linear:
      return base.scale / (1.0 + eps * base.scale);
    case GraphKind::Obstacle:
      return (r < -1.0 || r > 1.0) ? 1.0 / eps : 0.0;
    default: {
      // beta_eps'(r) = beta'(J) / (1 + eps beta'(J)) a.e.
      const double j = resolvent(r);
      const double d = base.derivative(j);
      if (!std::isfinite(d)) return 1.0 / eps;
      return d / (1.0 + eps * d);
    }
  }
}

double YosidaGraph::envelope(double r) const {
  const double j = resolvent(r);
  const double hat = base.primitive_value(j);
  return hat + sqr(r - j) / (2.0 * eps);
}

// ---------------------------------------------------------------------------
// SplitPotential
// ---------------------------------------------------------------------------

SplitPotential SplitPotential::polynomial(double alpha) {
  SplitPotential p;
  p.kind = PotentialKind::Polynomial;
  p.alpha = alpha;
  p.growth_exponent = 4.0;
  return p;
}

SplitPotential SplitPotential::logarithmic(double theta, double theta_c) {
  SplitPotential p;
  p.kind = PotentialKind::Logarithmic;
  p.theta = theta;
  p.theta_c = theta_c;
  p.growth_exponent = 2.0;
  return p;
}

SplitPotential SplitPotential::double_obstacle() {
  SplitPotential p;
  p.kind = PotentialKind::DoubleObstacle;
  p.growth_exponent = 2.0;
  return p;
}

PotentialEval SplitPotential::eval(double r) const {
  switch (kind) {
    case PotentialKind::Polynomial: {
      const double s = r * r - 1.0;
      return {0.25 * alpha * s * s, alpha * r * s, alpha * (3.0 * r * r - 1.0)};
    }
    case PotentialKind::Logarithmic: {
      if (std::abs(r) >= 1.0)
        throw DomainError("logarithmic potential: argument must satisfy |r| < 1");
      const double value = log_primitive(theta, r) + 0.5 * theta_c * (1.0 - r * r);
      const double d1 = theta * std::atanh(r) - theta_c * r;
      const double d2 = theta / (1.0 - r * r) - theta_c;
      return {value, d1, d2};
    }
    case PotentialKind::DoubleObstacle:
      throw UnsupportedOperation(
          "double-obstacle potential: pointwise derivatives undefined; use the "
          "graph machinery");
    case PotentialKind::CustomRegular:
      return {cust_value(r), cust_d1(r), cust_d2 ? cust_d2(r) : 0.0};
  }
  return {};
}

double SplitPotential::value(double r) const {
  if (kind == PotentialKind::DoubleObstacle) {
    if (std::abs(r) > 1.0)
      throw DomainError("double-obstacle potential: value defined on [-1,1] only");
    return 0.5 * (1.0 - r * r);
  }
  return eval(r).value;
}

MonotoneGraph SplitPotential::convex_graph() const {
  switch (kind) {
    case PotentialKind::Polynomial: return MonotoneGraph::cubic(alpha);
    case PotentialKind::Logarithmic: return MonotoneGraph::logarithmic(theta);
    case PotentialKind::DoubleObstacle: return MonotoneGraph::obstacle();
    case PotentialKind::CustomRegular: return cust_graph;
  }
  return MonotoneGraph::linear();
}

double SplitPotential::beta_hat(double r) const {
  return convex_graph().primitive_value(r);
}

double SplitPotential::pi(double r) const {
  switch (kind) {
    case PotentialKind::Polynomial: return -alpha * r;
    case PotentialKind::Logarithmic: return -theta_c * r;
    case PotentialKind::DoubleObstacle: return -r;
    case PotentialKind::CustomRegular: return cust_pi(r);
  }
  return 0.0;
}

double SplitPotential::pi_hat(double r) const {
  switch (kind) {
    case PotentialKind::Polynomial: return 0.25 * alpha - 0.5 * alpha * r * r;
    case PotentialKind::Logarithmic: return 0.5 * theta_c * (1.0 - r * r);
    case PotentialKind::DoubleObstacle: return 0.5 * (1.0 - r * r);
    case PotentialKind::CustomRegular: return cust_pi_hat(r);
  }
  return 0.0;
}

double SplitPotential::pi_lipschitz() const {
  switch (kind) {
    case PotentialKind::Polynomial: return alpha;
    case PotentialKind::Logarithmic: return theta_c;
    case PotentialKind::DoubleObstacle: return 1.0;
    case PotentialKind::CustomRegular: return cust_pi_lipschitz;
  }
  return 0.0;
}

bool SplitPotential::is_singular() const {
  return kind == PotentialKind::Logarithmic || kind == PotentialKind::DoubleObstacle ||
         (kind == PotentialKind::CustomRegular && std::isfinite(cust_graph.dom_lo));
}

double SplitPotential::domain_lo() const { return convex_graph().dom_lo; }
double SplitPotential::domain_hi() const { return convex_graph().dom_hi; }

// The potential value F(r) = beta_hat(r) + pi_hat(r), without derivative
// queries; finite everywhere for Yosida-regularized evaluation paths.
ConvexSplit make_convex_split(const SplitPotential& pot, bool singular, double eps,
                              double shift) {
  ConvexSplit s;
  s.shift = shift;
  s.pi = [pot](double r) { return pot.pi(r); };
  s.pi_hat = [pot](double r) { return pot.pi_hat(r); };
  if (singular) {
    YosidaGraph y{pot.convex_graph(), eps, {}};
    s.beta = [y](double r) { return y.value(r); };
    s.dbeta = [y](double r) { return y.derivative(r); };
    s.beta_hat = [y](double r) { return y.envelope(r); };
  } else {
    const MonotoneGraph g = pot.convex_graph();
    if (g.kind == GraphKind::Obstacle)
      throw ValidationError(
          "potential mode: the double-obstacle potential requires the singular "
          "(Yosida-regularized) mode");
    s.beta = [g](double r) { return g.minimal_section(r); };
    s.dbeta = [g](double r) { return g.derivative(r); };
    s.beta_hat = [g](double r) { return g.primitive_value(r); };
  }
  return s;
}

void PotentialPair::normalize_nonnegative() {
  // F_eps = beta_hat_eps + pi_hat can dip below zero; shift so that energies
  // stay nonnegative and comparable across eps. Grid minimization is enough
  // at the accuracy diagnostics need.
  auto min_on_grid = [&](const SplitPotential& pot) {
    const ConvexSplit s = make_convex_split(pot, singular_mode, yosida_eps, 0.0);
    double lo = -3.0, hi = 3.0;
    double m = 0.0;
    for (int i = 0; i <= 6000; ++i) {
      const double r = lo + (hi - lo) * i / 6000.0;
      const double v = s.beta_hat(r) + s.pi_hat(r);
      if (std::isfinite(v)) m = std::min(m, v);
    }
    return m;
  };
  shift_bulk = std::max(0.0, -min_on_grid(bulk));
  shift_surf = std::max(0.0, -min_on_grid(surface));
}

// ---------------------------------------------------------------------------
// Domination checks
// ---------------------------------------------------------------------------

DominationReport check_domination(const MonotoneGraph& bulk,
                                  const MonotoneGraph& surf, double kappa1,
                                  double kappa2, const std::vector<double>& samples) {
  if (samples.empty()) throw DomainError("check_domination: empty sample set");
  // (The required D(beta_G) subset of D(beta) fails structurally when the
  // surface domain sticks out; the sample scan below still reports the worst
  // violation on the common domain.)
  const bool domains_ok = surf.dom_lo >= bulk.dom_lo && surf.dom_hi <= bulk.dom_hi;
  DominationReport rep;
  rep.pass = domains_ok;
  rep.min_feasible_kappa1 = domains_ok ? 0.0 : kInf;
  rep.worst_excess = -kInf;
  for (double r : samples) {
    if (!surf.in_domain(r)) throw DomainError("check_domination: sample outside D(beta_G)");
    if (!bulk.in_domain(r)) {
      rep.pass = false;
      rep.worst_excess = kInf;
      rep.worst_r = r;
      continue;
    }
    const double b = std::abs(bulk.minimal_section(r));
    const double bg = std::abs(surf.minimal_section(r));
    const double excess = b - (kappa1 * bg + kappa2);
    if (excess > rep.worst_excess) {
      rep.worst_excess = excess;
      rep.worst_r = r;
    }
    if (excess > 0.0) rep.pass = false;
    if (b > kappa2 && domains_ok) {
      rep.min_feasible_kappa1 =
          (bg > 1e-14) ? std::max(rep.min_feasible_kappa1, (b - kappa2) / bg) : kInf;
    }
  }
  return rep;
}

DominationReport check_domination_transfer(const MonotoneGraph& bulk,
                                           const MonotoneGraph& surf, double kappa1,
                                           double kappa2,
                                           const std::vector<double>& samples,
                                           const std::vector<double>& eps_list) {
  if (samples.empty() || eps_list.empty())
    throw DomainError("check_domination_transfer: empty sample or eps set");
  DominationReport rep;
  rep.pass = true;
  rep.min_feasible_kappa1 = 0.0;
  rep.worst_excess = -kInf;
  for (double eps : eps_list) {
    YosidaGraph yb{bulk, eps, {}};
    YosidaGraph ys{surf, eps, {}};
    for (double r : samples) {
      const double b = std::abs(yb.value(r));
      const double bg = std::abs(ys.value(r));
      const double excess = b - (kappa1 * bg + kappa2);
      if (excess > rep.worst_excess) {
        rep.worst_excess = excess;
        rep.worst_r = r;
      }
      if (excess > 0.0) rep.pass = false;
      if (b > kappa2) {
        rep.min_feasible_kappa1 =
            (bg > 1e-14) ? std::max(rep.min_feasible_kappa1, (b - kappa2) / bg) : kInf;
      }
    }
  }
  return rep;
}

}  // namespace chb
