#pragma once

// Phase-dependent coefficient functions with declared bounds: viscosity nu,
// permeability lambda, friction gamma, and the two mobilities. Bounds are
// validated once at setup and re-checked at quadrature points during
// assembly.

#include <string>
#include <vector>

namespace chb {

struct CoefficientFn {
  enum class Kind { Constant, ClampedAffine, Tabulated };
  Kind kind = Kind::Constant;
  std::string name = "coefficient";
  double value = 1.0;             // Constant
  double offset = 0.0, slope = 0.0;  // ClampedAffine: clamp(offset + slope*r)
  std::vector<double> table_r, table_v;  // Tabulated: piecewise linear
  double lower = 0.0, upper = 1.0;       // declared bounds

  static CoefficientFn constant(std::string name, double v);
  static CoefficientFn clamped_affine(std::string name, double offset,
                                      double slope, double lo, double hi);
  static CoefficientFn tabulated(std::string name, std::vector<double> r,
                                 std::vector<double> v, double lo, double hi);

  double operator()(double r) const;
  // Evaluate and verify the declared bounds; throws ValidationError naming
  // the violated inequality.
  double eval_checked(double r) const;
  bool is_constant() const { return kind == Kind::Constant; }
};

struct Coefficients {
  CoefficientFn nu = CoefficientFn::constant("nu", 1.0);
  CoefficientFn lambda = CoefficientFn::constant("lambda", 0.0);
  CoefficientFn gamma = CoefficientFn::constant("gamma", 0.0);
  CoefficientFn mob_bulk = CoefficientFn::constant("M_Omega", 1.0);
  CoefficientFn mob_surf = CoefficientFn::constant("M_Gamma", 1.0);

  // Declared-bound admissibility: 0 < nu1 <= nu <= nu2, 0 <= lambda <=
  // lambda2, 0 <= gamma1 <= gamma <= gamma2, and strictly positive bounded
  // mobilities. Throws ValidationError quoting the violated bound.
  void validate() const;
  bool flow_coeffs_constant() const {
    return nu.is_constant() && lambda.is_constant() && gamma.is_constant();
  }
};

}  // namespace chb
