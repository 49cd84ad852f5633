#include "chb/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chb/errors.hpp"

namespace chb {

CoefficientFn CoefficientFn::constant(std::string name, double v) {
  CoefficientFn c;
  c.kind = Kind::Constant;
  c.name = std::move(name);
  c.value = v;
  c.lower = v;
  c.upper = v;
  return c;
}

CoefficientFn CoefficientFn::clamped_affine(std::string name, double offset,
                                            double slope, double lo, double hi) {
  CoefficientFn c;
  c.kind = Kind::ClampedAffine;
  c.name = std::move(name);
  c.offset = offset;
  c.slope = slope;
  c.lower = lo;
  c.upper = hi;
  return c;
}

CoefficientFn CoefficientFn::tabulated(std::string name, std::vector<double> r,
                                       std::vector<double> v, double lo, double hi) {
  if (r.size() != v.size() || r.size() < 2)
    throw ValidationError("tabulated coefficient: need matching r/value lists of length >= 2");
  CoefficientFn c;
  c.kind = Kind::Tabulated;
  c.name = std::move(name);
  c.table_r = std::move(r);
  c.table_v = std::move(v);
  c.lower = lo;
  c.upper = hi;
  return c;
}

double CoefficientFn::operator()(double r) const {
  switch (kind) {
    case Kind::Constant: return value;
    case Kind::ClampedAffine: return std::clamp(offset + slope * r, lower, upper);
    case Kind::Tabulated: {
      if (r <= table_r.front()) return table_v.front();
      if (r >= table_r.back()) return table_v.back();
      const auto it = std::upper_bound(table_r.begin(), table_r.end(), r);
      const size_t k = static_cast<size_t>(it - table_r.begin());
      const double t = (r - table_r[k - 1]) / (table_r[k] - table_r[k - 1]);
      return table_v[k - 1] + t * (table_v[k] - table_v[k - 1]);
    }
  }
  return value;
}

double CoefficientFn::eval_checked(double r) const {
  const double v = (*this)(r);
  if (v < lower - 1e-14 || v > upper + 1e-14) {
    std::ostringstream os;
    os << "coefficient bound violated: " << name << "(" << r << ") = " << v
       << " outside the declared range " << lower << " <= " << name
       << " <= " << upper;
    throw ValidationError(os.str());
  }
  return v;
}

void Coefficients::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ValidationError(msg);
  };
  require(nu.lower > 0.0,
          "viscosity bound violated: nu must satisfy 0 < nu1 <= nu(r) <= nu2 "
          "(declared nu1 = " + std::to_string(nu.lower) + ")");
  require(nu.upper >= nu.lower, "viscosity bound violated: nu2 >= nu1 required");
  require(lambda.lower >= 0.0,
          "permeability bound violated: lambda must satisfy 0 <= lambda(r) <= lambda2");
  require(lambda.upper >= lambda.lower,
          "permeability bound violated: lambda2 >= lambda1 required");
  require(gamma.lower >= 0.0,
          "friction bound violated: gamma must satisfy 0 <= gamma1 <= gamma(r) <= gamma2");
  require(gamma.upper >= gamma.lower, "friction bound violated: gamma2 >= gamma1 required");
  require(mob_bulk.lower > 0.0,
          "mobility bound violated: M_Omega must satisfy 0 < M1 <= M_Omega(r) <= M2 "
          "(declared M1 = " + std::to_string(mob_bulk.lower) + ")");
  require(mob_bulk.upper >= mob_bulk.lower, "mobility bound violated: M2 >= M1 required");
  require(mob_surf.lower > 0.0,
          "mobility bound violated: M_Gamma must satisfy 0 < MG1 <= M_Gamma(r) <= MG2");
  require(mob_surf.upper >= mob_surf.lower, "mobility bound violated: MG2 >= MG1 required");
  // Spot-check the realized values against the declared ranges.
  for (const CoefficientFn* c : {&nu, &lambda, &gamma, &mob_bulk, &mob_surf})
    for (double r : {-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) c->eval_checked(r);
}

}  // namespace chb
