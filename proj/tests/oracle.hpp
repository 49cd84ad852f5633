#pragma once

// Test-only oracles, independent of the library's solver and quadrature
// paths: plain bisection, composite Simpson, a refined-quadrature energy of
// P1 interpolants, and the domination sweep. Golden values derived from these
// live in tests/data/goldens.csv.

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "chb/fem.hpp"
#include "chb/potentials.hpp"

namespace oracle {

inline double bisect(const std::function<double(double)>& f, double lo, double hi,
                     int iters = 200) {
  double flo = f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((flo <= 0.0 && fm <= 0.0) || (flo > 0.0 && fm > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

inline double simpson(const std::function<double(double)>& f, double a, double b,
                      int n = 2048) {
  double s = f(a) + f(b);
  const double h = (b - a) / n;
  for (int i = 1; i < n; ++i) s += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
  return s * h / 3.0;
}

// Least-squares slope of log(y) over log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Minimal feasible kappa1 for |b(r)| <= kappa1 |bg(r)| + kappa2 over samples;
// +infinity when some sample with |bg| ~ 0 still exceeds kappa2.
inline double min_feasible_kappa1(const std::function<double(double)>& b,
                                  const std::function<double(double)>& bg,
                                  const std::vector<double>& samples, double kappa2) {
  double k1 = 0.0;
  for (double r : samples) {
    const double bb = std::abs(b(r));
    const double gg = std::abs(bg(r));
    if (bb <= kappa2) continue;
    if (gg <= 1e-14) return std::numeric_limits<double>::infinity();
    k1 = std::max(k1, (bb - kappa2) / gg);
  }
  return k1;
}

// Energy of a P1 interpolant state by refined quadrature (midedge rule on
// L^2 subtriangles per element, composite 2-point Gauss on sub-segments).
// Gradient terms are computed exactly from the interpolant.
inline double refined_energy(const chb::Discretization& disc, const Eigen::VectorXd& phi,
                             const Eigen::VectorXd& psi,
                             const std::function<double(double)>& F,
                             const std::function<double(double)>& G, double sigma,
                             int L = 16) {
  const chb::BulkMesh& mesh = disc.geom.bulk;
  double grad2 = 0.0, pot = 0.0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto& tri = mesh.triangles[t];
    const double A = mesh.element_areas[t];
    grad2 += A * chb::p1_gradient(mesh, phi, t).squaredNorm();
    auto val = [&](double l1, double l2) {
      return F(phi[tri[0]] * (1.0 - l1 - l2) + phi[tri[1]] * l1 + phi[tri[2]] * l2);
    };
    double acc = 0.0;
    const double h = 1.0 / L;
    for (int p = 0; p < L; ++p)
      for (int q = 0; q < L - p; ++q) {
        const double u = p * h, v = q * h;
        acc += (h * h) / 3.0 *
               (val(u + h / 2, v) + val(u + h / 2, v + h / 2) + val(u, v + h / 2));
        if (q < L - p - 1)
          acc += (h * h) / 3.0 * (val(u + h / 2, v + h) + val(u + h, v + h / 2) +
                                  val(u + h / 2, v + h / 2));
      }
    pot += A * acc;
  }
  const chb::SurfaceMesh& surf = disc.geom.surface;
  const int S = surf.num_nodes();
  double sgrad2 = 0.0, spot = 0.0, robin2 = 0.0;
  const double ga = 0.5 - 0.5 / std::sqrt(3.0), gb = 0.5 + 0.5 / std::sqrt(3.0);
  for (int k = 0; k < S; ++k) {
    const double h = surf.segment_length[k];
    const double pa = psi[k], pb = psi[(k + 1) % S];
    const double d = (pb - pa) / h;
    sgrad2 += h * d * d;
    const int tb0 = disc.geom.trace_map.to_bulk[k];
    const int tb1 = disc.geom.trace_map.to_bulk[(k + 1) % S];
    double acc = 0.0, accr = 0.0;
    const int Ls = 4 * L;
    for (int p = 0; p < Ls; ++p)
      for (double gp : {ga, gb}) {
        const double xi = (p + gp) / Ls;
        const double pv = (1.0 - xi) * pa + xi * pb;
        acc += 0.5 / Ls * G(pv);
        const double mv = pv - ((1.0 - xi) * phi[tb0] + xi * phi[tb1]);
        accr += 0.5 / Ls * mv * mv;
      }
    spot += h * acc;
    robin2 += h * accr;
  }
  return 0.5 * grad2 + pot + 0.5 * sgrad2 + spot + 0.5 * sigma * robin2;
}

struct Golden {
  double value = 0.0;
  double tolerance = 0.0;
};

inline std::map<std::string, Golden> load_goldens(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot read goldens table: " + path);
  std::map<std::string, Golden> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string name, v, t;
    if (!std::getline(ss, name, ',') || !std::getline(ss, v, ',') || !std::getline(ss, t))
      throw std::runtime_error("malformed goldens row: " + line);
    out[name] = Golden{std::stod(v), std::stod(t)};
  }
  return out;
}

// Manufactured nodal fields used by the frozen energy golden: the state is
// the P1 interpolant of 0.2 + 0.1 cos(pi x) cos(pi y) with psi its trace.
inline Eigen::VectorXd golden_energy_phi(const chb::Discretization& disc) {
  Eigen::VectorXd phi(disc.n_bulk());
  for (int i = 0; i < disc.n_bulk(); ++i) {
    const chb::Vec2& x = disc.geom.bulk.nodes[i];
    phi[i] = 0.2 + 0.1 * std::cos(M_PI * x.x()) * std::cos(M_PI * x.y());
  }
  return phi;
}

}  // namespace oracle
