#pragma once

// Quadrature tables. Triangle rules are given in barycentric coordinates with
// weights summing to one (multiply by the element area); segment rules live on
// [0,1] with weights summing to one (multiply by the segment length).

#include <array>
#include <cstddef>

namespace chb {

struct TriQuadPoint {
  double l0, l1, l2;
  double w;
};

struct TriQuad {
  const TriQuadPoint* pts;
  int n;
};

struct SegQuadPoint {
  double x;
  double w;
};

struct SegQuad {
  const SegQuadPoint* pts;
  int n;
};

// Midpoints-of-edges rule, exact for degree 2. Used for the potential terms so
// that assembly and energy evaluation share the same quadrature points.
const TriQuad& tri_quad_deg2();

// Six-point rule, exact for degree 4. Default for coefficient-weighted forms
// and everything involving quadratic velocities.
const TriQuad& tri_quad_deg4();

// Twelve-point rule, exact for degree 6. Error norms and reference values.
const TriQuad& tri_quad_deg6();

SegQuad seg_gauss(int npoints);  // npoints in {1,...,5}, exact degree 2n-1

}  // namespace chb
