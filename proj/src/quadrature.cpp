#include "chb/quadrature.hpp"

#include "chb/errors.hpp"

namespace chb {

namespace {

const TriQuadPoint kDeg2[3] = {
    {0.5, 0.5, 0.0, 1.0 / 3.0},
    {0.0, 0.5, 0.5, 1.0 / 3.0},
    {0.5, 0.0, 0.5, 1.0 / 3.0},
};

// Dunavant degree-4 rule.
const TriQuadPoint kDeg4[6] = {
    {0.816847572980459, 0.091576213509771, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.816847572980459, 0.091576213509771, 0.109951743655322},
    {0.091576213509771, 0.091576213509771, 0.816847572980459, 0.109951743655322},
    {0.108103018168070, 0.445948490915965, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.108103018168070, 0.445948490915965, 0.223381589678011},
    {0.445948490915965, 0.445948490915965, 0.108103018168070, 0.223381589678011},
};

// Dunavant degree-6 rule.
const TriQuadPoint kDeg6[12] = {
    {0.873821971016996, 0.063089014491502, 0.063089014491502, 0.050844906370207},
    {0.063089014491502, 0.873821971016996, 0.063089014491502, 0.050844906370207},
    {0.063089014491502, 0.063089014491502, 0.873821971016996, 0.050844906370207},
    {0.501426509658179, 0.249286745170910, 0.249286745170911, 0.116786275726379},
    {0.249286745170910, 0.501426509658179, 0.249286745170911, 0.116786275726379},
    {0.249286745170910, 0.249286745170911, 0.501426509658179, 0.116786275726379},
    {0.636502499121399, 0.310352451033785, 0.053145049844816, 0.082851075618374},
    {0.636502499121399, 0.053145049844816, 0.310352451033785, 0.082851075618374},
    {0.310352451033785, 0.636502499121399, 0.053145049844816, 0.082851075618374},
    {0.310352451033785, 0.053145049844816, 0.636502499121399, 0.082851075618374},
    {0.053145049844816, 0.636502499121399, 0.310352451033785, 0.082851075618374},
    {0.053145049844816, 0.310352451033785, 0.636502499121399, 0.082851075618374},
};

// Gauss-Legendre nodes/weights on [0,1].
const SegQuadPoint kGauss1[1] = {{0.5, 1.0}};
const SegQuadPoint kGauss2[2] = {
    {0.5 - 0.5 / 1.7320508075688772, 0.5},
    {0.5 + 0.5 / 1.7320508075688772, 0.5},
};
const SegQuadPoint kGauss3[3] = {
    {0.5 - 0.5 * 0.7745966692414834, 5.0 / 18.0},
    {0.5, 8.0 / 18.0},
    {0.5 + 0.5 * 0.7745966692414834, 5.0 / 18.0},
};
const SegQuadPoint kGauss4[4] = {
    {0.5 - 0.5 * 0.8611363115940526, 0.5 * 0.3478548451374538},
    {0.5 - 0.5 * 0.3399810435848563, 0.5 * 0.6521451548625461},
    {0.5 + 0.5 * 0.3399810435848563, 0.5 * 0.6521451548625461},
    {0.5 + 0.5 * 0.8611363115940526, 0.5 * 0.3478548451374538},
};
const SegQuadPoint kGauss5[5] = {
    {0.5 - 0.5 * 0.9061798459386640, 0.5 * 0.2369268850561891},
    {0.5 - 0.5 * 0.5384693101056831, 0.5 * 0.4786286704993665},
    {0.5, 0.5 * 0.5688888888888889},
    {0.5 + 0.5 * 0.5384693101056831, 0.5 * 0.4786286704993665},
    {0.5 + 0.5 * 0.9061798459386640, 0.5 * 0.2369268850561891},
};

}  // namespace

const TriQuad& tri_quad_deg2() {
  static const TriQuad q{kDeg2, 3};
  return q;
}

const TriQuad& tri_quad_deg4() {
  static const TriQuad q{kDeg4, 6};
  return q;
}

const TriQuad& tri_quad_deg6() {
  static const TriQuad q{kDeg6, 12};
  return q;
}

SegQuad seg_gauss(int npoints) {
  switch (npoints) {
    case 1: return {kGauss1, 1};
    case 2: return {kGauss2, 2};
    case 3: return {kGauss3, 3};
    case 4: return {kGauss4, 4};
    case 5: return {kGauss5, 5};
    default: throw DomainError("seg_gauss: unsupported point count");
  }
}

}  // namespace chb
