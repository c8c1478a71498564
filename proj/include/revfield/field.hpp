#pragma once

#include <complex>
#include <span>
#include <vector>

#include "revfield/config.hpp"

namespace revfield {

using cplx = std::complex<double>;

/// The reversible field iP(z) d/dz with
/// P(z) = z^{k+1} + eps[k-1] z^{k-1} + ... + eps[1] z + eps[0].
/// Immutable value type; k >= 2.
class PolyVF {
 public:
  PolyVF(int k, std::vector<double> eps);

  int k() const noexcept { return k_; }
  int degree() const noexcept { return k_ + 1; }
  const std::vector<double>& eps() const noexcept { return eps_; }
  /// Ascending coefficients of P, length k+2.
  const std::vector<double>& coefficients() const noexcept { return coeffs_; }

  cplx operator()(cplx z) const noexcept;
  cplx derivative(cplx z) const noexcept;
  cplx second_derivative(cplx z) const noexcept;
  /// P(z) and P'(z) in one Horner pass.
  void evaluate(cplx z, cplx& p, cplx& dp) const noexcept;

  /// Monic polynomial with the given roots, recentered so they sum to zero.
  /// The root multiset must be closed under conjugation.
  static PolyVF from_roots(std::span<const cplx> roots);

  bool operator==(const PolyVF&) const = default;

 private:
  int k_;
  std::vector<double> eps_;
  std::vector<double> coeffs_;
};

enum class PointKind { RealCenter, Attracting, Repelling, Parabolic, ComplexCenterCandidate };

const char* to_string(PointKind kind) noexcept;

struct SingularPoint {
  cplx location;
  int multiplicity = 1;
  cplx eigenvalue;  // i P'(location)
  PointKind kind = PointKind::RealCenter;
  cplx period;      // 2 pi / P'(location); zero for multiple points
};

/// All roots with multiplicity, conjugate-paired exactly, sorted by
/// (real part, imaginary part). Multiple roots appear once with multiplicity.
std::vector<SingularPoint> singular_points(const PolyVF& vf, const Tolerances& tol = {});

/// Raw refined roots (k+1 of them, conjugation-closed), without clustering.
std::vector<cplx> polynomial_roots(const PolyVF& vf);

/// Contour integral of dz/(iP) around a simple point: 2 pi / P'(z).
cplx period(const PolyVF& vf, const SingularPoint& p);

/// Field whose roots are r times the roots of vf (eps_j -> eps_j r^{k+1-j}).
PolyVF normalize_scale(const PolyVF& vf, double r);

/// Scales so that max|root| = 1. Writes the applied ratio when requested.
PolyVF canonical_normalization(const PolyVF& vf, double* ratio = nullptr);

/// Scale-invariant summary of how close the roots are to colliding or to
/// carrying a purely imaginary eigenvalue.
struct RootGeometry {
  double max_modulus = 0.0;
  double min_separation = 0.0;
  double max_abs_derivative = 0.0;
  double min_abs_re_eig = 0.0;   // over non-real simple points; +inf if none
};

RootGeometry root_geometry(const PolyVF& vf, const std::vector<SingularPoint>& points);

}  // namespace revfield
