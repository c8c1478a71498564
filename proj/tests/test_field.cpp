#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "revfield/error.hpp"
#include "revfield/field.hpp"

using namespace revfield;
using std::numbers::pi;

namespace {

// Trapezoid rule on a circle: spectrally accurate for the analytic integrand.
cplx contour_period(const PolyVF& vf, cplx center, double radius, int n = 4096) {
  cplx sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const cplx u = std::polar(1.0, 2.0 * pi * i / n);
    const cplx z = center + radius * u;
    const cplx dz = cplx(0.0, 1.0) * radius * u * (2.0 * pi / n);
    sum += dz / (cplx(0.0, 1.0) * vf(z));
  }
  return sum;
}

double min_gap(const std::vector<cplx>& pts) {
  double best = INFINITY;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, std::abs(pts[i] - pts[j]));
  return best;
}

std::vector<cplx> locations(const std::vector<SingularPoint>& pts) {
  std::vector<cplx> out;
  for (const auto& p : pts) out.push_back(p.location);
  return out;
}

}  // namespace

TEST_CASE("PolyVF rejects k < 2 and malformed coefficients") {
  CHECK_THROWS_AS(PolyVF(1, {0.0}), Error);
  try {
    PolyVF(1, {0.0});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Domain);
  }
  CHECK_THROWS_AS(PolyVF(2, {0.0}), Error);
  CHECK_THROWS_AS(PolyVF(2, {0.0, NAN}), Error);
}

TEST_CASE("coefficients are monic with no z^k term") {
  const PolyVF vf(3, {1.0, 2.0, 3.0});
  CHECK(vf.coefficients() == std::vector<double>{1.0, 2.0, 3.0, 0.0, 1.0});
  const cplx z(0.3, -0.7);
  CHECK(std::abs(vf(z) - (z * z * z * z + 3.0 * z * z + 2.0 * z + 1.0)) < 1e-14);
  CHECK(std::abs(vf.derivative(z) - (4.0 * z * z * z + 6.0 * z + 2.0)) < 1e-14);
  CHECK(std::abs(vf.second_derivative(z) - (12.0 * z * z + 6.0)) < 1e-14);
}

TEST_CASE("z^3 - z: three real centers with periods pi, -2pi, pi") {
  const PolyVF vf(2, {0.0, -1.0});
  const auto pts = singular_points(vf);
  REQUIRE(pts.size() == 3);
  const double expected[] = {-1.0, 0.0, 1.0};
  const double periods[] = {pi, -2.0 * pi, pi};
  for (int i = 0; i < 3; ++i) {
    CHECK(pts[i].location.real() == doctest::Approx(expected[i]).epsilon(1e-14));
    CHECK(pts[i].location.imag() == 0.0);
    CHECK(pts[i].kind == PointKind::RealCenter);
    CHECK(std::abs(period(vf, pts[i]) - periods[i]) < 1e-12);
    CHECK(std::abs(contour_period(vf, pts[i].location, 0.3) - periods[i]) < 1e-10);
  }
}

TEST_CASE("z^3 + z: the pair at +-i is a center candidate") {
  const PolyVF vf(2, {0.0, 1.0});
  const auto pts = singular_points(vf);
  REQUIRE(pts.size() == 3);
  int candidates = 0;
  for (const auto& p : pts) {
    if (p.location.imag() == 0.0) {
      CHECK(p.kind == PointKind::RealCenter);
    } else {
      CHECK(std::abs(std::abs(p.location.imag()) - 1.0) < 1e-14);
      CHECK(p.kind == PointKind::ComplexCenterCandidate);
      CHECK(std::abs(p.eigenvalue - cplx(0.0, -2.0)) < 1e-13);
      ++candidates;
    }
  }
  CHECK(candidates == 2);
  const auto upper = *std::find_if(pts.begin(), pts.end(), [](auto& p) { return p.location.imag() > 0; });
  CHECK(std::abs(period(vf, upper) - (-pi)) < 1e-12);
}

TEST_CASE("z^4 - 1: conjugate pairing is exact and the residues cancel") {
  const PolyVF vf(3, {-1.0, 0.0, 0.0});
  const auto pts = singular_points(vf);
  REQUIRE(pts.size() == 4);
  cplx sum = 0.0;
  for (const auto& p : pts) sum += 1.0 / vf.derivative(p.location);
  CHECK(std::abs(sum) < 1e-14);
  const auto raw = polynomial_roots(vf);
  for (cplx z : raw) {
    const bool has_conj = std::any_of(raw.begin(), raw.end(), [&](cplx w) { return w == std::conj(z); });
    CHECK(has_conj);
  }
}

TEST_CASE("complex kinds follow the sign of Re(iP')") {
  // z^3 + z + 1: one real root and a pair.
  const PolyVF vf(2, {1.0, 1.0});
  for (const auto& p : singular_points(vf)) {
    if (p.location.imag() == 0.0) continue;
    const double re = (cplx(0, 1) * vf.derivative(p.location)).real();
    CHECK(p.kind == (re < 0 ? PointKind::Attracting : PointKind::Repelling));
  }
}

TEST_CASE("multiple roots are flagged parabolic") {
  SUBCASE("triple root at 0") {
    const auto pts = singular_points(PolyVF(2, {0.0, 0.0}));
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].multiplicity == 3);
    CHECK(pts[0].kind == PointKind::Parabolic);
    CHECK(pts[0].period == cplx(0.0));
  }
  SUBCASE("double real root of (z-1)^2 (z+2)") {
    const std::vector<cplx> r{1.0, 1.0, -2.0};
    const auto pts = singular_points(PolyVF::from_roots(r));
    REQUIRE(pts.size() == 2);
    CHECK(std::count_if(pts.begin(), pts.end(), [](auto& p) { return p.multiplicity == 2; }) == 1);
  }
  SUBCASE("double complex pair (z^2 + 1)^2") {
    const auto pts = singular_points(PolyVF(3, {1.0, 0.0, 2.0}));
    REQUIRE(pts.size() == 2);
    for (const auto& p : pts) {
      CHECK(p.multiplicity == 2);
      CHECK(p.kind == PointKind::Parabolic);
    }
  }
  SUBCASE("nearby but separated roots stay simple") {
    const std::vector<cplx> r{0.5, 0.5 + 1e-4, -1.0 - 1e-4};
    const auto pts = singular_points(PolyVF::from_roots(r));
    CHECK(pts.size() == 3);
  }
  SUBCASE("period of a multiple point is a domain error") {
    const auto pts = singular_points(PolyVF(2, {0.0, 0.0}));
    try {
      period(PolyVF(2, {0.0, 0.0}), pts[0]);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::Domain);
    }
  }
}

TEST_CASE("property: residue identity on random fields") {
  gen::Rng rng(7);
  for (int k = 2; k <= 6; ++k)
    for (int n = 0; n < 200; ++n) {
      const PolyVF vf(k, gen::box_eps(rng, k));
      const auto pts = singular_points(vf);
      if (static_cast<int>(pts.size()) != k + 1 || min_gap(locations(pts)) < 1e-3) continue;
      cplx sum = 0.0;
      for (const auto& p : pts) sum += 1.0 / vf.derivative(p.location);
      CHECK(std::abs(sum) <= 1e-10);
    }
}

TEST_CASE("property: refined roots meet the residual bound and are conjugation-closed") {
  gen::Rng rng(11);
  for (int n = 0; n < 300; ++n) {
    const int k = gen::uniform_int(rng, 2, 8);
    const PolyVF vf(k, gen::box_eps(rng, k, 3.0));
    const auto roots = polynomial_roots(vf);
    REQUIRE(roots.size() == static_cast<std::size_t>(k + 1));
    for (cplx z : roots) {
      CHECK(std::abs(vf(z)) <= 1e-12 * std::pow(1.0 + std::abs(z), k + 1));
      CHECK(std::any_of(roots.begin(), roots.end(), [&](cplx w) { return w == std::conj(z); }));
    }
  }
}

TEST_CASE("property: periods agree with contour quadrature") {
  gen::Rng rng(13);
  for (int n = 0; n < 60; ++n) {
    const int k = gen::uniform_int(rng, 2, 5);
    const PolyVF vf = gen::field(rng, k);
    const auto pts = singular_points(vf);
    const double gap = min_gap(locations(pts));
    for (const auto& p : pts) {
      const cplx exact = period(vf, p);
      const cplx quad = contour_period(vf, p.location, 0.4 * gap);
      CHECK(std::abs(exact - quad) <= 1e-8 * std::abs(exact));
    }
  }
}

TEST_CASE("normalize_scale examples and roundtrip") {
  const PolyVF vf(2, {0.0, -1.0});
  CHECK(normalize_scale(vf, 1.0) == vf);
  const PolyVF big = normalize_scale(vf, 2.0);
  CHECK(big.eps()[0] == 0.0);
  CHECK(big.eps()[1] == doctest::Approx(-4.0));
  double ratio = 0.0;
  const PolyVF back = canonical_normalization(big, &ratio);
  CHECK(ratio == doctest::Approx(0.5));
  CHECK(back.eps()[1] == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK_THROWS_AS(normalize_scale(vf, 0.0), Error);
  CHECK_THROWS_AS(normalize_scale(vf, -1.0), Error);
}

TEST_CASE("property: scaling multiplies the roots and inverts exactly") {
  gen::Rng rng(17);
  for (int n = 0; n < 100; ++n) {
    const int k = gen::uniform_int(rng, 2, 6);
    const PolyVF vf = gen::field(rng, k);
    const double r = std::exp(gen::uniform(rng, -1.5, 1.5));
    const PolyVF scaled = normalize_scale(vf, r);
    const PolyVF back = normalize_scale(scaled, 1.0 / r);
    for (int j = 0; j < k; ++j)
      CHECK(std::abs(back.eps()[j] - vf.eps()[j]) <= 1e-12 * (1.0 + std::abs(vf.eps()[j])));
    const auto a = singular_points(vf), b = singular_points(scaled);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(b[i].location - r * a[i].location) < 1e-10 * r);
    const PolyVF canon = canonical_normalization(vf);
    CHECK(root_geometry(canon, singular_points(canon)).max_modulus == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("from_roots recenters and rejects non-real coefficients") {
  const std::vector<cplx> r{1.0, 2.0, 3.0};
  const PolyVF vf = PolyVF::from_roots(r);  // shifted by -2
  CHECK(vf.eps()[1] == doctest::Approx(-1.0));
  CHECK(std::abs(vf.eps()[0]) < 1e-14);
  const std::vector<cplx> bad{cplx(0, 1), 0.0, cplx(0, -2)};
  CHECK_THROWS_AS(PolyVF::from_roots(bad), Error);
}

TEST_CASE("root geometry summarizes separation and eigenvalue margins") {
  const PolyVF vf(2, {0.0, -1.0});
  const auto g = root_geometry(vf, singular_points(vf));
  CHECK(g.max_modulus == doctest::Approx(1.0));
  CHECK(g.min_separation == doctest::Approx(1.0));
  CHECK(g.max_abs_derivative == doctest::Approx(2.0));
  CHECK(std::isinf(g.min_abs_re_eig));
}
