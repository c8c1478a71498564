#include <doctest.h>

#include <cmath>
#include <numbers>

#include "generators.hpp"
#include "revfield/error.hpp"
#include "revfield/flow.hpp"

using namespace revfield;
using std::numbers::pi;

namespace {

const cplx kI(0.0, 1.0);

// z^3 - z: 1/P = -1/z + (1/2)/(z-1) + (1/2)/(z+1), so the integral of dw/P
// from infinity is log(1 - 1/z^2) / 2 for |z| > 1 off the cuts.
cplx cubic_from_infinity(cplx z) { return 0.5 * std::log(1.0 - 1.0 / (z * z)); }

cplx cubic_chord(cplx a, cplx b) {
  auto f = [](cplx z) { return -std::log(z) + 0.5 * std::log(z - 1.0) + 0.5 * std::log(z + 1.0); };
  return (f(b) - f(a)) / kI;
}

}  // namespace

TEST_CASE("direction multipliers integrate iP forward and -P orthogonally up") {
  CHECK(direction_multiplier(Direction::Forward) == kI);
  CHECK(direction_multiplier(Direction::Backward) == -kI);
  CHECK(direction_multiplier(Direction::OrthogonalUp) == cplx(-1.0));
  CHECK(direction_multiplier(Direction::OrthogonalDown) == cplx(1.0));
}

TEST_CASE("separatrix directions are the invariant rays of i z^{k+1}") {
  for (int k = 1; k <= 7; ++k)
    for (int j = -k; j <= k; ++j) {
      if (j == 0) continue;
      const cplx u = separatrix_direction(k, j);
      // i u^k must be real: the monomial field is radial along u.
      const cplx radial = kI * std::pow(u, k);
      CHECK(std::abs(radial.imag()) < 1e-12);
      // Negative radial speed means the ray is travelled inward, i.e. it
      // leaves infinity in forward time.
      CHECK(separatrix_is_repelling(j) == (radial.real() < 0));
      CHECK(std::abs(separatrix_direction(k, -j) - std::conj(u)) < 1e-15);
    }
  CHECK_THROWS_AS(separatrix_direction(2, 0), Error);
  CHECK_THROWS_AS(separatrix_direction(2, 3), Error);
  CHECK(std::abs(end_direction(2, 1) - kI) < 1e-15);
  CHECK_THROWS_AS(end_direction(2, 3), Error);
}

TEST_CASE("infinity chart matches the closed form for z^3 - z") {
  const PolyVF vf(2, {0.0, -1.0});
  const InfinityChart chart(vf);
  for (cplx z : {cplx(3.0, 0.5), cplx(-2.0, 2.0), cplx(0.2, -1.6), cplx(10.0, 10.0)})
    CHECK(std::abs(chart.integral_from_infinity(z) - cubic_from_infinity(z)) < 1e-13);
}

TEST_CASE("chord_time matches partial fractions of 1/(z^3 - z)") {
  const PolyVF vf(2, {0.0, -1.0});
  const cplx pairs[][2] = {{cplx(0.5, 0.5), cplx(2.0, 1.0)}, {cplx(-0.3, 0.1), cplx(-2.5, 0.4)}, {cplx(3, 3), cplx(0.1, 2)}};
  for (const auto& p : pairs) CHECK(std::abs(chord_time(vf, p[0], p[1]) - cubic_chord(p[0], p[1])) < 1e-12);
}

TEST_CASE("property: chart differences equal chord times outside the root disk") {
  gen::Rng rng(23);
  for (int n = 0; n < 60; ++n) {
    const int k = gen::uniform_int(rng, 2, 6);
    const PolyVF vf = gen::field(rng, k);
    const InfinityChart chart(vf);
    const double r = 4.0;  // roots lie in |z| < 2.2
    const cplx a = std::polar(r, gen::uniform(rng, 0.1, pi - 0.1));
    const cplx b = std::polar(r * 1.5, gen::uniform(rng, 0.1, pi - 0.1));
    const cplx diff = chart.time_from_infinity(b) - chart.time_from_infinity(a);
    // The chord may cut into the disk, so walk around it on the circle.
    cplx path = 0.0;
    const int steps = 64;
    const double ta = std::arg(a), tb = std::arg(b);
    cplx prev = a;
    for (int i = 1; i <= steps; ++i) {
      const cplx next = std::polar(r, ta + (tb - ta) * i / steps);
      path += chord_time(vf, prev, next);
      prev = next;
    }
    path += chord_time(vf, prev, b);
    CHECK(std::abs(diff - path) <= 1e-10 * (1.0 + std::abs(diff)));
  }
}

TEST_CASE("stepper accumulates real time forward and imaginary time orthogonally") {
  const PolyVF vf(2, {1.0, 1.0});
  const FlowContext ctx(vf, {});
  for (Direction d : {Direction::Forward, Direction::OrthogonalUp}) {
    FlowStepper st(ctx, d, {cplx(0.3, 0.8), 0.0});
    cplx summed = 0.0;
    for (int i = 0; i < 200; ++i) {
      const cplx before = st.current().z;
      st.advance();
      summed += chord_time(vf, before, st.current().z);
    }
    const cplx t = st.current().t;
    CHECK(std::abs(t - summed) < 1e-8 * (1.0 + std::abs(t)));
    if (d == Direction::Forward) {
      CHECK(std::abs(t.imag()) < 1e-8 * std::abs(t));
      CHECK(t.real() > 0);
    } else {
      CHECK(std::abs(t.real()) < 1e-8 * std::abs(t));
      CHECK(t.imag() > 0);
    }
  }
}

TEST_CASE("z^3 - z: s_1 closes a symmetric loop crossing the positive axis") {
  const PolyVF vf(2, {0.0, -1.0});
  const auto s1 = trace_separatrix(vf, 1);
  CHECK(s1.outcome == TraceOutcome::SymmetricHomoclinic);
  CHECK(s1.crossing > 0.0);
  const auto s2 = trace_separatrix(vf, 2);
  CHECK(s2.outcome == TraceOutcome::SymmetricHomoclinic);
  CHECK(s2.crossing < 0.0);
  // Time from infinity to the crossing is real and finite.
  const cplx total = s1.time_from_infinity + s1.times.back();
  CHECK(std::abs(total.imag()) < 1e-8 * std::abs(total));
  // Approach the cut from above: the trace stays in the upper half plane.
  const cplx exact = cubic_from_infinity(cplx(s1.crossing, 1e-300)) / kI;
  CHECK(std::abs(total - exact) < 1e-6 * std::abs(exact));
}

TEST_CASE("z^3 + z + 1: s_1 lands at the upper complex root") {
  const PolyVF vf(2, {1.0, 1.0});
  const FlowContext ctx(vf, {});
  const auto s1 = trace_separatrix(ctx, 1);
  REQUIRE(s1.outcome == TraceOutcome::Lands);
  const auto& p = ctx.points()[s1.landing_point];
  CHECK(p.location.imag() > 0);
  CHECK(p.kind == PointKind::Attracting);
  CHECK(std::abs(s1.polyline.back() - p.location) < ctx.capture_radius(s1.landing_point, Direction::Forward) + 1e-12);
}

TEST_CASE("property: conjugate separatrices mirror each other") {
  gen::Rng rng(29);
  for (int n = 0; n < 25; ++n) {
    const int k = gen::uniform_int(rng, 2, 4);
    const PolyVF vf = gen::field(rng, k);
    const FlowContext ctx(vf, {});
    for (int j = 1; j <= k; ++j) {
      const auto up = trace_separatrix(ctx, j);
      const auto down = trace_separatrix(ctx, -j);
      CHECK(up.outcome == down.outcome);
      CHECK(reversibility_residual(up, down) <= 1e-8 * ctx.scale());
    }
  }
}

TEST_CASE("reversibility residual detects an injected 1e-3 offset") {
  const PolyVF vf(2, {1.0, 1.0});
  const auto up = trace_separatrix(vf, 1);
  auto down = trace_separatrix(vf, -1);
  CHECK(reversibility_residual(up, down) < 1e-8);
  for (auto& z : down.polyline) z += cplx(0.0, 1e-3);
  const double r = reversibility_residual(up, down);
  CHECK(r > 0.5e-3);
  CHECK(r < 1.5e-3);
}

TEST_CASE("property: traces are covariant under z -> r z") {
  gen::Rng rng(31);
  for (int n = 0; n < 15; ++n) {
    const int k = gen::uniform_int(rng, 2, 4);
    const PolyVF vf = gen::field(rng, k);
    const double r = std::exp(gen::uniform(rng, -1.0, 1.0));
    const PolyVF big = normalize_scale(vf, r);
    for (int j = 1; j <= k; ++j) {
      const auto a = trace_separatrix(vf, j);
      const auto b = trace_separatrix(big, j);
      CHECK(a.outcome == b.outcome);
      if (a.outcome == TraceOutcome::SymmetricHomoclinic) CHECK(std::abs(b.crossing - r * a.crossing) < 1e-7 * r);
      if (a.outcome == TraceOutcome::Lands) {
        const auto pa = singular_points(vf)[a.landing_point].location;
        const auto pb = singular_points(big)[b.landing_point].location;
        CHECK(std::abs(pb - r * pa) < 1e-9 * r);
      }
      if (a.outcome == TraceOutcome::Escapes) CHECK(a.escape_index == b.escape_index);
    }
  }
}
