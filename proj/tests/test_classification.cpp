#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "generators.hpp"
#include "revfield/classification.hpp"
#include "revfield/error.hpp"
#include "revfield/flow.hpp"

using namespace revfield;
using std::numbers::pi;

namespace {

std::string udf(const Involution& tau) { return involution_to_dyck(tau).str(); }

std::vector<cplx> locations(const Classification& c) {
  std::vector<cplx> out;
  for (const auto& p : c.points) out.push_back(p.location);
  return out;
}

double slot_distance(const AnalyticInvariant& a, const AnalyticInvariant& b, double scale) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.kappas.size(); ++i) d = std::max(d, std::abs(a.kappas[i] - scale * b.kappas[i]));
  for (std::size_t i = 0; i < a.widths.size(); ++i) d = std::max(d, std::abs(a.widths[i] - scale * b.widths[i]));
  for (std::size_t i = 0; i < a.times.size(); ++i) d = std::max(d, std::abs(a.times[i] - scale * b.times[i]));
  return d;
}

double slot_norm(const AnalyticInvariant& a) {
  double n = 0.0;
  for (double x : a.kappas) n = std::max(n, std::abs(x));
  for (double x : a.widths) n = std::max(n, std::abs(x));
  for (cplx x : a.times) n = std::max(n, std::abs(x));
  return n;
}

}  // namespace

TEST_CASE("winding numbers of simple polygons") {
  const std::vector<cplx> square{{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
  CHECK(winding_number(square, 0.0) == 1);
  CHECK(winding_number(square, cplx(2, 0)) == 0);
  const std::vector<cplx> reversed(square.rbegin(), square.rend());
  CHECK(winding_number(reversed, 0.0) == -1);
}

TEST_CASE("z^3 - z is in FFF with kappa = (pi, pi)") {
  const PolyVF vf(2, {0.0, -1.0});
  const auto c = classify(vf);
  REQUIRE(c.generic);
  CHECK(udf(c.tau) == "FFF");
  REQUIRE(c.eta.kappas.size() == 2);
  CHECK(c.eta.widths.empty());
  CHECK(c.eta.times.empty());
  for (double kappa : c.eta.kappas) CHECK(std::abs(kappa - pi) < 1e-8);
  CHECK(extract_tau(vf) == c.tau);
}

TEST_CASE("z^3 - z: the e_1 probe circles the middle center with period kappa_1 + kappa_2") {
  const PolyVF vf(2, {0.0, -1.0});
  const FlowContext ctx(vf, {});
  const auto probe = probe_end(ctx, 1);
  REQUIRE(probe.periodic);
  const auto c = classify(vf);
  // Close the forward leg with a chord back to the start.
  const cplx full = probe.times.back() + chord_time(vf, probe.polyline.back(), probe.start);
  CHECK(std::abs(full.imag()) < 1e-8);
  CHECK(std::abs(std::abs(full.real()) - (c.eta.kappas[0] + c.eta.kappas[1])) < 1e-8);
  // Residue oracle: the orbit encloses only z = 0, where 2 pi / P'(0) = -2 pi.
  CHECK(std::abs(std::abs(full.real()) - 2.0 * pi) < 1e-8);
}

TEST_CASE("z^3 - z: homoclinic loops enclose one outer center each") {
  const PolyVF vf(2, {0.0, -1.0});
  const FlowContext ctx(vf, {});
  const auto s1 = trace_separatrix(ctx, 1);
  REQUIRE(s1.outcome == TraceOutcome::SymmetricHomoclinic);
  CHECK(loop_enclosure(ctx, s1) == std::vector<int>{0, 0, 1});
  CHECK(std::abs(std::abs(homoclinic_period(ctx, s1)) - pi) < 1e-8);
}

TEST_CASE("z^3 + z +- delta fall in the two non-identity strata") {
  std::set<std::string> labels;
  for (double delta : {0.2, -0.2}) {
    const auto c = classify(PolyVF(2, {delta, 1.0}));
    REQUIRE(c.generic);
    labels.insert(udf(c.tau));
    const auto sig = signature(c.tau);
    CHECK(c.eta.kappas.size() == static_cast<std::size_t>(sig.a));
    CHECK(c.eta.widths.size() == static_cast<std::size_t>(sig.b));
    CHECK(c.eta.times.size() == static_cast<std::size_t>(sig.c));
  }
  CHECK(labels == std::set<std::string>{"FUD", "UDF"});
}

TEST_CASE("non-generic fields are labelled, not classified") {
  const auto cusp = classify(PolyVF(2, {0.0, 0.0}));
  CHECK_FALSE(cusp.generic);
  CHECK(cusp.bifurcation == "parabolic-real");
  CHECK_FALSE(cusp.reason.empty());

  const auto ray = classify(PolyVF(2, {0.0, 1.0}));
  CHECK_FALSE(ray.generic);
  CHECK(ray.bifurcation == "homoclinic-asymmetric-pair");

  // Double complex pair: parabolic points off the axis.
  const auto pair = classify(PolyVF(3, {1.0, 0.0, 2.0}));
  CHECK_FALSE(pair.generic);
  CHECK(pair.bifurcation == "parabolic-complex-pair");
}

TEST_CASE("extract_eta rejects a tau that does not match the field") {
  const PolyVF vf(2, {0.0, -1.0});
  CHECK_THROWS_AS(extract_eta(vf, involution_from_string("UDF")), Error);
}

TEST_CASE("property: slot counts, verification residuals and the residue model") {
  gen::Rng rng(41);
  for (int n = 0; n < 40; ++n) {
    const int k = gen::uniform_int(rng, 2, 5);
    const auto [vf, c] = gen::generic_field(rng, k, 1e-3);
    REQUIRE(c.generic);
    const auto sig = signature(c.tau);
    CHECK(c.eta.kappas.size() == static_cast<std::size_t>(sig.a));
    CHECK(c.eta.widths.size() == static_cast<std::size_t>(sig.b));
    CHECK(c.eta.times.size() == static_cast<std::size_t>(sig.c));
    for (double x : c.eta.kappas) CHECK(x > 0);
    for (double x : c.eta.widths) CHECK(x > 0);
    for (cplx x : c.eta.times) CHECK(x.imag() > 0);
    CHECK(c.max_path_discrepancy <= 1e-8);
    CHECK(c.max_mirror_discrepancy <= 1e-8);
    CHECK(c.max_residue_discrepancy <= 1e-8);
    const auto model = c.model.evaluate(vf, locations(c));
    CHECK(slot_distance(model, c.eta, 1.0) <= 1e-8 * slot_norm(c.eta));
    CHECK(c.probes.size() == static_cast<std::size_t>(k + 1));
    CHECK(c.traces.size() == static_cast<std::size_t>(2 * k));
  }
}

TEST_CASE("property: tau is scale invariant and eta scales by r^{-k}") {
  gen::Rng rng(43);
  for (int n = 0; n < 25; ++n) {
    const int k = gen::uniform_int(rng, 2, 4);
    const auto [vf, c] = gen::generic_field(rng, k, 1e-2);
    REQUIRE(c.generic);
    const double r = std::exp(gen::uniform(rng, -0.8, 0.8));
    const auto big = classify(normalize_scale(vf, r));
    REQUIRE(big.generic);
    CHECK(big.tau == c.tau);
    CHECK(slot_distance(big.eta, c.eta, std::pow(r, -k)) <= 1e-8 * slot_norm(big.eta));
  }
}

TEST_CASE("property: conjugate points keep the stratum of a field") {
  // Reflecting z -> -conj(z) maps iP to a field of the same shape with
  // eps_j -> (-1)^{k+1-j} eps_j; tau reverses to its mirror.
  gen::Rng rng(47);
  for (int n = 0; n < 25; ++n) {
    const int k = gen::uniform_int(rng, 2, 4);
    const auto [vf, c] = gen::generic_field(rng, k, 1e-2);
    REQUIRE(c.generic);
    std::vector<double> eps = vf.eps();
    for (int j = 0; j < k; ++j)
      if ((k + 1 - j) % 2 == 1) eps[j] = -eps[j];
    const auto m = classify(PolyVF(k, eps));
    REQUIRE(m.generic);
    Involution mirrored{k, std::vector<int>(k + 1)};
    for (int j = 0; j <= k; ++j) mirrored.map[j] = k - c.tau.map[k - j];
    CHECK(m.tau == mirrored);
  }
}

TEST_CASE("tau-only classification skips eta but keeps the label") {
  ClassifyOptions opts;
  opts.compute_eta = false;
  const auto c = classify(PolyVF(2, {0.2, 1.0}), {}, opts);
  REQUIRE(c.generic);
  CHECK(c.eta.size() == 0);
  CHECK(c.tau == classify(PolyVF(2, {0.2, 1.0})).tau);
}

namespace {

// Time along the ray from hub to infinity in direction u, by double-exponential
// quadrature of each component.
cplx ray_time(const PolyVF& vf, cplx hub, cplx u) {
  boost::math::quadrature::exp_sinh<double> quad;
  auto part = [&](bool imag) {
    return quad.integrate([&](double r) {
      const cplx v = u / (cplx(0.0, 1.0) * vf(hub + r * u));
      return imag ? v.imag() : v.real();
    }, 1e-12);
  };
  return {part(false), part(true)};
}

// Smallest |diff - sum n_p 2 pi / P'(p)| over integer n_p in [-3, 3].
double lattice_distance(cplx diff, const std::vector<cplx>& periods, std::size_t i = 0) {
  if (i == periods.size()) return std::abs(diff);
  double best = INFINITY;
  for (int n = -3; n <= 3; ++n) best = std::min(best, lattice_distance(diff - double(n) * periods[i], periods, i + 1));
  return best;
}

}  // namespace

TEST_CASE("property: transversal times agree with ray quadrature up to residue periods") {
  gen::Rng rng(49);
  int zones = 0;
  for (int n = 0; n < 12; ++n) {
    const int k = gen::uniform_int(rng, 3, 4);
    const auto [vf, c] = gen::generic_field(rng, k, 1e-2);
    REQUIRE(c.generic);
    std::vector<cplx> periods;
    for (const auto& p : c.points) periods.push_back(period(vf, p));
    for (int a = 0; a <= k; ++a) {
      const int b = c.tau.map[a];
      if (b <= a || (a + b) % 2 == 0) continue;
      cplx value;
      try {
        value = transversal_time(vf, a, b);
      } catch (const Error&) {
        continue;  // not an alpha-omega zone
      }
      const int even = a % 2 == 0 ? a : b, odd = a % 2 == 0 ? b : a;
      // In from infinity along the even end, out along the odd end, through a
      // hub above every root so that no ray passes near one.
      const cplx hub(0.0, 1.0 + 2.0 * c.geometry.max_modulus);
      const cplx oracle = ray_time(vf, hub, end_direction(k, odd)) - ray_time(vf, hub, end_direction(k, even));
      CHECK(lattice_distance(value - oracle, periods) <= 1e-6 * (1.0 + std::abs(value)));
      ++zones;
    }
  }
  CHECK(zones > 5);
}
