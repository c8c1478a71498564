#include "revfield/flow.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "revfield/error.hpp"

namespace revfield {

namespace {

constexpr cplx kI(0.0, 1.0);

double segment_distance(cplx p, cplx a, cplx b) {
  const cplx d = b - a;
  const double len2 = std::norm(d);
  if (len2 == 0.0) return std::abs(p - a);
  const double u = std::clamp(((p - a) * std::conj(d)).real() / len2, 0.0, 1.0);
  return std::abs(p - (a + u * d));
}

double directed_distance(const std::vector<cplx>& from, const std::vector<cplx>& to) {
  double worst = 0.0;
  for (cplx p : from) {
    double best = std::numeric_limits<double>::infinity();
    if (to.size() == 1) best = std::abs(p - to[0]);
    for (std::size_t i = 0; i + 1 < to.size(); ++i) best = std::min(best, segment_distance(p, to[i], to[i + 1]));
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------------------

InfinityChart::InfinityChart(const PolyVF& vf, int terms) : k_(vf.k()) {
  // P(z) = z^{k+1} (1 + sum_{m=2}^{k+1} q_m z^{-m}) with q_m = eps_{k+1-m}.
  const auto& eps = vf.eps();
  auto q = [&](int m) -> double { return (m >= 2 && m <= k_ + 1) ? eps[k_ + 1 - m] : 0.0; };
  b_.reserve(terms);
  b_.push_back(1.0);
  for (int n = 1; n < terms; ++n) {
    double acc = 0.0;
    for (int m = 2; m <= std::min(n, k_ + 1); ++m) acc -= q(m) * b_[n - m];
    if (!std::isfinite(acc)) break;
    b_.push_back(acc);
  }
}

cplx InfinityChart::integral_from_infinity(cplx z) const {
  const cplx w = 1.0 / z;
  cplx power = std::pow(w, k_);
  cplx sum = 0.0;
  // Sparse coefficients (e.g. only even n) need a run of small terms to stop.
  int quiet = 0;
  for (std::size_t n = 0; n < b_.size(); ++n) {
    const cplx term = b_[n] * power / double(k_ + static_cast<int>(n));
    sum += term;
    quiet = std::abs(term) <= 1e-18 * std::abs(sum) ? quiet + 1 : 0;
    if (quiet > k_ + 1) break;
    power *= w;
  }
  return -sum;
}

// ---------------------------------------------------------------------------

cplx direction_multiplier(Direction d) noexcept {
  switch (d) {
    case Direction::Forward: return kI;
    case Direction::Backward: return -kI;
    case Direction::OrthogonalUp: return -1.0;
    case Direction::OrthogonalDown: return 1.0;
  }
  return kI;
}

cplx separatrix_direction(int k, int index) {
  if (index == 0 || std::abs(index) > k) fail(ErrorCode::Validation, "separatrix index out of range");
  const int sgn = index > 0 ? 1 : -1;
  return std::polar(1.0, std::numbers::pi * (2.0 * index - sgn) / (2.0 * k));
}

cplx end_direction(int k, int j) {
  if (std::abs(j) > k) fail(ErrorCode::Validation, "end index out of range");
  return std::polar(1.0, std::numbers::pi * j / k);
}

bool separatrix_is_repelling(int index) noexcept {
  const bool odd = (std::abs(index) % 2) == 1;
  return index > 0 ? odd : !odd;
}

// ---------------------------------------------------------------------------

FlowContext::FlowContext(const PolyVF& vf, const Tolerances& tol)
    : vf_(vf), tol_(tol), points_(singular_points(vf, tol)), chart_(vf) {
  double max_mod = 0.0;
  for (const auto& p : points_) {
    max_mod = std::max(max_mod, std::abs(p.location));
    if (p.multiplicity > 1) simple_ = false;
  }
  scale_ = max_mod > 0.0 ? max_mod : 1.0;
  separation_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      separation_ = std::min(separation_, std::abs(points_[i].location - points_[j].location));
  if (!std::isfinite(separation_) || separation_ == 0.0) separation_ = scale_ * tol.multiple_root_sep;
  r_inf_ = tol.r_inf_factor * (scale_ + max_mod);
  land_radius_ = tol.land_factor * separation_;
  max_arc_ = tol.max_arc_factor * r_inf_;
  time_unit_ = std::pow(scale_, -vf.k());

  const std::size_t n = points_.size();
  capture_forward_.assign(n, 0.0);
  capture_backward_.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = points_[i];
    if (p.multiplicity > 1) continue;
    if (p.kind != PointKind::Attracting && p.kind != PointKind::Repelling) continue;
    // |P(p+w)| = |P'(p) w| |1+E| with |E| <= exp(rho sum 1/d_q) - 1; the
    // disk of radius rho is invariant once |lambda| |E| < |Re lambda|.
    double inv_dist = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) inv_dist += p.multiplicity / std::abs(points_[j].location - p.location);
    const double ratio = std::abs(p.eigenvalue.real()) / std::abs(p.eigenvalue);
    const double rho = inv_dist > 0.0 ? std::log1p(0.5 * ratio) / inv_dist : scale_;
    const double radius = std::max(land_radius_, rho);
    (p.kind == PointKind::Attracting ? capture_forward_ : capture_backward_)[i] = radius;
  }
}

int FlowContext::nearest_point(cplx z, double* dist) const {
  int best = -1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const double d = std::abs(z - points_[i].location);
    if (d < best_dist) {
      best_dist = d;
      best = static_cast<int>(i);
    }
  }
  if (dist) *dist = best_dist;
  return best;
}

double FlowContext::capture_radius(int id, Direction d) const {
  if (d == Direction::Forward) return capture_forward_[id];
  if (d == Direction::Backward) return capture_backward_[id];
  return 0.0;
}

// ---------------------------------------------------------------------------

FlowStepper::FlowStepper(const FlowContext& ctx, Direction dir, FlowPoint start)
    : ctx_(ctx), m_(direction_multiplier(dir)), cur_(start) {
  double dist = 0.0;
  ctx_.nearest_point(cur_.z, &dist);
  h_ = 1e-3 * std::min(dist, std::abs(cur_.z) + ctx_.scale());
}

void FlowStepper::rhs(cplx z, cplx& dz, cplx& dt) const {
  const cplx p = ctx_.field()(z);
  const double a = std::abs(p);
  dz = m_ * p / a;
  dt = -kI * m_ / a;
}

FlowPoint FlowStepper::rk_step(const FlowPoint& p, double h, double* err) const {
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                          e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

  cplx kz[7], kt[7];
  const cplx z = p.z;
  rhs(z, kz[0], kt[0]);
  rhs(z + h * (a21 * kz[0]), kz[1], kt[1]);
  rhs(z + h * (a31 * kz[0] + a32 * kz[1]), kz[2], kt[2]);
  rhs(z + h * (a41 * kz[0] + a42 * kz[1] + a43 * kz[2]), kz[3], kt[3]);
  rhs(z + h * (a51 * kz[0] + a52 * kz[1] + a53 * kz[2] + a54 * kz[3]), kz[4], kt[4]);
  rhs(z + h * (a61 * kz[0] + a62 * kz[1] + a63 * kz[2] + a64 * kz[3] + a65 * kz[4]), kz[5], kt[5]);
  const cplx dz = h * (b1 * kz[0] + b3 * kz[2] + b4 * kz[3] + b5 * kz[4] + b6 * kz[5]);
  const cplx dt = h * (b1 * kt[0] + b3 * kt[2] + b4 * kt[3] + b5 * kt[4] + b6 * kt[5]);
  FlowPoint out{z + dz, p.t + dt};
  if (err) {
    rhs(out.z, kz[6], kt[6]);
    const cplx ez = h * (e1 * kz[0] + e3 * kz[2] + e4 * kz[3] + e5 * kz[4] + e6 * kz[5] + e7 * kz[6]);
    const cplx et = h * (e1 * kt[0] + e3 * kt[2] + e4 * kt[3] + e5 * kt[4] + e6 * kt[5] + e7 * kt[6]);
    const double rtol = ctx_.tolerances().rtol;
    const double sz = rtol * (ctx_.separation() + std::abs(out.z));
    const double st = rtol * (std::abs(dt) + 1e-2 * ctx_.time_unit());
    const double e = std::max(std::abs(ez) / sz, std::abs(et) / st);
    *err = std::isfinite(e) ? e : std::numeric_limits<double>::infinity();
  }
  return out;
}

FlowPoint FlowStepper::trial(double h) const { return rk_step(cur_, h, nullptr); }

// Travel time along a chord no longer than half the distance to the nearest
// singular point, where a fixed Gauss-Legendre rule converges geometrically.
cplx FlowStepper::step_time(cplx a, cplx b) const {
  using rule = boost::math::quadrature::gauss<double, 10>;
  const cplx mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  cplx sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    sum += x[i] == 0.0 ? w[i] / ctx_.field()(mid)
                       : w[i] * (1.0 / ctx_.field()(mid + x[i] * half) + 1.0 / ctx_.field()(mid - x[i] * half));
  return half * sum / kI;
}

// The time of a step depends only on its end points, so it is recomputed by
// quadrature instead of accumulating the integrator's error.
void FlowStepper::accept(const FlowPoint& p, double h) {
  cur_ = {p.z, cur_.t + step_time(cur_.z, p.z)};
  arc_ += h;
  last_h_ = h;
}

const FlowPoint& FlowStepper::advance() {
  double dist = 0.0;
  ctx_.nearest_point(cur_.z, &dist);
  const double h_max = 0.5 * dist;
  const double floor = 1e-14 * (std::abs(cur_.z) + ctx_.scale());
  for (int attempt = 0; attempt < 200; ++attempt) {
    double h = std::min(h_, h_max);
    if (h < floor) break;
    double err = 0.0;
    const FlowPoint next = rk_step(cur_, h, &err);
    if (err <= 1.0) {
      accept(next, h);
      const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
      h_ = h * std::clamp(grow, 0.2, 5.0);
      ++steps_;
      return cur_;
    }
    h_ = h * std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.9);
  }
  std::ostringstream os;
  os.precision(17);
  os << "step-size collapse at z = " << cur_.z << " (nearest singular point at distance " << dist << ")";
  fail(ErrorCode::Numeric, os.str());
}

// ---------------------------------------------------------------------------

const char* to_string(TraceOutcome o) noexcept {
  switch (o) {
    case TraceOutcome::Lands: return "lands";
    case TraceOutcome::SymmetricHomoclinic: return "symmetric-homoclinic";
    case TraceOutcome::Escapes: return "escapes";
    case TraceOutcome::Unresolved: return "unresolved";
  }
  return "unknown";
}

cplx separatrix_start(const FlowContext& ctx, int index, double r) {
  const int k = ctx.field().k();
  const double theta0 = std::arg(separatrix_direction(k, index));
  double theta = theta0;
  // On the separatrix the time from infinity is real.
  for (int iter = 0; iter < 50; ++iter) {
    const cplx z = std::polar(r, theta);
    const double g = ctx.chart().time_from_infinity(z).imag();
    const double dg = (z / ctx.field()(z)).imag();
    const double step = g / dg;
    theta -= step;
    if (std::abs(step) < 1e-16) break;
  }
  if (!(std::abs(theta - theta0) < std::numbers::pi / (4.0 * k)))
    fail(ErrorCode::Numeric, "separatrix start: angular solve drifted from the asymptotic direction");
  return std::polar(r, theta);
}

SeparatrixTrace trace_separatrix(const FlowContext& ctx, int index) {
  const int k = ctx.field().k();
  SeparatrixTrace tr;
  tr.index = index;
  tr.asymptotic_direction = separatrix_direction(k, index);
  const cplx z0 = separatrix_start(ctx, index, ctx.r_inf());
  tr.time_from_infinity = ctx.chart().time_from_infinity(z0);
  tr.polyline.push_back(z0);
  tr.times.push_back(0.0);

  const Direction dir = separatrix_is_repelling(index) ? Direction::Forward : Direction::Backward;
  FlowStepper stepper(ctx, dir, {z0, 0.0});
  const double axis_tol = ctx.tolerances().axis_tol * ctx.scale();
  const int max_steps = ctx.tolerances().max_steps;

  for (int n = 0; n < max_steps; ++n) {
    const FlowPoint prev = stepper.current();
    const FlowPoint& next = stepper.advance();

    if (std::signbit(next.z.imag()) != std::signbit(prev.z.imag()) || std::abs(next.z.imag()) <= axis_tol) {
      // Secant refinement of the step length onto the real axis.
      double h_lo = 0.0, h_hi = stepper.last_step();
      double y_lo = prev.z.imag(), y_hi = next.z.imag();
      FlowPoint hit = next;
      for (int it = 0; it < 60 && std::abs(hit.z.imag()) > axis_tol; ++it) {
        double h = h_lo - y_lo * (h_hi - h_lo) / (y_hi - y_lo);
        if (!(h > h_lo && h < h_hi)) h = 0.5 * (h_lo + h_hi);
        FlowStepper probe(ctx, dir, prev);
        hit = probe.trial(h);
        if (std::signbit(hit.z.imag()) == std::signbit(y_lo)) {
          h_lo = h;
          y_lo = hit.z.imag();
        } else {
          h_hi = h;
          y_hi = hit.z.imag();
        }
      }
      // The loop meets the axis at a right angle, so a residual offset from
      // the axis lies along the flow and would shift the real time; the
      // projection only moves across the flow.
      FlowStepper last(ctx, dir, prev);
      last.accept({cplx(hit.z.real(), 0.0), hit.t}, h_hi);
      hit = last.current();
      tr.polyline.push_back(hit.z);
      tr.times.push_back(hit.t);
      tr.outcome = TraceOutcome::SymmetricHomoclinic;
      tr.crossing = hit.z.real();
      tr.arc_length = stepper.arc();
      return tr;
    }

    tr.polyline.push_back(next.z);
    tr.times.push_back(next.t);
    double dist = 0.0;
    const int id = ctx.nearest_point(next.z, &dist);
    if (dist <= std::max(ctx.land_radius(), ctx.capture_radius(id, dir))) {
      tr.outcome = TraceOutcome::Lands;
      tr.landing_point = id;
      tr.arc_length = stepper.arc();
      return tr;
    }
    if (std::abs(next.z) > 2.0 * ctx.r_inf()) {
      tr.outcome = TraceOutcome::Escapes;
      double best = std::numeric_limits<double>::infinity();
      const cplx u = next.z / std::abs(next.z);
      for (int j = -k; j <= k; ++j) {
        if (j == 0) continue;
        const double d = std::abs(u - separatrix_direction(k, j));
        if (d < best) {
          best = d;
          tr.escape_index = j;
        }
      }
      tr.arc_length = stepper.arc();
      return tr;
    }
    if (stepper.arc() > ctx.max_arc()) break;
  }
  tr.outcome = TraceOutcome::Unresolved;
  tr.arc_length = stepper.arc();
  return tr;
}

SeparatrixTrace trace_separatrix(const PolyVF& vf, int index, const Tolerances& tol) {
  FlowContext ctx(vf, tol);
  return trace_separatrix(ctx, index);
}

double reversibility_residual(const SeparatrixTrace& a, const SeparatrixTrace& b) {
  std::vector<cplx> mirrored(a.polyline.size());
  std::transform(a.polyline.begin(), a.polyline.end(), mirrored.begin(), [](cplx z) { return std::conj(z); });
  if (mirrored.empty() || b.polyline.empty()) return std::numeric_limits<double>::infinity();
  return std::max(directed_distance(mirrored, b.polyline), directed_distance(b.polyline, mirrored));
}

cplx chord_time(const PolyVF& vf, cplx a, cplx b) {
  using boost::math::quadrature::gauss_kronrod;
  const cplx d = b - a;
  auto f = [&](double u) { return d / (kI * vf(a + u * d)); };
  const double re = gauss_kronrod<double, 31>::integrate([&](double u) { return f(u).real(); }, 0.0, 1.0, 12, 1e-14);
  const double im = gauss_kronrod<double, 31>::integrate([&](double u) { return f(u).imag(); }, 0.0, 1.0, 12, 1e-14);
  return {re, im};
}

}  // namespace revfield
