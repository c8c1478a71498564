#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "revfield/classification.hpp"
#include "revfield/error.hpp"

namespace revfield {

namespace {

struct Leg {
  std::vector<cplx> z;
  std::vector<cplx> t;
  bool resolved = false;
  bool periodic = false;
  int sink = -1;
};

bool is_sink(PointKind kind, Direction dir) {
  return (dir == Direction::Forward && kind == PointKind::Attracting) ||
         (dir == Direction::Backward && kind == PointKind::Repelling);
}

Leg integrate_leg(const FlowContext& ctx, cplx start, Direction dir, bool detect_period) {
  Leg leg;
  leg.z.push_back(start);
  leg.t.push_back(0.0);
  FlowStepper stepper(ctx, dir, {start, 0.0});
  const cplx p0 = ctx.field()(start);
  const cplx u = direction_multiplier(dir) * p0 / std::abs(p0);
  const double close = 1e-3 * ctx.r_inf();
  bool left = false;
  double sigma_prev = 0.0;
  for (int n = 0; n < ctx.tolerances().max_steps; ++n) {
    const cplx prev = stepper.current().z;
    const FlowPoint& p = stepper.advance();
    leg.z.push_back(p.z);
    leg.t.push_back(p.t);
    if (detect_period) {
      // Return through the transversal line at the start, in the same sense.
      const double sigma = ((p.z - start) * std::conj(u)).real();
      if (std::abs(p.z - start) > close) left = true;
      if (left && sigma_prev < 0.0 && sigma >= 0.0) {
        const cplx cross = prev + (p.z - prev) * (-sigma_prev / (sigma - sigma_prev));
        if (std::abs(cross - start) < close) {
          leg.periodic = true;
          leg.resolved = true;
          return leg;
        }
      }
      sigma_prev = sigma;
    }
    double dist = 0.0;
    const int id = ctx.nearest_point(p.z, &dist);
    if (dist <= std::max(ctx.land_radius(), ctx.capture_radius(id, dir))) {
      leg.resolved = is_sink(ctx.points()[id].kind, dir);
      leg.sink = id;
      return leg;
    }
    if (std::abs(p.z) > 2.0 * ctx.r_inf() || stepper.arc() > ctx.max_arc()) return leg;
  }
  return leg;
}

struct Chunk {
  std::size_t begin, end;  // vertex range [begin, end]
  double xmin, xmax, ymin, ymax;
};

std::vector<Chunk> make_chunks(const std::vector<cplx>& poly, std::size_t width = 32) {
  std::vector<Chunk> chunks;
  for (std::size_t b = 0; b + 1 < poly.size(); b += width) {
    const std::size_t e = std::min(b + width, poly.size() - 1);
    Chunk c{b, e, poly[b].real(), poly[b].real(), poly[b].imag(), poly[b].imag()};
    for (std::size_t i = b; i <= e; ++i) {
      c.xmin = std::min(c.xmin, poly[i].real());
      c.xmax = std::max(c.xmax, poly[i].real());
      c.ymin = std::min(c.ymin, poly[i].imag());
      c.ymax = std::max(c.ymax, poly[i].imag());
    }
    chunks.push_back(c);
  }
  return chunks;
}

double cross2(cplx a, cplx b) { return a.real() * b.imag() - a.imag() * b.real(); }

// First intersection of segment [p, q] with the polyline; returns the
// parameter along [p, q] and the polyline segment index.
bool intersect(cplx p, cplx q, const std::vector<cplx>& poly, const std::vector<Chunk>& chunks, double& u_out,
               std::size_t& seg_out) {
  const double xmin = std::min(p.real(), q.real()), xmax = std::max(p.real(), q.real());
  const double ymin = std::min(p.imag(), q.imag()), ymax = std::max(p.imag(), q.imag());
  bool found = false;
  u_out = 2.0;
  const cplx r = q - p;
  for (const auto& c : chunks) {
    if (c.xmax < xmin || c.xmin > xmax || c.ymax < ymin || c.ymin > ymax) continue;
    for (std::size_t i = c.begin; i < c.end; ++i) {
      const cplx a = poly[i], s = poly[i + 1] - poly[i];
      const double denom = cross2(r, s);
      if (denom == 0.0) continue;
      const double u = cross2(a - p, s) / denom;
      const double v = cross2(a - p, r) / denom;
      if (u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0 && u < u_out) {
        u_out = u;
        seg_out = i;
        found = true;
      }
    }
  }
  return found;
}

void append_arc(std::vector<cplx>& path, cplx from, cplx to) {
  const double r = std::abs(from);
  const double a0 = std::arg(from), a1 = std::arg(to);
  constexpr int n = 64;
  for (int i = 1; i < n; ++i) path.push_back(std::polar(r, a0 + (a1 - a0) * i / n));
}

}  // namespace

int winding_number(const std::vector<cplx>& polygon, cplx p) {
  double total = 0.0;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0; i < n; ++i) total += std::arg((polygon[(i + 1) % n] - p) / (polygon[i] - p));
  return static_cast<int>(std::lround(total / (2.0 * std::numbers::pi)));
}

ProbeRecord probe_end(const FlowContext& ctx, int j, bool mirror) {
  const int k = ctx.field().k();
  ProbeRecord rec;
  rec.end = j;
  rec.mirror = mirror;
  rec.start = ctx.r_inf() * end_direction(k, j);
  if (j == 0 || j == k) rec.start = cplx(rec.start.real(), 0.0);
  if (mirror) rec.start = std::conj(rec.start);

  Leg fwd = integrate_leg(ctx, rec.start, Direction::Forward, true);
  if (fwd.periodic) {
    rec.periodic = true;
    rec.resolved = true;
    rec.polyline = std::move(fwd.z);
    rec.times = std::move(fwd.t);
    return rec;
  }
  rec.omega = fwd.sink;
  if (!fwd.resolved) return rec;
  Leg bwd = integrate_leg(ctx, rec.start, Direction::Backward, false);
  rec.alpha = bwd.sink;
  rec.resolved = bwd.resolved;
  rec.polyline.assign(bwd.z.rbegin(), bwd.z.rend());
  rec.times.assign(bwd.t.rbegin(), bwd.t.rend());
  rec.start_index = rec.polyline.size() - 1;
  rec.polyline.insert(rec.polyline.end(), fwd.z.begin() + 1, fwd.z.end());
  rec.times.insert(rec.times.end(), fwd.t.begin() + 1, fwd.t.end());
  return rec;
}

ProbeRecord probe_end(const PolyVF& vf, int j, const Tolerances& tol) {
  FlowContext ctx(vf, tol);
  if (j < 0 || j > vf.k()) fail(ErrorCode::Validation, "probe_end: end index out of range");
  return probe_end(ctx, j);
}

namespace {

// Sub-path of a probe polyline between vertex a and vertex b, both inclusive
// of a and exclusive of b.
void append_range(std::vector<cplx>& path, const std::vector<cplx>& poly, std::size_t a, std::size_t b) {
  if (a <= b)
    for (std::size_t i = a; i < b; ++i) path.push_back(poly[i]);
  else
    for (std::size_t i = a; i > b; --i) path.push_back(poly[i]);
}

TransversalResult finish(const FlowContext& ctx, const ProbeRecord& from, const ProbeRecord& to, cplx inner,
                         std::vector<cplx> path, int shifted_point, int shift) {
  TransversalResult res;
  res.value = ctx.chart().time_from_infinity(from.start) + inner - ctx.chart().time_from_infinity(to.start);
  append_arc(path, to.start, from.start);
  res.path = std::move(path);
  res.winding.resize(ctx.points().size());
  for (std::size_t p = 0; p < ctx.points().size(); ++p) {
    res.winding[p] = winding_number(res.path, ctx.points()[p].location);
    if (static_cast<int>(p) == shifted_point) res.winding[p] -= shift;
    res.residue_value += double(res.winding[p]) * ctx.points()[p].period;
  }
  return res;
}

// One crossing of an alpha-omega strip gains less imaginary time than a full
// turn around either of its end points.
double strip_bound(const FlowContext& ctx, const ProbeRecord& rec) {
  return std::min(std::abs(ctx.points()[rec.alpha].period.imag()), std::abs(ctx.points()[rec.omega].period.imag()));
}

// Joins the two probes on a small arc around their common alpha (at_omega
// false) or omega. The arc fixes the time only up to a multiple of the point
// period; the multiple is the one placing the imaginary gain inside one
// strip crossing, with the sign given by orth.
TransversalResult closure_time(const FlowContext& ctx, const ProbeRecord& from, const ProbeRecord& to,
                               Direction orth, bool at_omega) {
  const PolyVF& vf = ctx.field();
  const int id = at_omega ? from.omega : from.alpha;
  const cplx center = ctx.points()[id].location;
  const std::size_t ia = at_omega ? from.polyline.size() - 1 : 0;
  const std::size_t ib = at_omega ? to.polyline.size() - 1 : 0;
  const cplx qa = from.polyline[ia], qb = to.polyline[ib];

  std::vector<cplx> path;
  append_range(path, from.polyline, from.start_index, ia);
  const double r = std::abs(qa - center);
  const double a0 = std::arg(qa - center);
  double turn = std::arg((qb - center) / (qa - center));
  constexpr int n = 64;
  cplx joint = 0.0;
  cplx prev = qa;
  path.push_back(qa);
  for (int i = 1; i <= n; ++i) {
    const cplx next = center + std::polar(r, a0 + turn * i / n);
    joint += chord_time(vf, prev, next);
    path.push_back(next);
    prev = next;
  }
  joint += chord_time(vf, prev, qb);
  append_range(path, to.polyline, ib, to.start_index);
  path.push_back(to.polyline[to.start_index]);

  cplx inner = (from.times[ia] - from.times[from.start_index]) + joint + (to.times[to.start_index] - to.times[ib]);
  const cplx nu = ctx.points()[id].period;
  const double step = std::abs(nu.imag());
  const double sign = nu.imag() > 0 ? 1.0 : -1.0;
  const double gain = orth == Direction::OrthogonalUp ? inner.imag() : -inner.imag();
  const int shift = static_cast<int>(std::floor(gain / step)) * (orth == Direction::OrthogonalUp ? 1 : -1) *
                    static_cast<int>(sign);
  inner -= double(shift) * nu;
  return finish(ctx, from, to, inner, std::move(path), id, shift);
}

}  // namespace

TransversalResult transversal_time(const FlowContext& ctx, const ProbeRecord& from, const ProbeRecord& to,
                                   Direction orth) {
  if (!from.resolved || !to.resolved || from.periodic || to.periodic)
    fail(ErrorCode::Domain, "transversal_time: both ends must lie in a resolved alpha-omega zone");
  if (from.alpha != to.alpha || from.omega != to.omega)
    fail(ErrorCode::Domain, "transversal_time: ends do not bound a common alpha-omega zone");
  const auto chunks = make_chunks(to.polyline);
  const PolyVF& vf = ctx.field();
  const double bound = strip_bound(ctx, from);

  std::vector<std::size_t> candidates{from.start_index};
  const std::size_t n = from.polyline.size();
  for (double f : {0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875}) {
    const auto idx = static_cast<std::size_t>(std::lround(f * double(n - 1)));
    if (std::find(candidates.begin(), candidates.end(), idx) == candidates.end()) candidates.push_back(idx);
  }

  for (std::size_t idx : candidates) {
    const cplx q = from.polyline[idx];
    const cplx t_q = from.times[idx] - from.times[from.start_index];
    FlowStepper stepper(ctx, orth, {q, 0.0});
    std::vector<cplx> orth_path{q};
    for (int step = 0; step < ctx.tolerances().max_steps; ++step) {
      const FlowPoint prev = stepper.current();
      const FlowPoint& next = stepper.advance();
      double u = 0.0;
      std::size_t seg = 0;
      if (intersect(prev.z, next.z, to.polyline, chunks, u, seg)) {
        const cplx c = prev.z + u * (next.z - prev.z);
        const cplx t_c = prev.t + chord_time(vf, prev.z, c);
        const std::size_t vi = std::abs(c - to.polyline[seg]) <= std::abs(c - to.polyline[seg + 1]) ? seg : seg + 1;
        const cplx t_v = chord_time(vf, c, to.polyline[vi]);
        const cplx inner = t_q + t_c + t_v + (to.times[to.start_index] - to.times[vi]);
        // A path that left the zone across a separatrix, or wound around a
        // focus and came back, is off by a period: leave it to the next
        // candidate or the closure.
        const double gain = orth == Direction::OrthogonalUp ? inner.imag() : -inner.imag();
        if (!(gain > 0.0 && gain < bound)) break;

        // Closed path: along from, orthogonal leg, along to, arc at infinity.
        std::vector<cplx> path;
        append_range(path, from.polyline, from.start_index, idx);
        path.insert(path.end(), orth_path.begin(), orth_path.end());
        path.push_back(c);
        if (vi <= to.start_index)
          for (std::size_t i = vi; i <= to.start_index; ++i) path.push_back(to.polyline[i]);
        else
          for (std::size_t i = vi + 1; i-- > to.start_index;) path.push_back(to.polyline[i]);
        return finish(ctx, from, to, inner, std::move(path), -1, 0);
      }
      orth_path.push_back(next.z);
      double dist = 0.0;
      ctx.nearest_point(next.z, &dist);
      if (dist < 10.0 * ctx.land_radius() || std::abs(next.z) > 2.0 * ctx.r_inf() || stepper.arc() > ctx.max_arc() ||
          std::abs(next.t.imag()) >= bound)
        break;
    }
  }
  // The truncated target does not reach the transversal; close near the sink
  // going up and near the source going down, so the two directions stay
  // independent paths.
  return closure_time(ctx, from, to, orth, orth == Direction::OrthogonalUp);
}

cplx transversal_time(const PolyVF& vf, int end_a, int end_b, bool mirror, const Tolerances& tol) {
  FlowContext ctx(vf, tol);
  const int k = vf.k();
  if (end_a < 0 || end_a > k || end_b < 0 || end_b > k || (end_a - end_b) % 2 == 0)
    fail(ErrorCode::Validation, "transversal_time: ends must be in range and of opposite parity");
  const int even = end_a % 2 == 0 ? end_a : end_b;
  const int odd = end_a % 2 == 0 ? end_b : end_a;
  const auto pe = probe_end(ctx, even, mirror);
  const auto po = probe_end(ctx, odd, mirror);
  if (!pe.resolved || !po.resolved || pe.alpha != po.alpha || pe.omega != po.omega)
    fail(ErrorCode::Domain, "transversal_time: ends do not bound a common alpha-omega zone");
  return transversal_time(ctx, pe, po, Direction::OrthogonalUp).value;
}

// Roots to the right of a symmetric loop: winding of loop + mirror + arc
// through angle 0 at the start radius.
std::vector<int> loop_enclosure(const FlowContext& ctx, const SeparatrixTrace& loop) {
  std::vector<cplx> path(loop.polyline);
  for (std::size_t i = loop.polyline.size() - 1; i-- > 0;) path.push_back(std::conj(loop.polyline[i]));
  const cplx top = loop.polyline.front();
  const double r = std::abs(top), theta = std::arg(top);
  constexpr int n = 96;
  for (int i = 1; i < n; ++i) path.push_back(std::polar(r, -theta + 2.0 * theta * i / n));
  std::vector<int> inside(ctx.points().size());
  for (std::size_t p = 0; p < inside.size(); ++p) inside[p] = winding_number(path, ctx.points()[p].location);
  return inside;
}

double homoclinic_period(const FlowContext& ctx, const SeparatrixTrace& loop) {
  if (loop.outcome != TraceOutcome::SymmetricHomoclinic)
    fail(ErrorCode::Domain, "homoclinic_period: trace is not a symmetric homoclinic loop");
  const cplx half = loop.time_from_infinity + loop.times.back();
  const double kappa = 2.0 * std::abs(half.real());
  const auto inside = loop_enclosure(ctx, loop);
  cplx sum = 0.0;
  for (std::size_t p = 0; p < inside.size(); ++p) sum += double(inside[p]) * ctx.points()[p].period;
  const double gap = std::abs(kappa - std::abs(sum.real())) / std::abs(sum.real());
  if (!(gap <= ctx.tolerances().residue_check)) {
    std::ostringstream os;
    os << "homoclinic period of s_" << loop.index << ": quadrature " << kappa << " vs residue sum " << std::abs(sum.real());
    fail(ErrorCode::Numeric, os.str());
  }
  return kappa;
}

}  // namespace revfield
