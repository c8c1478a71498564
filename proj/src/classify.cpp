#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <sstream>
#include <tuple>

#include "revfield/classification.hpp"
#include "revfield/error.hpp"

namespace revfield {

namespace {

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }
double relative_gap(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Integral of dx/|P(x)| over [a, b] (either end may be infinite).
double real_axis_time(const FlowContext& ctx, double a, double b) {
  using boost::math::quadrature::gauss_kronrod;
  const PolyVF& vf = ctx.field();
  const double r = ctx.r_inf();
  const int k = vf.k();
  double total = 0.0;
  if (std::isinf(b)) {
    total += -ctx.chart().integral_from_infinity(r).real();
    b = r;
  }
  if (std::isinf(a)) {
    total += ((k + 1) % 2 == 0 ? 1.0 : -1.0) * ctx.chart().integral_from_infinity(-r).real();
    a = -r;
  }
  auto f = [&](double x) { return 1.0 / std::abs(vf(cplx(x, 0.0)).real()); };
  total += gauss_kronrod<double, 31>::integrate(f, a, b, 20, 1e-14);
  return total;
}

int signed_unit(double x) { return x >= 0.0 ? 1 : -1; }

double max_period(const std::vector<SingularPoint>& pts) {
  double m = 0.0;
  for (const auto& p : pts) m = std::max(m, std::abs(p.period));
  return m;
}

void compute_eta(const FlowContext& ctx, Classification& out, const ClassifyOptions& opts) {
  const auto& pts = ctx.points();
  const double tol = ctx.tolerances().residue_check;
  auto check = [&](double gap, const std::string& what) {
    out.max_residue_discrepancy = std::max(out.max_residue_discrepancy, gap);
    if (gap > tol) {
      std::ostringstream os;
      os << what << ": quadrature and residue sum disagree (relative " << gap << ")";
      fail(ErrorCode::Numeric, os.str());
    }
  };

  // Homoclinic loops ordered by crossing abscissa.
  std::vector<const SeparatrixTrace*> loops;
  for (int j = 0; j < out.k; ++j)
    if (out.traces[j].outcome == TraceOutcome::SymmetricHomoclinic) loops.push_back(&out.traces[j]);
  std::sort(loops.begin(), loops.end(), [](auto* a, auto* b) { return a->crossing < b->crossing; });

  std::vector<std::vector<int>> right_sets;
  for (const auto* loop : loops) {
    const auto inside = loop_enclosure(ctx, *loop);
    cplx sum = 0.0;
    for (std::size_t p = 0; p < pts.size(); ++p) sum += double(inside[p]) * pts[p].period;
    const double kappa = homoclinic_period(ctx, *loop);
    check(relative_gap(kappa, std::abs(sum.real())), "homoclinic period of s_" + std::to_string(loop->index));
    out.eta.kappas.push_back(kappa);
    out.model.kappas.push_back({SlotPart::Real, inside, signed_unit(sum.real())});
    right_sets.push_back(inside);
  }

  // Root-free real segments between consecutive loop crossings.
  const std::size_t h = loops.size();
  for (std::size_t r = 0; r <= h; ++r) {
    const double a = r == 0 ? -std::numeric_limits<double>::infinity() : loops[r - 1]->crossing;
    const double b = r == h ? std::numeric_limits<double>::infinity() : loops[r]->crossing;
    bool has_real = false;
    for (const auto& p : pts)
      if (p.location.imag() == 0.0 && p.location.real() > a && p.location.real() < b) has_real = true;
    if (has_real) continue;
    std::vector<int> coeffs(pts.size(), 0);
    cplx sum = 0.0;
    for (std::size_t p = 0; p < pts.size(); ++p) {
      if (pts[p].location.imag() <= 0.0) continue;
      const int left_in = r == 0 ? 1 : right_sets[r - 1][p];
      const int right_in = r == h ? 0 : right_sets[r][p];
      coeffs[p] = left_in - right_in;
      sum += double(coeffs[p]) * pts[p].period;
    }
    const double width = real_axis_time(ctx, a, b);
    check(relative_gap(width, std::abs(sum.imag())), "vertical width of region " + std::to_string(r));
    out.eta.widths.push_back(width);
    out.model.widths.push_back({SlotPart::Imag, coeffs, signed_unit(sum.imag())});
  }

  // Upper alpha-omega zones: inner pairs of the even blocks.
  const auto sig = signature(out.tau);
  std::vector<std::pair<int, int>> zones;
  for (const auto& block : sig.blocks) {
    if (block.size() == 1) continue;
    for (int j : block) {
      const int tj = out.tau.map[j];
      if (tj > j && !(j == block.front() && tj == block.back())) zones.emplace_back(j, tj);
    }
  }
  std::sort(zones.begin(), zones.end());
  std::map<int, ProbeRecord> mirror_probes;
  auto mirror_probe = [&](int j) -> const ProbeRecord& {
    auto it = mirror_probes.find(j);
    if (it == mirror_probes.end()) it = mirror_probes.emplace(j, probe_end(ctx, j, true)).first;
    return it->second;
  };
  for (auto [lo, hi] : zones) {
    const int even = lo % 2 == 0 ? lo : hi;
    const int odd = lo % 2 == 0 ? hi : lo;
    const auto res = transversal_time(ctx, out.probes[even], out.probes[odd], Direction::OrthogonalUp);
    const std::string name = "transversal time of zone (" + std::to_string(lo) + "," + std::to_string(hi) + ")";
    check(relative_gap(res.value, res.residue_value), name);
    if (!(res.value.imag() > 0.0)) fail(ErrorCode::Consistency, name + " is not in the upper half plane");
    if (opts.verify) {
      const auto back = transversal_time(ctx, out.probes[odd], out.probes[even], Direction::OrthogonalDown);
      out.max_path_discrepancy = std::max(out.max_path_discrepancy, relative_gap(-back.value, res.value));
      const auto& me = mirror_probe(even);
      const auto& mo = mirror_probe(odd);
      if (!me.resolved || !mo.resolved) fail(ErrorCode::Numeric, "mirror probe unresolved for " + name);
      const auto low = transversal_time(ctx, me, mo, Direction::OrthogonalUp);
      out.max_mirror_discrepancy =
          std::max(out.max_mirror_discrepancy, relative_gap(low.value, -std::conj(res.value)));
    }
    out.eta.times.push_back(res.value);
    out.model.times.push_back({SlotPart::Complex, res.winding, 1});
  }

  if (out.eta.kappas.size() != static_cast<std::size_t>(sig.a) ||
      out.eta.widths.size() != static_cast<std::size_t>(sig.b) ||
      out.eta.times.size() != static_cast<std::size_t>(sig.c))
    fail(ErrorCode::Consistency, "analytic invariant slot counts do not match the signature of tau");
}

std::string join_types(const std::vector<std::string>& types) {
  if (types.size() == 1) return types.front();
  return "compound";
}

}  // namespace

AnalyticInvariant PeriodModel::evaluate(const PolyVF& vf, const std::vector<cplx>& locations) const {
  std::vector<cplx> nu(locations.size());
  for (std::size_t p = 0; p < locations.size(); ++p) nu[p] = 2.0 * std::numbers::pi / vf.derivative(locations[p]);
  auto sum = [&](const SlotModel& s) {
    cplx acc = 0.0;
    for (std::size_t p = 0; p < nu.size(); ++p) acc += double(s.coeffs[p]) * nu[p];
    return acc;
  };
  AnalyticInvariant eta;
  for (const auto& s : kappas) eta.kappas.push_back(s.sign * sum(s).real());
  for (const auto& s : widths) eta.widths.push_back(s.sign * sum(s).imag());
  for (const auto& s : times) eta.times.push_back(sum(s));
  return eta;
}

Involution extract_tau(const FlowContext& ctx, const std::vector<ProbeRecord>& probes,
                       const std::vector<SeparatrixTrace>& upper_traces) {
  const int k = ctx.field().k();
  std::vector<int> homoclinic;
  for (const auto& tr : upper_traces)
    if (tr.index > 0 && tr.outcome == TraceOutcome::SymmetricHomoclinic) homoclinic.push_back(tr.index);
  std::sort(homoclinic.begin(), homoclinic.end());

  Involution tau{k, std::vector<int>(static_cast<std::size_t>(k) + 1, -1)};
  std::map<std::tuple<int, int, int>, std::vector<int>> zones;
  for (const auto& pr : probes) {
    if (!pr.resolved) fail(ErrorCode::NearBifurcation, "probe of end " + std::to_string(pr.end) + " unresolved");
    if (pr.periodic) {
      tau.map[pr.end] = pr.end;
      continue;
    }
    // Loop s_a separates the ends below index a from those at or above it.
    const int region = static_cast<int>(std::count_if(homoclinic.begin(), homoclinic.end(),
                                                      [&](int a) { return a <= pr.end; }));
    zones[{region, pr.alpha, pr.omega}].push_back(pr.end);
  }
  for (const auto& [key, ends] : zones) {
    if (ends.size() != 2) {
      std::ostringstream os;
      os << "zone (region " << std::get<0>(key) << ", alpha " << std::get<1>(key) << ", omega " << std::get<2>(key)
         << ") has " << ends.size() << " ends";
      fail(ErrorCode::Consistency, os.str());
    }
    tau.map[ends[0]] = ends[1];
    tau.map[ends[1]] = ends[0];
  }
  if (!is_valid_involution(tau)) fail(ErrorCode::Consistency, "probe pairing is not a valid involution");
  if (attachment(tau).homoclinic_indices != homoclinic)
    fail(ErrorCode::Consistency, "homoclinic loops disagree with the block structure of the pairing");
  const auto real_points = std::count_if(ctx.points().begin(), ctx.points().end(),
                                         [](const SingularPoint& p) { return p.location.imag() == 0.0; });
  if (signature(tau).m != real_points)
    fail(ErrorCode::Consistency, "fixed ends disagree with the number of real singular points");
  return tau;
}

Involution extract_tau(const PolyVF& vf, const Tolerances& tol) {
  ClassifyOptions opts;
  opts.compute_eta = false;
  opts.keep_geometry = false;
  const auto c = classify(vf, tol, opts);
  if (!c.generic) fail(ErrorCode::NearBifurcation, "extract_tau: field is not generic (" + c.reason + ")");
  return c.tau;
}

AnalyticInvariant extract_eta(const PolyVF& vf, const Involution& tau, const Tolerances& tol) {
  ClassifyOptions opts;
  opts.keep_geometry = false;
  opts.verify = false;
  const auto c = classify(vf, tol, opts);
  if (!c.generic) fail(ErrorCode::NearBifurcation, "extract_eta: field is not generic (" + c.reason + ")");
  if (c.tau != tau) fail(ErrorCode::Consistency, "extract_eta: tau does not match the field");
  return c.eta;
}

Classification classify(const PolyVF& vf, const Tolerances& tol, const ClassifyOptions& opts) {
  Classification out;
  out.k = vf.k();
  out.eps = vf.eps();
  FlowContext ctx(vf, tol);
  out.points = ctx.points();
  out.geometry = root_geometry(vf, out.points);

  const double scale = std::max(out.geometry.max_modulus, 1e-300);
  double margin = std::min(1.0, out.geometry.min_separation / scale);
  if (std::isfinite(out.geometry.min_abs_re_eig) && out.geometry.max_abs_derivative > 0.0)
    margin = std::min(margin, out.geometry.min_abs_re_eig / out.geometry.max_abs_derivative);
  out.margin = margin;

  std::vector<std::string> types;
  std::ostringstream why;
  for (const auto& p : out.points) {
    if (p.multiplicity > 1) {
      const bool real = p.location.imag() == 0.0;
      types.push_back(real ? "parabolic-real" : "parabolic-complex-pair");
      why << "multiple point of order " << p.multiplicity << " at " << p.location << "; ";
    } else if (p.kind == PointKind::ComplexCenterCandidate && p.location.imag() > 0.0) {
      types.push_back("homoclinic-asymmetric-pair");
      why << "complex point " << p.location << " has purely imaginary eigenvalue (centers surrounded by homoclinic loops); ";
    }
  }
  std::sort(types.begin(), types.end());
  types.erase(std::unique(types.begin(), types.end()), types.end());
  if (!types.empty()) {
    out.bifurcation = join_types(types);
    out.reason = why.str();
    out.reason.resize(out.reason.size() - 2);
    out.margin = 0.0;
    return out;
  }

  auto with_context = [](const std::string& where, auto&& fn) {
    try {
      return fn();
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Numeric) throw;
      throw Error(ErrorCode::Numeric, where + ": " + e.what());
    }
  };

  for (int j = 1; j <= out.k; ++j)
    out.traces.push_back(with_context("separatrix s_" + std::to_string(j), [&] { return trace_separatrix(ctx, j); }));
  for (int j = 1; j <= out.k; ++j) {
    const auto& up = out.traces[j - 1];
    if (up.outcome == TraceOutcome::Escapes) {
      out.bifurcation = "homoclinic-asymmetric-pair";
      out.reason = "separatrix s_" + std::to_string(j) + " returns to infinity along s_" +
                   std::to_string(up.escape_index);
    } else if (up.outcome == TraceOutcome::Unresolved) {
      out.bifurcation = "compound";
      out.reason = "separatrix s_" + std::to_string(j) + " unresolved within the arc-length budget";
    }
    if (!out.bifurcation.empty()) {
      out.margin = 0.0;
      return out;
    }
  }
  for (int j = 1; j <= out.k; ++j) {
    SeparatrixTrace m = out.traces[j - 1];
    m.index = -j;
    m.asymptotic_direction = std::conj(m.asymptotic_direction);
    m.time_from_infinity = -std::conj(m.time_from_infinity);
    for (auto& z : m.polyline) z = std::conj(z);
    for (auto& t : m.times) t = -std::conj(t);
    out.traces.push_back(std::move(m));
  }

  for (int j = 0; j <= out.k; ++j)
    out.probes.push_back(with_context("probe of end e_" + std::to_string(j), [&] { return probe_end(ctx, j); }));
  for (const auto& pr : out.probes) {
    if (!pr.resolved) {
      out.bifurcation = "compound";
      out.reason = "probe of end e_" + std::to_string(pr.end) + " unresolved";
      out.margin = 0.0;
      return out;
    }
  }
  try {
    out.tau = extract_tau(ctx, out.probes, out.traces);
  } catch (const Error& e) {
    out.bifurcation = "compound";
    out.reason = e.what();
    out.margin = 0.0;
    return out;
  }
  out.generic = true;

  if (opts.compute_eta) {
    compute_eta(ctx, out, opts);
    const double unit = max_period(out.points);
    for (double kappa : out.eta.kappas) out.margin = std::min(out.margin, kappa / unit);
    for (double w : out.eta.widths) out.margin = std::min(out.margin, w / unit);
    for (cplx t : out.eta.times) out.margin = std::min(out.margin, t.imag() / unit);
  }
  if (!opts.keep_geometry) {
    for (auto& tr : out.traces) {
      tr.polyline = {tr.polyline.front(), tr.polyline.back()};
      tr.times = {tr.times.front(), tr.times.back()};
    }
    for (auto& pr : out.probes) {
      pr.polyline.clear();
      pr.times.clear();
    }
  }
  return out;
}

}  // namespace revfield
