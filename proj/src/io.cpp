#include "revfield/io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "revfield/error.hpp"

namespace revfield {

namespace {

json point_json(cplx z) { return json::array({z.real(), z.imag()}); }

json polyline_json(const std::vector<cplx>& pts) {
  json out = json::array();
  for (cplx z : pts) out.push_back(point_json(z));
  return out;
}

}  // namespace

json to_json(const Involution& tau) {
  return {{"k", tau.k}, {"map", tau.map}, {"udf", involution_to_dyck(tau).str()}};
}

json to_json(const StratumSignature& sig) {
  return {{"m", sig.m}, {"h", sig.h}, {"a", sig.a}, {"b", sig.b}, {"c", sig.c}, {"blocks", sig.blocks}};
}

json to_json(const PolyVF& vf) { return {{"k", vf.k()}, {"eps", vf.eps()}}; }

json to_json(const SeparatrixTrace& tr, bool geometry) {
  json j = {{"index", tr.index}, {"outcome", to_string(tr.outcome)}, {"arc_length", tr.arc_length}};
  if (tr.outcome == TraceOutcome::Lands) j["landing_point"] = tr.landing_point;
  if (tr.outcome == TraceOutcome::SymmetricHomoclinic) j["crossing"] = tr.crossing;
  if (tr.outcome == TraceOutcome::Escapes) j["escape_index"] = tr.escape_index;
  if (geometry) j["polyline"] = polyline_json(tr.polyline);
  return j;
}

json to_json(const AnalyticInvariant& eta) {
  json times = json::array();
  for (cplx t : eta.times) times.push_back(point_json(t));
  return {{"kappas", eta.kappas}, {"widths", eta.widths}, {"times", times}};
}

json to_json(const Classification& c, bool geometry) {
  json out;
  out["field"] = {{"k", c.k}, {"eps", c.eps}};
  out["generic"] = c.generic;
  if (c.generic) {
    out["tau"] = to_json(c.tau);
    out["signature"] = to_json(signature(c.tau));
    out["eta"] = to_json(c.eta);
  } else {
    out["tau"] = nullptr;
    out["eta"] = nullptr;
    out["bifurcation"] = c.bifurcation;
    out["reason"] = c.reason;
  }

  json diag;
  json points = json::array();
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto& p = c.points[i];
    points.push_back({{"id", i},
                      {"location", point_json(p.location)},
                      {"multiplicity", p.multiplicity},
                      {"kind", to_string(p.kind)},
                      {"eigenvalue", point_json(p.eigenvalue)},
                      {"period", point_json(p.period)}});
  }
  diag["points"] = points;
  json probes = json::array();
  for (const auto& pr : c.probes) {
    json p = {{"end", pr.end}, {"periodic", pr.periodic}, {"resolved", pr.resolved}};
    if (!pr.periodic && pr.resolved) {
      p["alpha"] = pr.alpha;
      p["omega"] = pr.omega;
    }
    if (geometry) p["polyline"] = polyline_json(pr.polyline);
    probes.push_back(p);
  }
  diag["probes"] = probes;
  json traces = json::array();
  for (const auto& tr : c.traces) traces.push_back(to_json(tr, geometry));
  diag["separatrices"] = traces;
  diag["margin"] = c.margin;
  diag["min_separation"] = c.geometry.min_separation;
  diag["max_modulus"] = c.geometry.max_modulus;
  diag["max_abs_derivative"] = c.geometry.max_abs_derivative;
  if (std::isfinite(c.geometry.min_abs_re_eig))
    diag["min_abs_re_eigenvalue"] = c.geometry.min_abs_re_eig;
  else
    diag["min_abs_re_eigenvalue"] = nullptr;
  diag["max_residue_discrepancy"] = c.max_residue_discrepancy;
  diag["max_path_discrepancy"] = c.max_path_discrepancy;
  diag["max_mirror_discrepancy"] = c.max_mirror_discrepancy;
  if (c.k == 2) {
    const auto loci = cubic_loci(c.eps[0], c.eps[1]);
    diag["loci"] = {{"delta3", loci.delta3}, {"on_homoclinic_ray", loci.on_homoclinic_ray}};
  } else if (c.k == 3) {
    const Eps3 e{c.eps[0], c.eps[1], c.eps[2]};
    const auto flags = quartic_intersections(e);
    diag["loci"] = {{"discriminant", quartic_discriminant(e)},
                    {"homoclinic_surface", quartic_homoclinic_surface(e)},
                    {"on_discriminant", flags.discriminant},
                    {"on_homoclinic_surface", flags.homoclinic_surface},
                    {"on_parabolic_homoclinic_curve", flags.parabolic_homoclinic},
                    {"on_triple_parabolic_curve", flags.triple_parabolic},
                    {"on_cusp_curve", flags.cusp_curve}};
  }
  out["diagnostics"] = diag;
  return out;
}

json to_json(const RealizeReport& r) {
  return {{"converged", r.converged},
          {"start_eps", r.start_eps},
          {"continuation_steps", r.continuation_steps},
          {"rejected_steps", r.rejected_steps},
          {"newton_iterations", r.newton_iterations},
          {"tau_checks", r.tau_checks},
          {"smallest_step", r.smallest_step},
          {"final_error", r.final_error},
          {"root_sum", r.root_sum},
          {"log", r.log}};
}

AnalyticInvariant invariant_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorCode::Validation, "eta must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (key != "kappas" && key != "widths" && key != "times")
      fail(ErrorCode::Validation, "unknown eta key '" + key + "'");
  AnalyticInvariant eta;
  try {
    if (j.contains("kappas")) eta.kappas = j.at("kappas").get<std::vector<double>>();
    if (j.contains("widths")) eta.widths = j.at("widths").get<std::vector<double>>();
    if (j.contains("times"))
      for (const auto& t : j.at("times")) {
        const auto v = t.get<std::vector<double>>();
        if (v.size() != 2) fail(ErrorCode::Validation, "each time must be a [re, im] pair");
        eta.times.emplace_back(v[0], v[1]);
      }
  } catch (const json::exception& e) {
    fail(ErrorCode::Validation, std::string("malformed eta: ") + e.what());
  }
  return eta;
}

json strata_json(int k, int max_k) {
  json out = json::array();
  for (const auto& tau : enumerate_strata(k, max_k))
    out.push_back({{"udf", involution_to_dyck(tau).str()}, {"map", tau.map}, {"signature", to_json(signature(tau))}});
  return out;
}

// ---- portrait ----------------------------------------------------------------

namespace {

constexpr double kView = 1.5;
constexpr double kClip = 3.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v == 0.0 ? 0.0 : v);  // no "-0.0000"
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

// SVG y grows downwards.
std::string xy(cplx z) { return fmt(z.real()) + "," + fmt(-z.imag()); }

bool inside(cplx z) { return std::abs(z.real()) <= kClip && std::abs(z.imag()) <= kClip; }

// Path data with a moveto at every re-entry into the clip box.
std::string path_data(const std::vector<cplx>& pts) {
  std::string d;
  bool pen = false;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const bool in = inside(pts[i]);
    const bool next_in = i + 1 < pts.size() && inside(pts[i + 1]);
    if (!in && !next_in && !pen) continue;
    if (!pen) {
      d += (d.empty() ? "M" : " M") + xy(pts[i]);
      pen = true;
    } else {
      d += " L" + xy(pts[i]);
    }
    if (!in && i > 0 && inside(pts[i - 1])) pen = false;
  }
  return d;
}

std::string marker(const SingularPoint& p, std::size_t id) {
  const std::string x = fmt(p.location.real()), y = fmt(-p.location.imag());
  const std::string data = " data-id=\"" + std::to_string(id) + "\"";
  switch (p.kind) {
    case PointKind::RealCenter:
      return "<circle class=\"point center\"" + data + " cx=\"" + x + "\" cy=\"" + y +
             "\" r=\"0.035\" fill=\"#ffffff\" stroke=\"#1f77b4\" stroke-width=\"0.012\"/>";
    case PointKind::Attracting:
      return "<circle class=\"point sink\"" + data + " cx=\"" + x + "\" cy=\"" + y + "\" r=\"0.035\" fill=\"#2ca02c\"/>";
    case PointKind::Repelling:
      return "<circle class=\"point source\"" + data + " cx=\"" + x + "\" cy=\"" + y +
             "\" r=\"0.035\" fill=\"#d62728\"/>";
    case PointKind::Parabolic:
      return "<rect class=\"point parabolic\"" + data + " x=\"" + fmt(p.location.real() - 0.035) + "\" y=\"" +
             fmt(-p.location.imag() - 0.035) + "\" width=\"0.07\" height=\"0.07\" fill=\"#9467bd\"/>";
    case PointKind::ComplexCenterCandidate:
      return "<path class=\"point complex-center\"" + data + " d=\"M" + xy(p.location + cplx(0.045, 0)) + " L" +
             xy(p.location + cplx(0, 0.045)) + " L" + xy(p.location - cplx(0.045, 0)) + " L" +
             xy(p.location - cplx(0, 0.045)) + " Z\" fill=\"#ff7f0e\"/>";
  }
  return {};
}

}  // namespace

std::string portrait_svg(const PolyVF& vf, const Tolerances& tol, const PortraitOptions& opts) {
  double ratio = 1.0;
  const PolyVF norm = canonical_normalization(vf, &ratio);
  ClassifyOptions co;
  co.compute_eta = false;
  co.verify = false;
  const Classification c = classify(norm, tol, co);
  if (!c.generic && !opts.diagnostics_only)
    fail(ErrorCode::NearBifurcation, "field is not generic (" + c.bifurcation + "): " + c.reason);

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"600\" viewBox=\"" << fmt(-kView) << ' '
      << fmt(-kView) << ' ' << fmt(2 * kView) << ' ' << fmt(2 * kView) << "\">\n";
  out << "<title>iP(z) d/dz, k=" << c.k << ", eps=[";
  for (std::size_t j = 0; j < vf.eps().size(); ++j) out << (j ? "," : "") << fmt(vf.eps()[j]);
  out << "], scale " << fmt(ratio) << ", "
      << (c.generic ? "tau " + involution_to_dyck(c.tau).str() : "bifurcation " + c.bifurcation) << "</title>\n";
  out << "<rect x=\"" << fmt(-kView) << "\" y=\"" << fmt(-kView) << "\" width=\"" << fmt(2 * kView) << "\" height=\""
      << fmt(2 * kView) << "\" fill=\"#ffffff\"/>\n";
  out << "<line class=\"axis\" x1=\"" << fmt(-kView) << "\" y1=\"0.0000\" x2=\"" << fmt(kView)
      << "\" y2=\"0.0000\" stroke=\"#999999\" stroke-width=\"0.006\"/>\n";

  if (opts.probes)
    for (const auto& pr : c.probes) {
      if (pr.polyline.empty()) continue;
      out << "<path class=\"probe\" data-end=\"" << pr.end << "\" d=\"" << path_data(pr.polyline)
          << "\" fill=\"none\" stroke=\"#7f7f7f\" stroke-width=\"0.006\" stroke-dasharray=\"0.03,0.02\"/>\n";
    }
  for (const auto& tr : c.traces) {
    const bool loop = tr.outcome == TraceOutcome::SymmetricHomoclinic;
    out << "<path class=\"separatrix" << (loop ? " loop" : "") << "\" data-index=\"" << tr.index << "\"";
    if (loop) out << " data-loop=\"" << std::abs(tr.index) << "\"";
    std::vector<cplx> line = tr.polyline;
    if (tr.outcome == TraceOutcome::Lands) line.push_back(c.points[tr.landing_point].location);
    out << " data-outcome=\"" << to_string(tr.outcome) << "\" d=\"" << path_data(line)
        << "\" fill=\"none\" stroke=\"" << (loop ? "#d62728" : "#000000") << "\" stroke-width=\"0.01\"/>\n";
  }
  for (std::size_t i = 0; i < c.points.size(); ++i) out << marker(c.points[i], i) << '\n';
  out << "</svg>\n";
  return out.str();
}

}  // namespace revfield
