#include "revfield/realization.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>

#include "revfield/error.hpp"

namespace revfield {

namespace {

ClassifyOptions tau_only() {
  ClassifyOptions o;
  o.compute_eta = false;
  o.verify = false;
  o.keep_geometry = false;
  return o;
}

ClassifyOptions with_eta() {
  ClassifyOptions o;
  o.verify = false;
  o.keep_geometry = false;
  return o;
}

std::vector<cplx> locations_of(const std::vector<SingularPoint>& pts) {
  std::vector<cplx> out;
  for (const auto& p : pts) out.push_back(p.location);
  return out;
}

double min_separation(const std::vector<cplx>& z) {
  double s = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) s = std::min(s, std::abs(z[i] - z[j]));
  return s;
}

// Labels the new roots after the previous ones by greedy nearest matching.
std::vector<cplx> match_roots(const std::vector<cplx>& prev, const std::vector<cplx>& roots) {
  struct Pair {
    double d;
    std::size_t i, j;
  };
  std::vector<Pair> pairs;
  for (std::size_t i = 0; i < prev.size(); ++i)
    for (std::size_t j = 0; j < roots.size(); ++j) pairs.push_back({std::abs(prev[i] - roots[j]), i, j});
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    return a.d != b.d ? a.d < b.d : (a.i != b.i ? a.i < b.i : a.j < b.j);
  });
  std::vector<cplx> out(prev.size());
  std::vector<bool> ui(prev.size(), false), uj(roots.size(), false);
  for (const auto& p : pairs) {
    if (ui[p.i] || uj[p.j]) continue;
    ui[p.i] = uj[p.j] = true;
    out[p.i] = roots[p.j];
  }
  return out;
}

bool valid_slots(const AnalyticInvariant& eta) {
  for (double x : eta.kappas)
    if (!(x > 0.0) || !std::isfinite(x)) return false;
  for (double x : eta.widths)
    if (!(x > 0.0) || !std::isfinite(x)) return false;
  for (cplx t : eta.times)
    if (!(t.imag() > 0.0) || !std::isfinite(t.real())) return false;
  return true;
}

double log_mean_magnitude(const AnalyticInvariant& eta) {
  double acc = 0.0;
  int n = 0;
  for (double x : eta.kappas) acc += std::log(x), ++n;
  for (double x : eta.widths) acc += std::log(x), ++n;
  for (cplx t : eta.times) acc += std::log(std::abs(t)), ++n;
  return n ? acc / n : 0.0;
}

struct ModelState {
  int k;
  const PeriodModel* model;
  std::vector<double> eps;
  std::vector<cplx> loc;
};

// Invariant coordinates of the field eps, with roots labelled after loc.
// Returns false when the roots moved too far to keep their labels or a slot
// left its cone.
bool evaluate(const ModelState& st, const std::vector<double>& eps, std::vector<double>& y, std::vector<cplx>& loc) {
  for (double e : eps)
    if (!std::isfinite(e)) return false;
  const PolyVF vf(st.k, eps);
  std::vector<cplx> roots;
  try {
    roots = polynomial_roots(vf);
  } catch (const Error&) {
    return false;
  }
  loc = match_roots(st.loc, roots);
  const double sep = min_separation(st.loc);
  for (std::size_t i = 0; i < loc.size(); ++i)
    if (std::abs(loc[i] - st.loc[i]) > 0.3 * sep) return false;
  if (min_separation(loc) < 1e-6 * sep) return false;
  const auto eta = st.model->evaluate(vf, loc);
  if (!valid_slots(eta)) return false;
  y = invariant_coordinates(eta);
  return true;
}

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Damped Newton on eps for coordinates(eta(eps)) = target.
bool newton(ModelState& st, const std::vector<double>& target, int max_iter, int& iterations) {
  const int k = st.k;
  std::vector<double> y;
  std::vector<cplx> loc;
  if (!evaluate(st, st.eps, y, loc)) return false;
  st.loc = loc;
  Eigen::VectorXd f(k);
  for (int i = 0; i < k; ++i) f[i] = y[i] - target[i];
  for (int it = 0; it < max_iter; ++it) {
    if (inf_norm(f) <= 1e-12) return true;
    ++iterations;
    Eigen::MatrixXd jac(k, k);
    for (int j = 0; j < k; ++j) {
      const double h = 1e-6 * (1.0 + std::abs(st.eps[j]));
      auto plus = st.eps, minus = st.eps;
      plus[j] += h;
      minus[j] -= h;
      std::vector<double> yp, ym;
      std::vector<cplx> lp, lm;
      if (!evaluate(st, plus, yp, lp) || !evaluate(st, minus, ym, lm)) return false;
      for (int i = 0; i < k; ++i) jac(i, j) = (yp[i] - ym[i]) / (2.0 * h);
    }
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(jac);
    if (lu.rank() < k) return false;
    const Eigen::VectorXd delta = lu.solve(-f);
    double lambda = 1.0;
    bool moved = false;
    for (int halving = 0; halving < 12; ++halving, lambda *= 0.5) {
      auto trial = st.eps;
      for (int j = 0; j < k; ++j) trial[j] += lambda * delta[j];
      if (!evaluate(st, trial, y, loc)) continue;
      Eigen::VectorXd fn(k);
      for (int i = 0; i < k; ++i) fn[i] = y[i] - target[i];
      if (inf_norm(fn) < (1.0 - 1e-4 * lambda) * inf_norm(f)) {
        st.eps = trial;
        st.loc = loc;
        f = fn;
        moved = true;
        break;
      }
    }
    if (!moved) return inf_norm(f) <= 1e-10;
  }
  return inf_norm(f) <= 1e-10;
}

std::uint64_t tau_hash(const Involution& tau) {
  std::uint64_t h = 1469598103934665603ULL;
  for (int v : tau.map) h = (h ^ static_cast<std::uint64_t>(v + 1)) * 1099511628211ULL;
  return h;
}

}  // namespace

std::vector<double> invariant_coordinates(const AnalyticInvariant& eta) {
  std::vector<double> y;
  for (double x : eta.kappas) y.push_back(std::log(x));
  for (double x : eta.widths) y.push_back(std::log(x));
  for (cplx t : eta.times) {
    y.push_back(t.real());
    y.push_back(std::log(t.imag()));
  }
  return y;
}

double invariant_distance(const AnalyticInvariant& a, const AnalyticInvariant& b) {
  if (a.kappas.size() != b.kappas.size() || a.widths.size() != b.widths.size() || a.times.size() != b.times.size())
    return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < a.kappas.size(); ++i) d = std::max(d, std::abs(a.kappas[i] - b.kappas[i]) / b.kappas[i]);
  for (std::size_t i = 0; i < a.widths.size(); ++i) d = std::max(d, std::abs(a.widths[i] - b.widths[i]) / b.widths[i]);
  for (std::size_t i = 0; i < a.times.size(); ++i)
    d = std::max(d, std::abs(a.times[i] - b.times[i]) / std::abs(b.times[i]));
  return d;
}

void check_invariant_shape(const Involution& tau, const AnalyticInvariant& eta) {
  if (!is_valid_involution(tau)) fail(ErrorCode::Validation, "tau is not a valid combinatorial invariant");
  const auto sig = signature(tau);
  if (eta.kappas.size() != static_cast<std::size_t>(sig.a) || eta.widths.size() != static_cast<std::size_t>(sig.b) ||
      eta.times.size() != static_cast<std::size_t>(sig.c)) {
    std::ostringstream os;
    os << "dimension mismatch: stratum " << involution_to_dyck(tau).str() << " needs " << sig.a << " kappas, " << sig.b
       << " widths, " << sig.c << " times; got " << eta.kappas.size() << ", " << eta.widths.size() << ", "
       << eta.times.size();
    fail(ErrorCode::Validation, os.str());
  }
  if (!valid_slots(eta))
    fail(ErrorCode::Validation, "eta out of range: kappas and widths must be positive, times in the upper half plane");
}

PolyVF seed_configuration(const Involution& tau, const AnalyticInvariant& eta) {
  (void)eta;  // the stratum alone fixes the seed; the solver rescales it
  if (tau.k < 2) fail(ErrorCode::Domain, "seed_configuration: k must be at least 2");
  const auto sig = signature(tau);
  std::vector<cplx> roots;
  // Block A_1 holds end e_0 (direction +1), so blocks run right to left.
  for (std::size_t q = 0; q < sig.blocks.size(); ++q) {
    const double x = -static_cast<double>(q);
    const auto size = sig.blocks[q].size();
    if (size == 1) {
      roots.emplace_back(x, 0.0);
      continue;
    }
    for (std::size_t i = 1; i <= size / 2; ++i) {
      roots.emplace_back(x, static_cast<double>(i));
      roots.emplace_back(x, -static_cast<double>(i));
    }
  }
  return PolyVF::from_roots(roots);
}

PolyVF stratum_representative(const Involution& tau, const Tolerances& tol, const RealizeOptions& opts) {
  static std::mutex mutex;
  static std::map<std::vector<int>, std::vector<double>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(tau.map); it != cache.end()) return PolyVF(tau.k, it->second);
  }
  auto accept = [&](const PolyVF& vf) {
    try {
      const auto c = classify(vf, tol, tau_only());
      return c.generic && c.tau == tau && c.margin >= 1e-3;
    } catch (const Error&) {
      return false;
    }
  };
  auto remember = [&](const PolyVF& vf) {
    std::lock_guard lock(mutex);
    cache.emplace(tau.map, vf.eps());
    return vf;
  };

  const PolyVF seed = seed_configuration(tau, {});
  if (accept(seed)) return remember(seed);

  const auto sig = signature(tau);
  std::mt19937_64 rng(opts.rng_seed ^ tau_hash(tau));
  std::uniform_real_distribution<double> re(-1.0, 1.0), im(0.05, 1.0);
  for (int attempt = 0; attempt < opts.max_search; ++attempt) {
    std::vector<cplx> roots;
    for (int i = 0; i < sig.m; ++i) roots.emplace_back(re(rng), 0.0);
    for (int i = 0; i < (tau.k + 1 - sig.m) / 2; ++i) {
      const cplx z(re(rng), im(rng));
      roots.push_back(z);
      roots.push_back(std::conj(z));
    }
    const PolyVF vf = PolyVF::from_roots(roots);
    if (accept(vf)) return remember(vf);
  }
  fail(ErrorCode::Solver, "no generic representative found for stratum " + involution_to_dyck(tau).str());
}

PolyVF realize(const Involution& tau, const AnalyticInvariant& eta, const Tolerances& tol,
               const RealizeOptions& opts, RealizeReport* report) {
  check_invariant_shape(tau, eta);
  if (tau.k < 2) fail(ErrorCode::Domain, "realize: k must be at least 2");
  RealizeReport local;
  RealizeReport& rep = report ? *report : local;
  rep = RealizeReport{};
  const int k = tau.k;

  PolyVF start = opts.start ? PolyVF(k, *opts.start) : stratum_representative(tau, tol, opts);
  auto c0 = classify(start, tol, with_eta());
  if (!c0.generic || c0.tau != tau) fail(ErrorCode::Domain, "realize: starting field is not in the requested stratum");
  if (!opts.start) {
    // Travel times scale like r^{-k} under root scaling by r.
    const double r = std::exp((log_mean_magnitude(c0.eta) - log_mean_magnitude(eta)) / k);
    start = normalize_scale(start, r);
    c0 = classify(start, tol, with_eta());
    if (!c0.generic || c0.tau != tau) fail(ErrorCode::Solver, "realize: rescaled representative left the stratum");
  }
  rep.start_eps = start.eps();

  ModelState st{k, &c0.model, start.eps(), locations_of(c0.points)};
  const auto y0 = invariant_coordinates(c0.eta);
  const auto y1 = invariant_coordinates(eta);
  auto last_stable = [&] {
    std::ostringstream os;
    os.precision(17);
    os << "last stable eps = (";
    for (int j = 0; j < k; ++j) os << (j ? ", " : "") << st.eps[j];
    os << ")";
    return os.str();
  };

  double s = 0.0, ds = 0.25;
  while (s < 1.0) {
    if (rep.continuation_steps + rep.rejected_steps >= opts.max_steps)
      fail(ErrorCode::Solver, "realize: continuation step budget exhausted; " + last_stable());
    const double s_new = std::min(1.0, s + ds);
    std::vector<double> target(k);
    for (int i = 0; i < k; ++i) target[i] = y0[i] + s_new * (y1[i] - y0[i]);
    ModelState trial = st;
    bool ok = newton(trial, target, opts.max_newton, rep.newton_iterations);
    if (ok) {
      ++rep.tau_checks;
      try {
        const auto c = classify(PolyVF(k, trial.eps), tol, tau_only());
        ok = c.generic && c.tau == tau;
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok) {
      st = trial;
      s = s_new;
      ++rep.continuation_steps;
      rep.smallest_step = std::min(rep.smallest_step, ds);
      ds = std::min(1.0, ds * 1.5);
    } else {
      ++rep.rejected_steps;
      ds *= 0.5;
      if (ds < opts.min_step) {
        std::ostringstream os;
        os << "realize: continuation step underflow at s = " << s << " (stratum boundary?); " << last_stable();
        fail(ErrorCode::Solver, os.str());
      }
    }
  }

  // Final check against a full classification; polish once with a fresh model.
  PolyVF result(k, st.eps);
  auto final_c = classify(result, tol, with_eta());
  if (!final_c.generic || final_c.tau != tau) fail(ErrorCode::Solver, "realize: final field left the stratum");
  rep.final_error = invariant_distance(final_c.eta, eta);
  if (rep.final_error > opts.tol) {
    rep.log.push_back("polishing with the model of the final field");
    ModelState polish{k, &final_c.model, st.eps, locations_of(final_c.points)};
    if (newton(polish, y1, opts.max_newton, rep.newton_iterations)) {
      result = PolyVF(k, polish.eps);
      final_c = classify(result, tol, with_eta());
      if (!final_c.generic || final_c.tau != tau) fail(ErrorCode::Solver, "realize: polished field left the stratum");
      rep.final_error = invariant_distance(final_c.eta, eta);
    }
  }
  double root_sum = 0.0;
  for (const auto& p : final_c.points) root_sum += p.location.real() * p.multiplicity;
  rep.root_sum = root_sum;
  if (rep.final_error > opts.tol) {
    std::ostringstream os;
    os << "realize: did not converge (relative eta error " << rep.final_error << "); " << last_stable();
    fail(ErrorCode::Solver, os.str());
  }
  rep.converged = true;
  return result;
}

}  // namespace revfield
