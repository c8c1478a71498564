#include "revfield/field.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

#include "revfield/error.hpp"

namespace revfield {

namespace {

using lcplx = std::complex<long double>;

template <class T>
void horner(const std::vector<double>& c, std::complex<T> z, std::complex<T>& p, std::complex<T>& dp) {
  p = std::complex<T>(static_cast<T>(c.back()), 0);
  dp = std::complex<T>(0, 0);
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    dp = dp * z + p;
    p = p * z + static_cast<T>(c[i]);
  }
}

std::vector<cplx> companion_seeds(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
  for (int i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < n; ++i) companion(i, n - 1) = -c[i];
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
  std::vector<cplx> seeds(n);
  for (int i = 0; i < n; ++i) seeds[i] = solver.eigenvalues()[i];
  // Distinct seeds are required by the simultaneous iteration.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(seeds[i] - seeds[j]) < 1e-12) seeds[i] += cplx(1e-9 * (i + 1), 1e-9 * (j + 2));
  return seeds;
}

// Aberth-Ehrlich simultaneous iteration in extended precision.
std::vector<lcplx> aberth(const std::vector<double>& c, const std::vector<cplx>& seeds) {
  const std::size_t n = seeds.size();
  std::vector<lcplx> z(seeds.begin(), seeds.end());
  for (int iter = 0; iter < 200; ++iter) {
    long double max_step = 0;
    long double max_mod = 0;
    for (std::size_t i = 0; i < n; ++i) {
      lcplx p, dp;
      horner<long double>(c, z[i], p, dp);
      if (p == lcplx(0)) continue;
      const lcplx ratio = p / dp;
      lcplx repulsion = 0;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) repulsion += 1.0L / (z[i] - z[j]);
      const lcplx step = ratio / (1.0L - ratio * repulsion);
      if (std::isfinite(std::abs(step))) {
        z[i] -= step;
        max_step = std::max(max_step, std::abs(step));
      }
      max_mod = std::max(max_mod, std::abs(z[i]));
    }
    if (max_step <= 1e-18L * (1.0L + max_mod)) break;
  }
  return z;
}

lcplx newton_polish(const std::vector<double>& c, lcplx z, int iterations = 4) {
  for (int i = 0; i < iterations; ++i) {
    lcplx p, dp;
    horner<long double>(c, z, p, dp);
    if (dp == lcplx(0)) break;
    const lcplx step = p / dp;
    if (!std::isfinite(std::abs(step))) break;
    z -= step;
    if (std::abs(step) <= 1e-19L * (1.0L + std::abs(z))) break;
  }
  return z;
}

// Coefficients of P(c + w) in ascending powers of w.
std::vector<cplx> taylor_coefficients(const std::vector<double>& coeffs, cplx c) {
  std::vector<lcplx> a(coeffs.begin(), coeffs.end());
  const lcplx cc(c.real(), c.imag());
  const std::size_t n = a.size();
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = n - 1; j-- > i;) a[j] += cc * a[j + 1];
  return {a.begin(), a.end()};
}

}  // namespace

const char* to_string(PointKind kind) noexcept {
  switch (kind) {
    case PointKind::RealCenter: return "real-center";
    case PointKind::Attracting: return "attracting";
    case PointKind::Repelling: return "repelling";
    case PointKind::Parabolic: return "parabolic";
    case PointKind::ComplexCenterCandidate: return "complex-center-candidate";
  }
  return "unknown";
}

PolyVF::PolyVF(int k, std::vector<double> eps) : k_(k), eps_(std::move(eps)) {
  if (k_ < 2) fail(ErrorCode::Domain, "PolyVF: k must be at least 2 (infinity is not a pole for k <= 1)");
  if (eps_.size() != static_cast<std::size_t>(k_))
    fail(ErrorCode::Validation, "PolyVF: expected " + std::to_string(k_) + " parameters, got " + std::to_string(eps_.size()));
  for (double e : eps_)
    if (!std::isfinite(e)) fail(ErrorCode::Validation, "PolyVF: parameters must be finite");
  coeffs_.assign(static_cast<std::size_t>(k_) + 2, 0.0);
  std::copy(eps_.begin(), eps_.end(), coeffs_.begin());
  coeffs_.back() = 1.0;
}

cplx PolyVF::operator()(cplx z) const noexcept {
  cplx p = coeffs_.back();
  for (std::size_t i = coeffs_.size() - 1; i-- > 0;) p = p * z + coeffs_[i];
  return p;
}

void PolyVF::evaluate(cplx z, cplx& p, cplx& dp) const noexcept { horner<double>(coeffs_, z, p, dp); }

cplx PolyVF::derivative(cplx z) const noexcept {
  cplx p, dp;
  evaluate(z, p, dp);
  return dp;
}

cplx PolyVF::second_derivative(cplx z) const noexcept {
  cplx d2 = 0;
  for (std::size_t j = coeffs_.size() - 1; j >= 2; --j) d2 = d2 * z + coeffs_[j] * double(j) * double(j - 1);
  return d2;
}

PolyVF PolyVF::from_roots(std::span<const cplx> roots) {
  const int n = static_cast<int>(roots.size());
  if (n < 3) fail(ErrorCode::Domain, "from_roots: need at least 3 roots");
  cplx mean = std::accumulate(roots.begin(), roots.end(), cplx(0)) / double(n);
  mean = cplx(mean.real(), 0.0);
  std::vector<cplx> poly{1.0};
  for (cplx r : roots) {
    const cplx root = r - mean;
    std::vector<cplx> next(poly.size() + 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i) {
      next[i + 1] += poly[i];
      next[i] -= poly[i] * root;
    }
    poly = std::move(next);
  }
  double imag_scale = 0;
  for (const auto& c : poly) imag_scale = std::max(imag_scale, std::abs(c.imag()) / (1.0 + std::abs(c)));
  if (imag_scale > 1e-8) fail(ErrorCode::Domain, "from_roots: roots are not closed under conjugation");
  std::vector<double> eps(static_cast<std::size_t>(n - 1));
  for (int j = 0; j < n - 1; ++j) eps[j] = poly[j].real();
  return PolyVF(n - 1, std::move(eps));
}

std::vector<cplx> polynomial_roots(const PolyVF& vf) {
  const auto& c = vf.coefficients();
  const auto seeds = companion_seeds(c);
  auto refined = aberth(c, seeds);
  const std::size_t n = refined.size();

  long double scale = 0;
  for (const auto& z : refined) scale = std::max(scale, std::abs(z));

  // Greedy conjugate matching: each root pairs with the root nearest to its
  // conjugate, or with itself (then it is real).
  struct Candidate {
    long double dist;
    std::size_t i, j;
  };
  std::vector<Candidate> cand;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j)
      cand.push_back({j == i ? 2.0L * std::abs(refined[i].imag()) : std::abs(refined[i] - std::conj(refined[j])), i, j});
  std::sort(cand.begin(), cand.end(), [](const Candidate& x, const Candidate& y) {
    return x.dist != y.dist ? x.dist < y.dist : std::tie(x.i, x.j) < std::tie(y.i, y.j);
  });
  std::vector<bool> used(n, false);
  std::vector<cplx> roots;
  roots.reserve(n);
  for (const auto& cd : cand) {
    if (used[cd.i] || used[cd.j]) continue;
    used[cd.i] = used[cd.j] = true;
    if (cd.i == cd.j) {
      lcplx x(refined[cd.i].real(), 0);
      // Real Newton keeps the root on the axis.
      for (int i = 0; i < 6; ++i) {
        lcplx p, dp;
        horner<long double>(c, x, p, dp);
        if (dp.real() == 0) break;
        const long double step = p.real() / dp.real();
        if (!std::isfinite(step) || std::abs(step) > 1e-3L * (1.0L + scale)) break;
        x = lcplx(x.real() - step, 0);
      }
      roots.emplace_back(static_cast<double>(x.real()), 0.0);
    } else {
      lcplx avg = (refined[cd.i] + std::conj(refined[cd.j])) / 2.0L;
      const lcplx polished = newton_polish(c, avg);
      if (std::abs(polished - avg) <= 1e-3L * (1.0L + scale)) avg = polished;
      if (avg.imag() < 0) avg = std::conj(avg);
      roots.emplace_back(static_cast<double>(avg.real()), static_cast<double>(avg.imag()));
      roots.emplace_back(static_cast<double>(avg.real()), -static_cast<double>(avg.imag()));
    }
  }

  for (const auto& z : roots) {
    const cplx p = vf(z);
    const double bound = 1e-12 * std::pow(1.0 + std::abs(z), vf.degree());
    if (!(std::abs(p) <= bound)) {
      std::ostringstream os;
      os.precision(17);
      os << "root refinement did not converge: |P(" << z << ")| = " << std::abs(p) << " > " << bound;
      fail(ErrorCode::Numeric, os.str());
    }
  }
  std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return roots;
}

std::vector<SingularPoint> singular_points(const PolyVF& vf, const Tolerances& tol) {
  const auto roots = polynomial_roots(vf);
  const std::size_t n = roots.size();
  double scale = 0;
  for (cplx z : roots) scale = std::max(scale, std::abs(z));
  const double merge = tol.multiple_root_sep * scale;

  // Loose groups first; a group is one multiple point when its spread is
  // within what double precision can resolve around an exact multiple root.
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const bool all_zero = std::all_of(vf.eps().begin(), vf.eps().end(), [](double e) { return e == 0.0; });
  const double loose = all_zero ? std::numeric_limits<double>::infinity() : 1e-3 * scale;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) <= loose) parent[find(i)] = find(j);

  std::vector<std::vector<std::size_t>> groups(n);
  for (std::size_t i = 0; i < n; ++i) groups[find(i)].push_back(i);
  std::iota(parent.begin(), parent.end(), 0);
  for (const auto& g : groups) {
    if (g.size() < 2) continue;
    cplx c = 0.0;
    for (std::size_t i : g) c += roots[i];
    c /= double(g.size());
    double spread = 0.0;
    for (std::size_t i : g) spread = std::max(spread, std::abs(roots[i] - c));
    bool whole = all_zero;
    if (!whole) {
      const int m = static_cast<int>(g.size());
      const auto taylor = taylor_coefficients(vf.coefficients(), c);
      double noise = 0.0;
      for (std::size_t j = 0; j < vf.coefficients().size(); ++j)
        noise += std::abs(vf.coefficients()[j]) * std::pow(std::abs(c), double(j));
      noise *= 64.0 * std::numeric_limits<double>::epsilon();
      const double attainable = std::pow(noise / std::abs(taylor[m]), 1.0 / m);
      whole = spread <= std::max(merge, 10.0 * attainable);
    }
    for (std::size_t a = 0; a < g.size(); ++a)
      for (std::size_t b = a + 1; b < g.size(); ++b)
        if (whole || std::abs(roots[g[a]] - roots[g[b]]) <= merge) parent[find(g[a])] = find(g[b]);
  }

  std::vector<SingularPoint> points;
  std::vector<std::size_t> owner(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (owner[r] == n) {
      owner[r] = points.size();
      points.push_back({roots[i], 0, {}, PointKind::RealCenter, {}});
    }
    auto& pt = points[owner[r]];
    pt.location = (pt.location * double(pt.multiplicity) + roots[i]) / double(pt.multiplicity + 1);
    ++pt.multiplicity;
  }

  double max_dp = 0;
  for (auto& pt : points) {
    if (std::abs(pt.location.imag()) <= merge) pt.location = cplx(pt.location.real(), 0.0);
    if (pt.multiplicity == 1) max_dp = std::max(max_dp, std::abs(vf.derivative(pt.location)));
  }
  const double tol_eig = tol.tol_eig_factor * max_dp;
  for (auto& pt : points) {
    if (pt.multiplicity > 1) {
      pt.kind = PointKind::Parabolic;
      pt.eigenvalue = 0;
      pt.period = 0;
      continue;
    }
    const cplx dp = vf.derivative(pt.location);
    pt.eigenvalue = cplx(0, 1) * dp;
    pt.period = 2.0 * std::numbers::pi / dp;
    if (pt.location.imag() == 0.0) {
      pt.kind = PointKind::RealCenter;
    } else if (pt.eigenvalue.real() < -tol_eig) {
      pt.kind = PointKind::Attracting;
    } else if (pt.eigenvalue.real() > tol_eig) {
      pt.kind = PointKind::Repelling;
    } else {
      pt.kind = PointKind::ComplexCenterCandidate;
    }
  }
  std::sort(points.begin(), points.end(), [](const SingularPoint& a, const SingularPoint& b) {
    return a.location.real() != b.location.real() ? a.location.real() < b.location.real()
                                                  : a.location.imag() < b.location.imag();
  });
  return points;
}

cplx period(const PolyVF& vf, const SingularPoint& p) {
  if (p.multiplicity != 1) fail(ErrorCode::Domain, "period: point is not simple");
  return 2.0 * std::numbers::pi / vf.derivative(p.location);
}

PolyVF normalize_scale(const PolyVF& vf, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) fail(ErrorCode::Domain, "normalize_scale: ratio must be positive");
  std::vector<double> eps = vf.eps();
  const int k = vf.k();
  for (int j = 0; j < k; ++j) eps[j] *= std::pow(r, k + 1 - j);
  return PolyVF(k, std::move(eps));
}

PolyVF canonical_normalization(const PolyVF& vf, double* ratio) {
  double max_mod = 0;
  for (cplx z : polynomial_roots(vf)) max_mod = std::max(max_mod, std::abs(z));
  if (max_mod == 0.0) fail(ErrorCode::Domain, "canonical_normalization: all roots at the origin");
  const double r = 1.0 / max_mod;
  if (ratio) *ratio = r;
  return normalize_scale(vf, r);
}

RootGeometry root_geometry(const PolyVF& vf, const std::vector<SingularPoint>& points) {
  RootGeometry g;
  g.min_separation = std::numeric_limits<double>::infinity();
  g.min_abs_re_eig = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    g.max_modulus = std::max(g.max_modulus, std::abs(points[i].location));
    if (points[i].multiplicity > 1) g.min_separation = 0.0;
    for (std::size_t j = 0; j < i; ++j)
      g.min_separation = std::min(g.min_separation, std::abs(points[i].location - points[j].location));
    if (points[i].multiplicity == 1) {
      g.max_abs_derivative = std::max(g.max_abs_derivative, std::abs(vf.derivative(points[i].location)));
      if (points[i].location.imag() != 0.0)
        g.min_abs_re_eig = std::min(g.min_abs_re_eig, std::abs(points[i].eigenvalue.real()));
    }
  }
  return g;
}

}  // namespace revfield
