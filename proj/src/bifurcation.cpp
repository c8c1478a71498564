#include "revfield/bifurcation.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <initializer_list>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "revfield/error.hpp"

#include <Eigen/Dense>

namespace revfield {

namespace {

// Neumaier summation.
double compensated_sum(std::initializer_list<double> terms) {
  double sum = 0.0, carry = 0.0;
  for (double x : terms) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  return sum + carry;
}

double near_zero(double value, double scale, double rel) { return std::abs(value) <= rel * scale; }

}  // namespace

CubicLoci cubic_loci(double eps0, double eps1, double tol) {
  CubicLoci out;
  out.delta3 = compensated_sum({-4.0 * eps1 * eps1 * eps1, -27.0 * eps0 * eps0});
  out.on_homoclinic_ray = std::abs(eps0) <= tol && eps1 > 0.0;
  return out;
}

double quartic_discriminant(const Eps3& eps) {
  const auto [e0, e1, e2] = eps;
  const double e1s = e1 * e1, e2s = e2 * e2;
  return compensated_sum({256.0 * e0 * e0 * e0, -27.0 * e1s * e1s, 144.0 * e0 * e1s * e2,
                          -128.0 * e0 * e0 * e2s, -4.0 * e1s * e2s * e2, 16.0 * e0 * e2s * e2s});
}

double quartic_homoclinic_surface(const Eps3& eps) {
  const auto [e0, e1, e2] = eps;
  const double e2s = e2 * e2;
  return compensated_sum({64.0 * e0 * e0 * e0, -48.0 * e0 * e0 * e2s, -8.0 * e1 * e1 * e2s * e2,
                          12.0 * e0 * e2s * e2s, -e2s * e2s * e2s});
}

double homoclinic_resultant(const Eps3& eps) {
  const auto [e0, e1, e2] = eps;
  // Descending coefficients.
  const long double f[5] = {-8.0L, 0.0L, -2.0L * e2, static_cast<long double>(e1),
                            static_cast<long double>(e0) - static_cast<long double>(e2) * e2 / 4.0L};
  const long double g[4] = {-8.0L, 0.0L, 0.0L, static_cast<long double>(e1)};
  Eigen::Matrix<long double, 7, 7> syl = Eigen::Matrix<long double, 7, 7>::Zero();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 5; ++c) syl(r, r + c) = f[c];
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) syl(3 + r, r + c) = g[c];
  return static_cast<double>(syl.fullPivLu().determinant());
}

double surface_tolerance(const Eps3& eps, double rel) {
  const double n = std::hypot(eps[0], eps[1], eps[2]);
  return rel * (1.0 + std::pow(n, 6));
}

std::optional<SurfacePoint> homoclinic_surface_point(double eps1, double eps2) {
  if (eps1 == 0.0) return std::nullopt;
  const double a = std::cbrt(eps1 / 8.0);
  const double b2 = (6.0 * a * a + eps2) / 2.0;
  if (!(b2 > 0.0)) return std::nullopt;
  SurfacePoint sp;
  sp.eps = {2.0 * eps2 * a * a + eps2 * eps2 / 4.0, eps1, eps2};
  sp.center = cplx(a, std::sqrt(b2));
  return sp;
}

QuarticFlags quartic_intersections(const Eps3& eps, double rel) {
  const auto [e0, e1, e2] = eps;
  // Weighted scale: eps_j has weight 4 - j, so each locus is compared with
  // the matching power of rho.
  const double rho = std::max({std::pow(std::abs(e0), 0.25), std::cbrt(std::abs(e1)), std::sqrt(std::abs(e2))});
  const double s = std::max(rho, 1e-300);
  QuarticFlags out;
  out.discriminant = near_zero(quartic_discriminant(eps), std::pow(s, 12), rel);
  out.cusp_curve = near_zero(e1, s * s * s, rel) && near_zero(4.0 * e0 - e2 * e2, std::pow(s, 4), rel) && e2 > 0.0;
  if (!near_zero(e1, s * s * s, rel)) {
    const double a = std::cbrt(e1 / 8.0);
    out.homoclinic_surface =
        near_zero(quartic_homoclinic_surface(eps), std::pow(s, 12), rel) && 6.0 * a * a + e2 > 0.0;
  }
  out.parabolic_homoclinic = near_zero(4.0 * e0 - 5.0 * e2 * e2, std::pow(s, 4), rel) &&
                             near_zero(e1 * e1 - 8.0 * e2 * e2 * e2, std::pow(s, 6), rel);
  out.triple_parabolic = near_zero(27.0 * e1 * e1 + 8.0 * e2 * e2 * e2, std::pow(s, 6), rel) &&
                         near_zero(12.0 * e0 + e2 * e2, std::pow(s, 4), rel) && e2 < 0.0;
  return out;
}

CuspReport cusp_expansion_check(const std::vector<double>& ts) {
  CuspReport out;
  for (double t : ts) {
    CuspSample s;
    s.eps1 = t * t * t;
    s.eta2 = t * t;
    // A(1, e1, 2 + eta) = (4 - (2 + eta)^2)^3 - 8 e1^2 (2 + eta)^3, written so
    // that no cancellation occurs near the cusp.
    const double q = -(4.0 + s.eta2) * s.eta2;
    s.value = q * q * q - 8.0 * s.eps1 * s.eps1 * std::pow(2.0 + s.eta2, 3);
    const double e1s = s.eps1 * s.eps1, eta3 = s.eta2 * s.eta2 * s.eta2;
    const double denom = std::max(e1s, std::abs(eta3));
    s.printed_ratio = std::abs(s.value + 64.0 * (e1s - eta3)) / denom;
    s.expanded_ratio = std::abs(s.value + 64.0 * (e1s + eta3)) / denom;
    out.samples.push_back(s);
  }
  // Least-squares slope of log ratio against log t.
  auto slope = [&](auto get) {
    const std::size_t n = out.samples.size();
    if (n < 2) return 0.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = std::log(ts[i]);
      const double y = std::log(std::max(get(out.samples[i]), 1e-300));
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
  };
  out.printed_slope = slope([](const CuspSample& s) { return s.printed_ratio; });
  out.expanded_slope = slope([](const CuspSample& s) { return s.expanded_ratio; });
  return out;
}

// ---- scans -----------------------------------------------------------------

Eps3 sphere_to_eps(double polar, double azimuth) {
  const double u[3] = {std::sin(polar) * std::cos(azimuth), std::sin(polar) * std::sin(azimuth), std::cos(polar)};
  Eps3 e{};
  for (int j = 0; j < 3; ++j) e[j] = std::copysign(std::pow(std::abs(u[j]), 4 - j), u[j]);
  return e;
}

namespace {

std::string closest_pair_type(const std::vector<SingularPoint>& pts) {
  double best = INFINITY;
  bool real = true;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = std::abs(pts[i].location - pts[j].location);
      if (d < best) {
        best = d;
        real = pts[i].location.imag() == 0.0 && pts[j].location.imag() == 0.0;
      }
    }
  return real ? "parabolic-real" : "parabolic-complex-pair";
}

}  // namespace

StratumCell label_cell(const PolyVF& vf, const Tolerances& tol) {
  StratumCell cell;
  cell.eps = vf.eps();
  ClassifyOptions opts;
  opts.compute_eta = false;
  opts.verify = false;
  opts.keep_geometry = false;
  try {
    const Classification c = classify(vf, tol, opts);
    cell.margin = c.margin;
    if (!c.generic) {
      cell.label = "bifurcation:" + c.bifurcation;
    } else if (c.margin < tol.scan_margin) {
      const auto& g = c.geometry;
      const double sep = g.min_separation / std::max(g.max_modulus, 1e-300);
      const double eig = std::isfinite(g.min_abs_re_eig) ? g.min_abs_re_eig / g.max_abs_derivative : INFINITY;
      cell.label = "bifurcation:" + (sep <= eig ? closest_pair_type(c.points) : std::string("homoclinic-asymmetric-pair"));
    } else {
      cell.label = involution_to_dyck(c.tau).str();
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::Numeric && e.code() != ErrorCode::NearBifurcation) throw;
    cell.label = "bifurcation:compound";
    cell.margin = 0.0;
  }
  return cell;
}

namespace {

std::uint64_t fnv1a(const void* data, std::size_t n, std::uint64_t h = 1469598103934665603ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t cell_key(int k, const std::vector<double>& eps, const std::string& fingerprint) {
  std::uint64_t h = fnv1a(&k, sizeof k);
  h = fnv1a(eps.data(), eps.size() * sizeof(double), h);
  return fnv1a(fingerprint.data(), fingerprint.size(), h);
}

struct CacheEntry {
  std::string label;
  double margin;
};

std::map<std::uint64_t, CacheEntry> load_cache(const std::string& path) {
  std::map<std::uint64_t, CacheEntry> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key, label, margin;
    if (!std::getline(ls, key, ',') || !std::getline(ls, label, ',') || !std::getline(ls, margin)) continue;
    try {
      out[std::stoull(key, nullptr, 16)] = {label, std::stod(margin)};
    } catch (const std::exception&) {
    }
  }
  return out;
}

void save_cache(const std::string& path, const std::map<std::uint64_t, CacheEntry>& cache) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot write scan cache " + path);
  char buf[64];
  for (const auto& [key, e] : cache) {
    std::snprintf(buf, sizeof buf, "%016" PRIx64 ",", key);
    out << buf << e.label << ',';
    std::snprintf(buf, sizeof buf, "%.17g\n", e.margin);
    out << buf;
  }
}

struct Grid {
  const ScanSpec& spec;
  double du, dv;

  explicit Grid(const ScanSpec& s) : spec(s) {
    if (s.k == 2) {
      du = (s.hi - s.lo) / s.n0;
      dv = (s.hi - s.lo) / s.n1;
    } else {
      du = M_PI / s.n0;
      dv = 2.0 * M_PI / s.n1;
    }
  }
  // uv of the center of base cell (i, j), shifted by fractions of a cell.
  std::vector<double> uv(int i, int j, double fi = 0.5, double fj = 0.5) const {
    const double u0 = spec.k == 2 ? spec.lo : 0.0;
    const double v0 = spec.k == 2 ? spec.lo : 0.0;
    return {u0 + (i + fi) * du, v0 + (j + fj) * dv};
  }
  std::vector<double> eps(const std::vector<double>& uv) const {
    if (spec.k == 2) return {uv[0], uv[1]};
    const Eps3 e = sphere_to_eps(uv[0], uv[1]);
    return {e[0], e[1], e[2]};
  }
};

}  // namespace

std::vector<StratumCell> stratum_scan(const ScanSpec& spec, const Tolerances& tol, const ScanProgress& progress) {
  if (spec.k != 2 && spec.k != 3) fail(ErrorCode::Domain, "stratum_scan supports k = 2 and k = 3");
  if (spec.n0 < 1 || spec.n1 < 1 || spec.n0 > 4096 || spec.n1 > 4096)
    fail(ErrorCode::Validation, "scan grid must have between 1 and 4096 cells per axis");
  if (spec.k == 2 && !(spec.hi > spec.lo)) fail(ErrorCode::Validation, "scan range must satisfy lo < hi");

  const Grid grid(spec);
  const std::string fp = tol.fingerprint();
  std::map<std::uint64_t, CacheEntry> cache;
  if (!spec.cache_path.empty()) cache = load_cache(spec.cache_path);

  std::vector<StratumCell> cells;
  for (int j = 0; j < spec.n1; ++j)
    for (int i = 0; i < spec.n0; ++i) {
      StratumCell c;
      c.index = static_cast<std::size_t>(j) * spec.n0 + i;
      c.uv = grid.uv(i, j);
      c.eps = grid.eps(c.uv);
      cells.push_back(std::move(c));
    }

  auto evaluate = [&](std::vector<StratumCell>& todo, std::size_t done_before, std::size_t total) {
    std::vector<std::size_t> pending;
    for (std::size_t n = 0; n < todo.size(); ++n) {
      const auto it = cache.find(cell_key(spec.k, todo[n].eps, fp));
      if (it != cache.end()) {
        todo[n].label = it->second.label;
        todo[n].margin = it->second.margin;
      } else {
        pending.push_back(n);
      }
    }
    std::atomic<std::size_t> next{0}, done{todo.size() - pending.size()};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (std::size_t n; (n = next.fetch_add(1)) < pending.size();) {
        auto& cell = todo[pending[n]];
        try {
          const StratumCell r = label_cell(PolyVF(spec.k, cell.eps), tol);
          cell.label = r.label;
          cell.margin = r.margin;
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
        const std::size_t d = ++done;
        if (progress && (d % 256 == 0 || d == todo.size())) {
          std::lock_guard lock(error_mutex);
          progress(done_before + d, total);
        }
      }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < std::min<unsigned>(hw, 64); ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    for (std::size_t n : pending) cache[cell_key(spec.k, todo[n].eps, fp)] = {todo[n].label, todo[n].margin};
  };

  evaluate(cells, 0, cells.size());

  if (spec.refine) {
    auto at = [&](int i, int j) -> const StratumCell* {
      if (spec.k == 3) i = std::clamp(i, 0, spec.n0 - 1), j = (j % spec.n1 + spec.n1) % spec.n1;
      if (i < 0 || j < 0 || i >= spec.n0 || j >= spec.n1) return nullptr;
      return &cells[static_cast<std::size_t>(j) * spec.n0 + i];
    };
    std::vector<StratumCell> sub;
    for (int j = 0; j < spec.n1; ++j)
      for (int i = 0; i < spec.n0; ++i) {
        const StratumCell& c = *at(i, j);
        bool boundary = false;
        for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          const StratumCell* n = at(i + di, j + dj);
          if (n && n->label != c.label) boundary = true;
        }
        if (!boundary) continue;
        for (double fj : {0.25, 0.75})
          for (double fi : {0.25, 0.75}) {
            StratumCell s;
            s.index = c.index;
            s.level = 1;
            s.uv = grid.uv(i, j, fi, fj);
            s.eps = grid.eps(s.uv);
            sub.push_back(std::move(s));
          }
      }
    evaluate(sub, cells.size(), cells.size() + sub.size());
    cells.insert(cells.end(), std::make_move_iterator(sub.begin()), std::make_move_iterator(sub.end()));
  }

  if (!spec.cache_path.empty()) save_cache(spec.cache_path, cache);
  return cells;
}

std::vector<std::string> generic_labels(const std::vector<StratumCell>& cells) {
  std::set<std::string> out;
  for (const auto& c : cells)
    if (c.label.rfind("bifurcation:", 0) != 0) out.insert(c.label);
  return {out.begin(), out.end()};
}

std::string scan_csv(const std::vector<StratumCell>& cells) {
  std::ostringstream out;
  const std::size_t n = cells.empty() ? 0 : cells.front().eps.size();
  for (std::size_t j = 0; j < n; ++j) out << "eps" << j << ',';
  out << "label,margin,level\n";
  char buf[40];
  for (const auto& c : cells) {
    for (double e : c.eps) {
      std::snprintf(buf, sizeof buf, "%.12g,", e);
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "%.6e", c.margin);
    out << c.label << ',' << buf << ',' << c.level << '\n';
  }
  return out.str();
}

namespace {

const char* palette(std::size_t n) {
  static const char* colors[] = {"#4e79a7", "#f28e2b", "#59a14f", "#b07aa1", "#76b7b2", "#edc948",
                                 "#ff9da7", "#9c755f", "#e15759", "#bab0ac", "#8cd17d", "#d37295"};
  return colors[n % (sizeof colors / sizeof *colors)];
}

}  // namespace

std::string scan_svg(const ScanSpec& spec, const std::vector<StratumCell>& cells) {
  const int px = 600, legend = 220;
  std::map<std::string, const char*> color;
  std::size_t next = 0;
  for (const auto& l : generic_labels(cells)) color[l] = palette(next++);
  std::set<std::string> bif;
  for (const auto& c : cells)
    if (!color.count(c.label)) bif.insert(c.label);
  for (const auto& l : bif) color[l] = "#202020";

  const double cw = double(px) / spec.n0, ch = double(px) / spec.n1;
  std::ostringstream out;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\" "
                "shape-rendering=\"crispEdges\">\n",
                px + legend, px, px + legend, px);
  out << buf;
  for (const auto& c : cells) {
    const std::size_t i = c.index % spec.n0, j = c.index / spec.n0;
    double x = i * cw, y = (spec.n1 - 1 - j) * ch, w = cw, h = ch;
    if (c.level == 1) {
      const Grid grid(spec);
      const auto base = grid.uv(static_cast<int>(i), static_cast<int>(j), 0.0, 0.0);
      const double fi = (c.uv[0] - base[0]) / grid.du, fj = (c.uv[1] - base[1]) / grid.dv;
      w = cw / 2, h = ch / 2;
      x += fi < 0.5 ? 0.0 : w;
      y += fj < 0.5 ? h : 0.0;
    }
    std::snprintf(buf, sizeof buf, "<rect x=\"%.3f\" y=\"%.3f\" width=\"%.3f\" height=\"%.3f\" fill=\"%s\"/>\n", x, y,
                  w, h, color[c.label]);
    out << buf;
  }
  int row = 0;
  for (const auto& [label, fill] : color) {
    std::snprintf(buf, sizeof buf, "<rect x=\"%d\" y=\"%d\" width=\"14\" height=\"14\" fill=\"%s\"/>\n", px + 12,
                  16 + 22 * row, fill);
    out << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"12\">", px + 32,
                  28 + 22 * row);
    out << buf << label << "</text>\n";
    ++row;
  }
  const char* axes = spec.k == 2 ? "x: eps0, y: eps1" : "x: azimuth, y: polar angle";
  std::snprintf(buf, sizeof buf, "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"12\">%s</text>\n",
                px + 12, 28 + 22 * row + 10, axes);
  out << buf;
  if (spec.k == 2) {
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-family=\"monospace\" font-size=\"12\">range [%g, %g]</text>\n",
                  px + 12, 28 + 22 * row + 28, spec.lo, spec.hi);
    out << buf;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace revfield
