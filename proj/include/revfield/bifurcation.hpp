#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "revfield/classification.hpp"
#include "revfield/config.hpp"
#include "revfield/field.hpp"

namespace revfield {

using Eps3 = std::array<double, 3>;  // (eps0, eps1, eps2) of z^4 + eps2 z^2 + eps1 z + eps0

// ---- k = 2 -----------------------------------------------------------------

struct CubicLoci {
  double delta3 = 0.0;             // -4 eps1^3 - 27 eps0^2
  bool on_homoclinic_ray = false;  // eps0 = 0, eps1 > 0
};

CubicLoci cubic_loci(double eps0, double eps1, double tol = 1e-12);

// ---- k = 3 -----------------------------------------------------------------

/// Discriminant of z^4 + eps2 z^2 + eps1 z + eps0, compensated summation.
double quartic_discriminant(const Eps3& eps);

/// 64 e0^3 - 48 e0^2 e2^2 - 8 e1^2 e2^3 + 12 e0 e2^4 - e2^6.
double quartic_homoclinic_surface(const Eps3& eps);

/// Sylvester resultant in a of
///   -8a^4 - 2 e2 a^2 + e1 a + e0 - e2^2/4   and   -8a^3 + e1.
double homoclinic_resultant(const Eps3& eps);

/// Tolerance scale for a weighted-homogeneous polynomial of degree d.
double surface_tolerance(const Eps3& eps, double rel = 1e-7);

/// Point of the homoclinic surface with the given eps1 != 0 and eps2, together
/// with the complex root a + ib (b > 0) whose eigenvalue is purely imaginary.
/// Empty outside the region where that root is non-real.
struct SurfacePoint {
  Eps3 eps;
  cplx center;
};
std::optional<SurfacePoint> homoclinic_surface_point(double eps1, double eps2);

struct QuarticFlags {
  bool discriminant = false;         // multiple root
  bool homoclinic_surface = false;   // sym_hom = 0 with eps1 != 0 and a non-real center
  bool parabolic_homoclinic = false; // 4 e0 - 5 e2^2 = e1^2 - 8 e2^3 = 0
  bool triple_parabolic = false;     // 27 e1^2 + 8 e2^3 = 12 e0 + e2^2 = 0, e2 < 0
  bool cusp_curve = false;           // e1 = 0, 4 e0 = e2^2, e2 > 0
};

QuarticFlags quartic_intersections(const Eps3& eps, double rel = 1e-9);

struct CuspSample {
  double eps1 = 0.0;
  double eta2 = 0.0;
  double value = 0.0;           // A(1, eps1, 2 + eta2)
  double printed_ratio = 0.0;   // |A + 64(eps1^2 - eta2^3)| / max(eps1^2, |eta2^3|)
  double expanded_ratio = 0.0;  // |A + 64(eps1^2 + eta2^3)| / max(eps1^2, |eta2^3|)
};

struct CuspReport {
  std::vector<CuspSample> samples;
  double printed_slope = 0.0;   // log-log slope of printed_ratio against the sample radius
  double expanded_slope = 0.0;
};

/// Samples (eps1, eta2) = (t^3, t^2) for each t and fits ratio ~ t^slope.
CuspReport cusp_expansion_check(const std::vector<double>& ts);

// ---- scans -----------------------------------------------------------------

struct StratumCell {
  std::size_t index = 0;      // row-major position in the base grid
  std::vector<double> uv;     // grid coordinates of the cell center
  std::vector<double> eps;
  std::string label;          // UDF string or "bifurcation:<type>"
  double margin = 0.0;
  int level = 0;              // 0 base grid, 1 refined sub-cell
};

struct ScanSpec {
  int k = 2;
  int n0 = 200;               // k=2: eps0 cells; k=3: polar cells
  int n1 = 200;               // k=2: eps1 cells; k=3: azimuthal cells
  double lo = -2.0, hi = 2.0; // k=2 square
  bool refine = false;        // split cells whose neighbors disagree into 2x2
  std::string cache_path;     // resume cache, empty for none
};

/// Sphere parametrization used for k=3: u on the unit sphere maps to
/// eps_j = sign(u_j) |u_j|^(k+1-j), which meets every orbit of the scaling
/// action exactly once.
Eps3 sphere_to_eps(double polar, double azimuth);

/// Scan label for one parameter point.
StratumCell label_cell(const PolyVF& vf, const Tolerances& tol);

using ScanProgress = std::function<void(std::size_t done, std::size_t total)>;

std::vector<StratumCell> stratum_scan(const ScanSpec& spec, const Tolerances& tol = {},
                                      const ScanProgress& progress = {});

/// Distinct labels not starting with "bifurcation:".
std::vector<std::string> generic_labels(const std::vector<StratumCell>& cells);

std::string scan_csv(const std::vector<StratumCell>& cells);
std::string scan_svg(const ScanSpec& spec, const std::vector<StratumCell>& cells);

}  // namespace revfield
