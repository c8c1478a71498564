#pragma once

#include <string>
#include <string_view>

namespace revfield {

// Numerical settings shared by every module. All radii are expressed relative
// to the geometry of the field so results are invariant under root scaling.
struct Tolerances {
  double r_inf_factor = 10.0;        // R_inf = r_inf_factor * 2 max|root|
  double land_factor = 1e-4;         // landing radius = land_factor * min root separation
  double axis_tol = 1e-9;            // |Im z| at a refined real-axis crossing, relative to scale
  double rtol = 1e-10;               // integrator relative tolerance
  double tol_eig_factor = 1e-9;      // tol_eig = tol_eig_factor * max|P'(root)|
  double multiple_root_sep = 1e-6;   // relative separation below which roots are merged
  double max_arc_factor = 400.0;     // trajectory arc length cap, in units of R_inf
  double residue_check = 1e-8;       // relative agreement required between quadrature and residues
  double solver_tol = 1e-6;          // realization acceptance (relative, on eta)
  double scan_margin = 1e-6;         // genericity margin below which a scan cell is a bifurcation
  int max_k = 14;                    // enumeration capacity
  int max_steps = 400000;            // integrator step cap per trajectory

  // Applies one `key = value` assignment. Unknown keys and unparsable values
  // raise a Validation error.
  void set(std::string_view key, std::string_view value);

  // Reads a TOML-style file of `key = value` lines ('#' starts a comment).
  static Tolerances from_file(const std::string& path);

  // Defaults, then the file named by REVFIELD_CONFIG when that variable is set.
  static Tolerances from_environment();

  // Canonical text form; used as part of scan cache keys.
  std::string fingerprint() const;
};

}  // namespace revfield
