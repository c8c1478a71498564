#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "revfield/classification.hpp"
#include "revfield/combinatorics.hpp"
#include "revfield/config.hpp"
#include "revfield/field.hpp"

namespace revfield {

struct RealizeOptions {
  double tol = 1e-6;                          // relative error on eta; defaults to Tolerances::solver_tol
  int max_newton = 12;                        // per continuation step
  int max_steps = 400;                        // continuation steps
  double min_step = 1e-6;                     // smallest continuation step before giving up
  std::uint64_t rng_seed = 0x5eedf1e1dULL;    // representative search
  int max_search = 4000;
  std::optional<std::vector<double>> start;   // explicit starting field (same stratum)
};

struct RealizeReport {
  bool converged = false;
  std::vector<double> start_eps;
  int continuation_steps = 0;
  int rejected_steps = 0;
  int newton_iterations = 0;
  int tau_checks = 0;
  double smallest_step = 1.0;
  double final_error = 0.0;       // relative, against a full classification
  double root_sum = 0.0;          // gauge check: sum of roots of the result
  std::vector<std::string> log;
};

/// Checks that the slot counts of eta match signature(tau) and that every
/// slot lies in its open cone; throws Validation otherwise.
void check_invariant_shape(const Involution& tau, const AnalyticInvariant& eta);

/// Deterministic initial guess: blocks placed right to left, a real root for
/// each fixed end, stacked conjugate pairs for each even block.
PolyVF seed_configuration(const Involution& tau, const AnalyticInvariant& eta);

/// Some generic field in the stratum of tau (seed, then a deterministic
/// random search). Results are cached per tau.
PolyVF stratum_representative(const Involution& tau, const Tolerances& tol = {}, const RealizeOptions& opts = {});

/// Field realizing (tau, eta), by continuation in eta from a representative.
PolyVF realize(const Involution& tau, const AnalyticInvariant& eta, const Tolerances& tol = {},
               const RealizeOptions& opts = {}, RealizeReport* report = nullptr);

/// Coordinates used by the solver: log of kappas and widths, and
/// (Re, log Im) of the times.
std::vector<double> invariant_coordinates(const AnalyticInvariant& eta);

/// Largest relative slot error between two invariants of equal shape.
double invariant_distance(const AnalyticInvariant& a, const AnalyticInvariant& b);

}  // namespace revfield
