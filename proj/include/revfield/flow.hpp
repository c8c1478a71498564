#pragma once

#include <complex>
#include <vector>

#include "revfield/config.hpp"
#include "revfield/field.hpp"

namespace revfield {

/// Laurent expansion of 1/P at infinity, used to integrate exactly from
/// infinity to points outside the root disk.
class InfinityChart {
 public:
  explicit InfinityChart(const PolyVF& vf, int terms = 96);

  /// Integral of dw/P(w) from infinity to z; path independent for |z| > max|root|.
  cplx integral_from_infinity(cplx z) const;
  /// Travel time dz/(iP) from infinity to z.
  cplx time_from_infinity(cplx z) const { return integral_from_infinity(z) / cplx(0, 1); }

 private:
  int k_;
  std::vector<double> b_;  // 1/P = z^{-(k+1)} sum b_n z^{-n}
};

/// Orientation of the integrated direction field m * P / |P|.
enum class Direction {
  Forward,        // along iP: time increases
  Backward,       // along -iP
  OrthogonalUp,   // along -P: Im(time) increases
  OrthogonalDown  // along P
};

cplx direction_multiplier(Direction d) noexcept;

/// Direction of separatrix s_index at infinity, index in {+-1, ..., +-k}.
cplx separatrix_direction(int k, int index);
/// Direction of end e_j, j in {0, ..., k} (upper half plane, negative j mirrors).
cplx end_direction(int k, int j);
/// True if s_index leaves infinity in forward time.
bool separatrix_is_repelling(int index) noexcept;

/// Geometry shared by every trajectory of one field.
class FlowContext {
 public:
  FlowContext(const PolyVF& vf, const Tolerances& tol);

  const PolyVF& field() const noexcept { return vf_; }
  const Tolerances& tolerances() const noexcept { return tol_; }
  const std::vector<SingularPoint>& points() const noexcept { return points_; }
  const InfinityChart& chart() const noexcept { return chart_; }

  double scale() const noexcept { return scale_; }          // max(max|root|, min_separation)
  double r_inf() const noexcept { return r_inf_; }
  double separation() const noexcept { return separation_; }
  double land_radius() const noexcept { return land_radius_; }
  double max_arc() const noexcept { return max_arc_; }
  double time_unit() const noexcept { return time_unit_; }  // scale^{-k}
  bool simple() const noexcept { return simple_; }

  /// Index of the nearest singular point and its distance.
  int nearest_point(cplx z, double* dist) const;
  /// Radius inside which a trajectory moving in direction d is certain to
  /// converge to point id (never below land_radius for sinks, zero otherwise).
  double capture_radius(int id, Direction d) const;

 private:
  PolyVF vf_;
  Tolerances tol_;
  std::vector<SingularPoint> points_;
  InfinityChart chart_;
  double scale_ = 1.0;
  double r_inf_ = 10.0;
  double separation_ = 1.0;
  double land_radius_ = 1e-4;
  double max_arc_ = 4000.0;
  double time_unit_ = 1.0;
  bool simple_ = true;
  std::vector<double> capture_forward_;
  std::vector<double> capture_backward_;
};

struct FlowPoint {
  cplx z;
  cplx t;  // accumulated travel time dz/(iP)
};

/// Adaptive Dormand-Prince 4(5) integrator in arc length for
/// dz/ds = m P/|P|, dt/ds = -i m/|P|.
class FlowStepper {
 public:
  FlowStepper(const FlowContext& ctx, Direction dir, FlowPoint start);

  const FlowPoint& current() const noexcept { return cur_; }
  double arc() const noexcept { return arc_; }
  double last_step() const noexcept { return last_h_; }

  /// Performs one accepted adaptive step and returns the new point.
  const FlowPoint& advance();
  /// One step of fixed length from the current point, without acceptance.
  FlowPoint trial(double h) const;
  /// Replaces the current point (used after event refinement).
  void accept(const FlowPoint& p, double h);

 private:
  FlowPoint rk_step(const FlowPoint& p, double h, double* err) const;
  cplx step_time(cplx a, cplx b) const;
  void rhs(cplx z, cplx& dz, cplx& dt) const;

  const FlowContext& ctx_;
  cplx m_;
  FlowPoint cur_;
  double h_;
  double arc_ = 0.0;
  double last_h_ = 0.0;
  int steps_ = 0;
};

enum class TraceOutcome { Lands, SymmetricHomoclinic, Escapes, Unresolved };

const char* to_string(TraceOutcome o) noexcept;

struct SeparatrixTrace {
  int index = 0;
  cplx asymptotic_direction;
  std::vector<cplx> polyline;
  std::vector<cplx> times;       // travel time from the first polyline point
  cplx time_from_infinity;       // travel time from infinity to the first point
  TraceOutcome outcome = TraceOutcome::Unresolved;
  int landing_point = -1;        // index into FlowContext::points()
  double crossing = 0.0;         // real-axis abscissa for symmetric loops
  int escape_index = 0;          // separatrix reached at infinity for escapes
  double arc_length = 0.0;
};

/// Point of s_index at radius r: solves Im T(r e^{i theta}) = 0 near the
/// asymptotic direction.
cplx separatrix_start(const FlowContext& ctx, int index, double r);

SeparatrixTrace trace_separatrix(const FlowContext& ctx, int index);
SeparatrixTrace trace_separatrix(const PolyVF& vf, int index, const Tolerances& tol = {});

/// Symmetric Hausdorff distance between conj(polyline of a) and polyline of b.
double reversibility_residual(const SeparatrixTrace& a, const SeparatrixTrace& b);

/// Gauss-Legendre quadrature of dz/(iP) along the segment [a, b].
cplx chord_time(const PolyVF& vf, cplx a, cplx b);

}  // namespace revfield
