#pragma once

#include <string>
#include <vector>

#include "revfield/combinatorics.hpp"
#include "revfield/config.hpp"
#include "revfield/field.hpp"
#include "revfield/flow.hpp"

namespace revfield {

/// kappas in R+, widths carry the iR+ slots (stored as their positive
/// imaginary part), times in the upper half plane.
struct AnalyticInvariant {
  std::vector<double> kappas;
  std::vector<double> widths;
  std::vector<cplx> times;

  std::size_t size() const noexcept { return kappas.size() + widths.size() + times.size(); }
};

/// Each slot is an integer combination of the point periods 2 pi / P'(z_p).
enum class SlotPart { Real, Imag, Complex };

struct SlotModel {
  SlotPart part = SlotPart::Complex;
  std::vector<int> coeffs;  // one per singular point, in FlowContext::points() order
  int sign = 1;
};

struct PeriodModel {
  std::vector<SlotModel> kappas, widths, times;

  /// Evaluates the slots for a field whose points are listed in the same
  /// order the model was built with.
  AnalyticInvariant evaluate(const PolyVF& vf, const std::vector<cplx>& locations) const;
};

/// Trajectory through R_inf e^{i pi j/k} (conjugated when mirror is set).
struct ProbeRecord {
  int end = 0;
  bool mirror = false;
  bool periodic = false;
  bool resolved = false;
  int alpha = -1;  // point ids in FlowContext::points()
  int omega = -1;
  cplx start;
  std::vector<cplx> polyline;   // alpha side first, through start, to omega
  std::vector<cplx> times;      // travel time relative to start
  std::size_t start_index = 0;
};

struct ClassifyOptions {
  bool compute_eta = true;
  bool verify = true;            // second transversal path and mirror zones
  bool keep_geometry = true;     // keep polylines in the result
};

struct Classification {
  int k = 0;
  std::vector<double> eps;
  bool generic = false;
  std::string bifurcation;  // empty when generic
  std::string reason;
  Involution tau;
  AnalyticInvariant eta;
  PeriodModel model;
  std::vector<SingularPoint> points;
  std::vector<SeparatrixTrace> traces;  // s_1..s_k followed by s_-1..s_-k
  std::vector<ProbeRecord> probes;      // e_0..e_k
  RootGeometry geometry;
  double margin = 0.0;
  double max_residue_discrepancy = 0.0;  // relative
  double max_path_discrepancy = 0.0;     // relative, transversal times
  double max_mirror_discrepancy = 0.0;   // relative, lower zones vs -conj(upper)
};

ProbeRecord probe_end(const FlowContext& ctx, int j, bool mirror = false);
ProbeRecord probe_end(const PolyVF& vf, int j, const Tolerances& tol = {});

/// Pairs the ends from probe and trace data; throws Consistency when the
/// data do not determine a valid involution.
Involution extract_tau(const FlowContext& ctx, const std::vector<ProbeRecord>& probes,
                       const std::vector<SeparatrixTrace>& upper_traces);
Involution extract_tau(const PolyVF& vf, const Tolerances& tol = {});

struct TransversalResult {
  cplx value;                 // quadrature, from the even end to the odd end
  cplx residue_value;         // winding-number combination of point periods
  std::vector<int> winding;   // per point
  std::vector<cplx> path;     // closed path used for the winding numbers
};

/// Travel time across the zone whose ends are probed by from and to, starting
/// orthogonally from the from-trajectory in direction orth.
TransversalResult transversal_time(const FlowContext& ctx, const ProbeRecord& from, const ProbeRecord& to,
                                   Direction orth);
/// Zone given by its two ends (upper half plane unless mirror).
cplx transversal_time(const PolyVF& vf, int end_a, int end_b, bool mirror = false, const Tolerances& tol = {});

/// Travel time along the full symmetric loop of an upper trace, checked
/// against the residue sum over the enclosed points.
double homoclinic_period(const FlowContext& ctx, const SeparatrixTrace& loop);

/// Per point: 1 if it lies to the right of the symmetric loop (the side
/// containing the positive real half-line beyond the crossing), else 0.
std::vector<int> loop_enclosure(const FlowContext& ctx, const SeparatrixTrace& loop);

AnalyticInvariant extract_eta(const PolyVF& vf, const Involution& tau, const Tolerances& tol = {});

Classification classify(const PolyVF& vf, const Tolerances& tol = {}, const ClassifyOptions& opts = {});

/// Winding number of a closed polygon (implicitly closed) around p.
int winding_number(const std::vector<cplx>& polygon, cplx p);

}  // namespace revfield
