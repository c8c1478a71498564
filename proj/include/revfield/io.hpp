#pragma once

#include <string>

#include <json.hpp>

#include "revfield/bifurcation.hpp"
#include "revfield/classification.hpp"
#include "revfield/combinatorics.hpp"
#include "revfield/field.hpp"
#include "revfield/realization.hpp"

namespace revfield {

using json = nlohmann::json;

json to_json(const Involution& tau);
json to_json(const StratumSignature& sig);
json to_json(const PolyVF& vf);
json to_json(const SeparatrixTrace& trace, bool geometry);
json to_json(const AnalyticInvariant& eta);
json to_json(const Classification& c, bool geometry = false);
json to_json(const RealizeReport& r);

/// Accepts {"kappas":[..], "widths":[..], "times":[[re,im], ..]}; missing keys are empty.
AnalyticInvariant invariant_from_json(const json& j);

/// One entry per stratum: udf, map, signature.
json strata_json(int k, int max_k);

struct PortraitOptions {
  bool probes = true;
  bool diagnostics_only = false;  // draw points and axis even when classification is refused
};

/// Phase portrait of the canonically normalized field, viewBox [-1.5, 1.5]^2.
std::string portrait_svg(const PolyVF& vf, const Tolerances& tol = {}, const PortraitOptions& opts = {});

}  // namespace revfield
