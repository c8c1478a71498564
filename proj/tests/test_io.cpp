#include <doctest.h>

#include <numbers>
#include <regex>
#include <set>

#include "generators.hpp"
#include "revfield/error.hpp"
#include "revfield/flow.hpp"
#include "revfield/io.hpp"

using namespace revfield;

namespace {

int count(const std::string& text, const std::string& needle) {
  int n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;  // sentinel: nothing thrown
}

}  // namespace

TEST_CASE("classification JSON of z^3 - z") {
  const auto j = to_json(classify(PolyVF(2, {0.0, -1.0})));
  CHECK(j["generic"] == true);
  CHECK(j["tau"]["udf"] == "FFF");
  CHECK(j["tau"]["map"] == json::array({0, 1, 2}));
  CHECK(j["signature"]["a"] == 2);
  CHECK(j["eta"]["kappas"].size() == 2);
  CHECK(j["eta"]["widths"].empty());
  const auto& d = j["diagnostics"];
  CHECK(d["points"].size() == 3);
  CHECK(d["probes"].size() == 3);
  CHECK(d["separatrices"].size() == 4);
  CHECK(d["loci"]["delta3"] == 4.0);
  CHECK(d["min_abs_re_eigenvalue"].is_null());
  CHECK_FALSE(d["separatrices"][0].contains("polyline"));
  const auto g = to_json(classify(PolyVF(2, {0.0, -1.0})), true);
  CHECK(g["diagnostics"]["separatrices"][0].contains("polyline"));
}

TEST_CASE("non-generic classification JSON carries the bifurcation label") {
  const auto j = to_json(classify(PolyVF(3, {1.0, 0.0, 2.0})));
  CHECK(j["generic"] == false);
  CHECK(j["tau"].is_null());
  CHECK(j["eta"].is_null());
  CHECK(j["bifurcation"] == "parabolic-complex-pair");
  CHECK(j["diagnostics"]["loci"]["on_cusp_curve"] == true);
}

TEST_CASE("eta JSON roundtrip and validation") {
  const AnalyticInvariant eta{{1.5}, {0.25}, {cplx(0.5, 2.0)}};
  const auto back = invariant_from_json(to_json(eta));
  CHECK(back.kappas == eta.kappas);
  CHECK(back.widths == eta.widths);
  CHECK(back.times == eta.times);
  CHECK(invariant_from_json(json::object()).size() == 0);
  CHECK(code_of([] { invariant_from_json(json::array()); }) == ErrorCode::Validation);
  CHECK(code_of([] { invariant_from_json({{"kappa", {1.0}}}); }) == ErrorCode::Validation);
  CHECK(code_of([] { invariant_from_json({{"times", {{1.0}}}}); }) == ErrorCode::Validation);
  CHECK(code_of([] { invariant_from_json({{"kappas", "x"}}); }) == ErrorCode::Validation);
}

TEST_CASE("strata JSON counts match the enumeration") {
  const auto j = strata_json(3, 3);
  CHECK(j.size() == enumerate_strata(3).size());
  std::set<std::string> udfs;
  for (const auto& s : j) udfs.insert(s["udf"].get<std::string>());
  CHECK(udfs.size() == j.size());
  CHECK(udfs.count("FFFF") == 1);
}

TEST_CASE("portrait of z^3 - z shows two symmetric loops and three centers") {
  const std::string svg = portrait_svg(PolyVF(2, {0.0, -1.0}));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("tau FFF") != std::string::npos);
  CHECK(count(svg, "class=\"separatrix loop\"") == 4);
  CHECK(count(svg, "data-loop=\"1\"") == 2);
  CHECK(count(svg, "data-loop=\"2\"") == 2);
  CHECK(count(svg, "class=\"point center\"") == 3);
  CHECK(count(svg, "class=\"probe\"") == 3);
  PortraitOptions opts;
  opts.probes = false;
  CHECK(count(portrait_svg(PolyVF(2, {0.0, -1.0}), {}, opts), "class=\"probe\"") == 0);
}

TEST_CASE("portrait of a quintic field draws eight separatrices") {
  const std::vector<cplx> roots{-1.2, 0.1, 1.1, cplx(0.0, 0.8), cplx(0.0, -0.8)};
  const PolyVF vf = PolyVF::from_roots(roots);
  const std::string svg = portrait_svg(vf);
  CHECK(count(svg, "class=\"separatrix") == 8);
  CHECK(count(svg, "class=\"point ") == 5);
  // Each trace leaves infinity along its invariant ray.
  const auto c = classify(vf);
  REQUIRE(c.traces.size() == 8);
  for (const auto& tr : c.traces) {
    const cplx u = separatrix_direction(4, tr.index);
    CHECK(std::abs(tr.polyline.front() / std::abs(tr.polyline.front()) - u) < 0.05);
  }
}

TEST_CASE("portraits are deterministic") {
  gen::Rng rng(101);
  for (int n = 0; n < 5; ++n) {
    const auto [vf, c] = gen::generic_field(rng, gen::uniform_int(rng, 2, 4), 1e-2);
    const std::string a = portrait_svg(vf);
    CHECK(a == portrait_svg(vf));
    // Every coordinate is printed with four decimals.
    const std::regex number(R"(-?\d+\.\d{4}\b)");
    CHECK(std::regex_search(a, number));
    CHECK(a.find("-0.0000") == std::string::npos);
  }
}

TEST_CASE("portrait refuses non-generic fields unless asked for diagnostics") {
  const PolyVF cusp(2, {0.0, 0.0});
  CHECK(code_of([&] { portrait_svg(cusp); }) == ErrorCode::NearBifurcation);
  PortraitOptions opts;
  opts.diagnostics_only = true;
  const std::string svg = portrait_svg(cusp, {}, opts);
  CHECK(svg.find("bifurcation parabolic-real") != std::string::npos);
  CHECK(count(svg, "class=\"point parabolic\"") == 1);
}
