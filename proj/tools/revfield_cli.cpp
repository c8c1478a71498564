// revfield: command-line front end over the C API.
// Exit codes: 0 success (generic field), 2 non-generic field, 1 error.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "revfield.h"

namespace {

struct Owned {
  char* p = nullptr;
  ~Owned() { rf_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

using ContextPtr = std::unique_ptr<rf_context, decltype(&rf_context_free)>;

struct Failure {
  std::string message;
};

void check(rf_context* ctx, rf_status s) {
  if (s != RF_OK) throw Failure{std::string(rf_status_name(s)) + ": " + rf_last_error(ctx)};
}

std::vector<double> parse_eps(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw Failure{"validation: cannot parse eps component '" + item + "'"};
    out.push_back(v);
  }
  return out;
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !out.write(data.data(), static_cast<std::streamsize>(data.size())))
    throw Failure{"io: cannot write " + path};
}

void print_table(const std::string& text) {
  std::printf("%-16s %3s %3s %3s %3s %3s\n", "udf", "m", "h", "a", "b", "c");
  for (const auto& entry : nlohmann::json::parse(text)) {
    const auto& sig = entry.at("signature");
    std::printf("%-16s %3d %3d %3d %3d %3d\n", entry.at("udf").get<std::string>().c_str(), sig.at("m").get<int>(),
                sig.at("h").get<int>(), sig.at("a").get<int>(), sig.at("b").get<int>(), sig.at("c").get<int>());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Classification, realization and bifurcation scans of reversible polynomial vector fields iP(z) d/dz"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "tolerance file (key = value lines); default $REVFIELD_CONFIG");
  app.add_option("--set", overrides, "tolerance override key=value, repeatable");

  auto* strata = app.add_subcommand("strata", "enumerate the generic strata for degree k+1");
  int strata_k = 2;
  std::string format = "table";
  strata->add_option("--k", strata_k, "k")->required();
  strata->add_option("--format", format, "table or json")->check(CLI::IsMember({"table", "json"}));

  auto* cls = app.add_subcommand("classify", "classify iP(z) d/dz, P = z^{k+1} + eps_{k-1} z^{k-1} + ... + eps_0");
  std::string eps_text;
  bool geometry = false, tau_only = false;
  cls->add_option("--eps", eps_text, "eps_0,...,eps_{k-1}")->required()->allow_extra_args(false);
  cls->add_flag("--geometry", geometry, "include separatrix and probe polylines");
  cls->add_flag("--tau-only", tau_only, "skip the analytic invariant");

  auto* real = app.add_subcommand("realize", "find eps with prescribed (tau, eta)");
  std::string tau_text, eta_text;
  real->add_option("--tau", tau_text, "stratum as a U/D/F string")->required();
  real->add_option("--eta", eta_text, "{\"kappas\":[..],\"widths\":[..],\"times\":[[re,im],..]}")->required();

  auto* por = app.add_subcommand("portrait", "write an SVG phase portrait");
  std::string portrait_eps, portrait_out;
  bool no_probes = false, diagnostics = false;
  por->add_option("--eps", portrait_eps, "eps_0,...,eps_{k-1}")->required();
  por->add_option("--out", portrait_out, "output SVG path")->required();
  por->add_flag("--no-probes", no_probes, "omit the dashed end trajectories");
  por->add_flag("--diagnostics", diagnostics, "draw non-generic fields too");

  auto* scan = app.add_subcommand("scan", "label a parameter grid by stratum (k = 2 square, k = 3 sphere)");
  int scan_k = 2, n = 0, n0 = 0, n1 = 0;
  double lo = -2.0, hi = 2.0;
  bool refine = false, quiet = false;
  std::string scan_out, scan_svg, resume;
  scan->add_option("--k", scan_k, "2 or 3")->check(CLI::IsMember({2, 3}));
  scan->add_option("--n", n, "cells per axis");
  scan->add_option("--n0", n0, "cells along eps_0 (k=2) or polar angle (k=3)");
  scan->add_option("--n1", n1, "cells along eps_1 (k=2) or azimuth (k=3)");
  scan->add_option("--lo", lo, "k=2 range lower bound");
  scan->add_option("--hi", hi, "k=2 range upper bound");
  scan->add_flag("--refine", refine, "split cells on label boundaries once");
  scan->add_option("--resume", resume, "cache file of labelled cells, created if missing");
  scan->add_option("--out", scan_out, "CSV path (default stdout)");
  scan->add_option("--svg", scan_svg, "heat map path");
  scan->add_flag("--quiet", quiet, "no progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  ContextPtr ctx(rf_context_new(), rf_context_free);
  if (!ctx) {
    std::fprintf(stderr, "error: out of memory\n");
    return 1;
  }
  try {
    check(ctx.get(), rf_context_load_environment(ctx.get()));
    if (!config_path.empty()) check(ctx.get(), rf_context_load_config(ctx.get(), config_path.c_str()));
    for (const auto& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw Failure{"validation: --set expects key=value, got '" + kv + "'"};
      check(ctx.get(), rf_context_set(ctx.get(), kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str()));
    }

    if (*strata) {
      Owned out;
      check(ctx.get(), rf_strata_json(ctx.get(), strata_k, &out.p));
      if (format == "json")
        std::printf("%s\n", out.p);
      else
        print_table(out.str());
      return 0;
    }

    if (*cls) {
      const auto eps = parse_eps(eps_text);
      rf_classification* raw = nullptr;
      check(ctx.get(), rf_classify(ctx.get(), eps.data(), eps.size(), tau_only ? RF_CLASSIFY_TAU_ONLY : 0u, &raw));
      std::unique_ptr<rf_classification, decltype(&rf_classification_free)> c(raw, rf_classification_free);
      Owned text;
      check(ctx.get(), rf_classification_json(ctx.get(), c.get(), geometry ? 1 : 0, &text.p));
      std::printf("%s\n", text.p);
      if (!rf_classification_is_generic(c.get())) {
        Owned label;
        check(ctx.get(), rf_classification_label(ctx.get(), c.get(), &label.p));
        std::fprintf(stderr, "non-generic: %s\n", label.p);
        return 2;
      }
      return 0;
    }

    if (*real) {
      std::vector<double> eps(64);
      size_t len = 0;
      Owned report;
      const rf_status s =
          rf_realize(ctx.get(), tau_text.c_str(), eta_text.c_str(), eps.data(), eps.size(), &len, &report.p);
      if (report.p) std::fprintf(stderr, "%s\n", report.p);
      check(ctx.get(), s);
      std::ostringstream out;
      out.precision(17);
      out << "{\"k\":" << len << ",\"eps\":[";
      for (size_t j = 0; j < len; ++j) out << (j ? "," : "") << eps[j];
      out << "]}";
      std::printf("%s\n", out.str().c_str());
      return 0;
    }

    if (*por) {
      const auto eps = parse_eps(portrait_eps);
      unsigned flags = (no_probes ? RF_PORTRAIT_NO_PROBES : 0u) | (diagnostics ? RF_PORTRAIT_DIAGNOSTICS : 0u);
      Owned svg;
      check(ctx.get(), rf_portrait_svg(ctx.get(), eps.data(), eps.size(), flags, &svg.p));
      write_file(portrait_out, svg.str());
      return 0;
    }

    if (*scan) {
      rf_scan_spec spec;
      rf_scan_spec_default(&spec, scan_k);
      if (n > 0) spec.n0 = spec.n1 = n;
      if (n0 > 0) spec.n0 = n0;
      if (n1 > 0) spec.n1 = n1;
      spec.lo = lo;
      spec.hi = hi;
      spec.refine = refine ? 1 : 0;
      spec.cache = resume.empty() ? nullptr : resume.c_str();
      rf_progress_fn progress = nullptr;
      if (!quiet)
        progress = [](size_t done, size_t total, void*) { std::fprintf(stderr, "\rscan %zu/%zu", done, total); };
      Owned csv, svg;
      int labels = 0;
      const rf_status s = rf_scan(ctx.get(), &spec, progress, nullptr, &csv.p, scan_svg.empty() ? nullptr : &svg.p, &labels);
      if (!quiet) std::fprintf(stderr, "\n");
      check(ctx.get(), s);
      if (scan_out.empty())
        std::fputs(csv.p, stdout);
      else
        write_file(scan_out, csv.str());
      if (!scan_svg.empty()) write_file(scan_svg, svg.str());
      std::fprintf(stderr, "generic labels: %d\n", labels);
      return 0;
    }
  } catch (const Failure& f) {
    std::fprintf(stderr, "error: %s\n", f.message.c_str());
    return 1;
  }
  return 1;
}
