#include "revfield.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

#include "revfield/bifurcation.hpp"
#include "revfield/classification.hpp"
#include "revfield/combinatorics.hpp"
#include "revfield/config.hpp"
#include "revfield/error.hpp"
#include "revfield/io.hpp"
#include "revfield/realization.hpp"

struct rf_context {
  revfield::Tolerances tol;
  std::string error;
};

struct rf_classification {
  revfield::Classification rep;
};

namespace {

struct NullArgument {
  std::string message;
};

rf_status code_of(revfield::ErrorCode c) {
  using revfield::ErrorCode;
  switch (c) {
    case ErrorCode::Validation: return RF_ERR_VALIDATION;
    case ErrorCode::Capacity: return RF_ERR_CAPACITY;
    case ErrorCode::Domain: return RF_ERR_DOMAIN;
    case ErrorCode::Numeric: return RF_ERR_NUMERIC;
    case ErrorCode::NearBifurcation: return RF_ERR_NEAR_BIFURCATION;
    case ErrorCode::Consistency: return RF_ERR_CONSISTENCY;
    case ErrorCode::Solver: return RF_ERR_SOLVER;
    case ErrorCode::Io: return RF_ERR_IO;
  }
  return RF_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes and the context message.
template <class Fn>
rf_status guarded(rf_context* ctx, Fn&& fn) {
  if (!ctx) return RF_ERR_NULL_ARGUMENT;
  ctx->error.clear();
  try {
    fn();
    return RF_OK;
  } catch (const revfield::Error& e) {
    ctx->error = e.what();
    return code_of(e.code());
  } catch (const NullArgument& e) {
    ctx->error = e.message;
    return RF_ERR_NULL_ARGUMENT;
  } catch (const std::bad_alloc&) {
    ctx->error = "out of memory";
    return RF_ERR_INTERNAL;
  } catch (const std::exception& e) {
    ctx->error = e.what();
    return RF_ERR_INTERNAL;
  }
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.data(), s.size() + 1);
  return out;
}

void require(const void* p, const char* name) {
  if (!p) throw NullArgument{std::string(name) + " must not be NULL"};
}

revfield::PolyVF field_of(const double* eps, size_t n) {
  require(eps, "eps");
  if (n < 2) revfield::fail(revfield::ErrorCode::Domain, "k >= 2 is required (got " + std::to_string(n) + " coefficients)");
  return revfield::PolyVF(static_cast<int>(n), std::vector<double>(eps, eps + n));
}

}  // namespace

extern "C" {

const char* rf_version(void) { return "1.0.0"; }

const char* rf_status_name(rf_status status) {
  switch (status) {
    case RF_OK: return "ok";
    case RF_ERR_VALIDATION: return "validation";
    case RF_ERR_CAPACITY: return "capacity";
    case RF_ERR_DOMAIN: return "domain";
    case RF_ERR_NUMERIC: return "numeric";
    case RF_ERR_NEAR_BIFURCATION: return "near-bifurcation";
    case RF_ERR_CONSISTENCY: return "consistency";
    case RF_ERR_SOLVER: return "solver";
    case RF_ERR_IO: return "io";
    case RF_ERR_NULL_ARGUMENT: return "null-argument";
    case RF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

rf_context* rf_context_new(void) {
  try {
    return new rf_context();
  } catch (...) {
    return nullptr;
  }
}

void rf_context_free(rf_context* ctx) { delete ctx; }

const char* rf_last_error(const rf_context* ctx) { return ctx ? ctx->error.c_str() : "null context"; }

rf_status rf_context_set(rf_context* ctx, const char* key, const char* value) {
  return guarded(ctx, [&] {
    require(key, "key");
    require(value, "value");
    ctx->tol.set(key, value);
  });
}

rf_status rf_context_load_config(rf_context* ctx, const char* path) {
  return guarded(ctx, [&] {
    require(path, "path");
    ctx->tol = revfield::Tolerances::from_file(path);
  });
}

rf_status rf_context_load_environment(rf_context* ctx) {
  return guarded(ctx, [&] { ctx->tol = revfield::Tolerances::from_environment(); });
}

void rf_string_free(char* s) { std::free(s); }

rf_status rf_count_strata(rf_context* ctx, int k, uint64_t* out) {
  return guarded(ctx, [&] {
    require(out, "out");
    *out = revfield::count_strata(k);
  });
}

rf_status rf_strata_json(rf_context* ctx, int k, char** out) {
  return guarded(ctx, [&] {
    require(out, "out");
    *out = dup(revfield::strata_json(k, ctx->tol.max_k).dump());
  });
}

rf_status rf_udf_to_map(rf_context* ctx, const char* udf, int* map, size_t capacity, size_t* len) {
  return guarded(ctx, [&] {
    require(udf, "udf");
    require(len, "len");
    const auto tau = revfield::involution_from_string(udf);
    *len = tau.map.size();
    if (capacity < tau.map.size())
      revfield::fail(revfield::ErrorCode::Capacity, "map buffer holds " + std::to_string(capacity) + " entries, " +
                                                        std::to_string(tau.map.size()) + " needed");
    require(map, "map");
    std::copy(tau.map.begin(), tau.map.end(), map);
  });
}

rf_status rf_map_to_udf(rf_context* ctx, const int* map, size_t len, char** out) {
  return guarded(ctx, [&] {
    require(map, "map");
    require(out, "out");
    if (len == 0) revfield::fail(revfield::ErrorCode::Validation, "empty map");
    revfield::Involution tau{static_cast<int>(len) - 1, std::vector<int>(map, map + len)};
    *out = dup(revfield::involution_to_dyck(tau).str());
  });
}

rf_status rf_classify(rf_context* ctx, const double* eps, size_t n, unsigned flags, rf_classification** out) {
  return guarded(ctx, [&] {
    require(out, "out");
    *out = nullptr;
    revfield::ClassifyOptions opts;
    opts.compute_eta = !(flags & RF_CLASSIFY_TAU_ONLY);
    opts.verify = !(flags & RF_CLASSIFY_NO_VERIFY);
    auto c = std::make_unique<rf_classification>();
    c->rep = revfield::classify(field_of(eps, n), ctx->tol, opts);
    *out = c.release();
  });
}

void rf_classification_free(rf_classification* c) { delete c; }

int rf_classification_is_generic(const rf_classification* c) { return c && c->rep.generic ? 1 : 0; }

double rf_classification_margin(const rf_classification* c) { return c ? c->rep.margin : 0.0; }

rf_status rf_classification_label(rf_context* ctx, const rf_classification* c, char** out) {
  return guarded(ctx, [&] {
    require(c, "classification");
    require(out, "out");
    *out = dup(c->rep.generic ? revfield::involution_to_dyck(c->rep.tau).str() : "bifurcation:" + c->rep.bifurcation);
  });
}

rf_status rf_classification_json(rf_context* ctx, const rf_classification* c, int geometry, char** out) {
  return guarded(ctx, [&] {
    require(c, "classification");
    require(out, "out");
    *out = dup(revfield::to_json(c->rep, geometry != 0).dump(2));
  });
}

rf_status rf_realize(rf_context* ctx, const char* udf, const char* eta_json, double* eps_out, size_t capacity,
                     size_t* len, char** report_json) {
  return guarded(ctx, [&] {
    require(udf, "udf");
    require(eta_json, "eta_json");
    require(len, "len");
    if (report_json) *report_json = nullptr;
    const auto tau = revfield::involution_from_string(udf);
    revfield::json parsed;
    try {
      parsed = revfield::json::parse(eta_json);
    } catch (const revfield::json::exception& e) {
      revfield::fail(revfield::ErrorCode::Validation, std::string("eta is not valid JSON: ") + e.what());
    }
    const auto eta = revfield::invariant_from_json(parsed);
    *len = static_cast<size_t>(tau.k);
    if (capacity < *len)
      revfield::fail(revfield::ErrorCode::Capacity, "eps buffer holds " + std::to_string(capacity) + " entries, " +
                                                        std::to_string(*len) + " needed");
    require(eps_out, "eps_out");
    revfield::RealizeOptions opts;
    opts.tol = ctx->tol.solver_tol;
    revfield::RealizeReport report;
    try {
      const auto vf = revfield::realize(tau, eta, ctx->tol, opts, &report);
      std::copy(vf.eps().begin(), vf.eps().end(), eps_out);
    } catch (...) {
      if (report_json && !report.start_eps.empty()) *report_json = dup(revfield::to_json(report).dump(2));
      throw;
    }
    if (report_json) *report_json = dup(revfield::to_json(report).dump(2));
  });
}

rf_status rf_portrait_svg(rf_context* ctx, const double* eps, size_t n, unsigned flags, char** out) {
  return guarded(ctx, [&] {
    require(out, "out");
    revfield::PortraitOptions opts;
    opts.probes = !(flags & RF_PORTRAIT_NO_PROBES);
    opts.diagnostics_only = (flags & RF_PORTRAIT_DIAGNOSTICS) != 0;
    *out = dup(revfield::portrait_svg(field_of(eps, n), ctx->tol, opts));
  });
}

double rf_cubic_discriminant(double eps0, double eps1) { return revfield::cubic_loci(eps0, eps1).delta3; }

double rf_quartic_discriminant(double eps0, double eps1, double eps2) {
  return revfield::quartic_discriminant({eps0, eps1, eps2});
}

double rf_quartic_homoclinic_surface(double eps0, double eps1, double eps2) {
  return revfield::quartic_homoclinic_surface({eps0, eps1, eps2});
}

void rf_scan_spec_default(rf_scan_spec* spec, int k) {
  if (!spec) return;
  spec->k = k;
  spec->n0 = spec->n1 = k == 3 ? 100 : 200;
  spec->lo = -2.0;
  spec->hi = 2.0;
  spec->refine = 0;
  spec->cache = nullptr;
}

rf_status rf_scan(rf_context* ctx, const rf_scan_spec* spec, rf_progress_fn progress, void* user, char** csv,
                  char** svg, int* generic_labels) {
  return guarded(ctx, [&] {
    require(spec, "spec");
    require(csv, "csv");
    *csv = nullptr;
    if (svg) *svg = nullptr;
    revfield::ScanSpec s;
    s.k = spec->k;
    s.n0 = spec->n0;
    s.n1 = spec->n1;
    s.lo = spec->lo;
    s.hi = spec->hi;
    s.refine = spec->refine != 0;
    if (spec->cache) s.cache_path = spec->cache;
    revfield::ScanProgress cb;
    if (progress) cb = [&](std::size_t d, std::size_t t) { progress(d, t, user); };
    const auto cells = revfield::stratum_scan(s, ctx->tol, cb);
    std::string table = revfield::scan_csv(cells);
    std::string map = svg ? revfield::scan_svg(s, cells) : std::string();
    *csv = dup(table);
    if (svg) *svg = dup(map);
    if (generic_labels) *generic_labels = static_cast<int>(revfield::generic_labels(cells).size());
  });
}

}  // extern "C"
