#include "revfield/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "revfield/error.hpp"

namespace revfield {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::Validation: return "validation";
    case ErrorCode::Capacity: return "capacity";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::Numeric: return "numeric";
    case ErrorCode::NearBifurcation: return "near-bifurcation";
    case ErrorCode::Consistency: return "consistency";
    case ErrorCode::Solver: return "solver";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\"'");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\"'");
  return s.substr(first, last - first + 1);
}

double parse_double(std::string_view key, std::string_view text) {
  // std::from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end)
    fail(ErrorCode::Validation, "config: cannot parse value for '" + std::string(key) + "'");
  return value;
}

}  // namespace

void Tolerances::set(std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  const double v = parse_double(key, value);
  auto positive = [&](double x) {
    if (!(x > 0.0)) fail(ErrorCode::Validation, "config: '" + std::string(key) + "' must be positive");
    return x;
  };
  if (key == "r_inf_factor") r_inf_factor = positive(v);
  else if (key == "land_factor") land_factor = positive(v);
  else if (key == "axis_tol") axis_tol = positive(v);
  else if (key == "rtol") rtol = positive(v);
  else if (key == "tol_eig_factor") tol_eig_factor = positive(v);
  else if (key == "multiple_root_sep") multiple_root_sep = positive(v);
  else if (key == "max_arc_factor") max_arc_factor = positive(v);
  else if (key == "residue_check") residue_check = positive(v);
  else if (key == "solver_tol") solver_tol = positive(v);
  else if (key == "scan_margin") scan_margin = positive(v);
  else if (key == "max_k") max_k = static_cast<int>(positive(v));
  else if (key == "max_steps") max_steps = static_cast<int>(positive(v));
  else fail(ErrorCode::Validation, "config: unknown key '" + std::string(key) + "'");
}

Tolerances Tolerances::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "config: cannot open '" + path + "'");
  Tolerances tol;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    if (trim(view).empty()) continue;
    // Section headers are accepted and ignored.
    if (trim(view).front() == '[') continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorCode::Validation, "config: line " + std::to_string(lineno) + " is not key = value");
    tol.set(view.substr(0, eq), view.substr(eq + 1));
  }
  return tol;
}

Tolerances Tolerances::from_environment() {
  if (const char* path = std::getenv("REVFIELD_CONFIG"); path != nullptr && *path != '\0')
    return from_file(path);
  return {};
}

std::string Tolerances::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << "r_inf_factor=" << r_inf_factor << ";land_factor=" << land_factor << ";axis_tol=" << axis_tol
     << ";rtol=" << rtol << ";tol_eig_factor=" << tol_eig_factor << ";multiple_root_sep=" << multiple_root_sep
     << ";max_arc_factor=" << max_arc_factor << ";scan_margin=" << scan_margin;
  return os.str();
}

}  // namespace revfield
