#pragma once

#include <stdexcept>
#include <string>

namespace revfield {

enum class ErrorCode {
  Validation,       // malformed input (bad map length, bad path, bad eps)
  Capacity,         // request exceeds a configured maximum
  Domain,           // input outside the mathematical domain of the operation
  Numeric,          // root refinement / integration / cross-check failure
  NearBifurcation,  // a trajectory could not be resolved
  Consistency,      // internal invariant violated (ambiguous pairing, slot mismatch)
  Solver,           // realization did not converge
  Io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace revfield
