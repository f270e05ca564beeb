#pragma once

#include <stdexcept>
#include <string>

namespace twdglm {

enum class Code {
  Domain,
  Config,
  IO,
  Schema,
  Support,
  Singular,
  SeriesInfeasible,
  Calibration,
  Numeric,
  InvalidArgument,
  Internal
};

const char* code_name(Code c);

class Error : public std::runtime_error {
 public:
  Error(Code code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

}  // namespace twdglm
