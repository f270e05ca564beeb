#include "twdglm/error.hpp"

#include <cstdlib>
#include <string>

#include "twdglm/parallel.hpp"

namespace twdglm {

const char* code_name(Code c) {
  switch (c) {
    case Code::Domain: return "DOMAIN";
    case Code::Config: return "CONFIG";
    case Code::IO: return "IO";
    case Code::Schema: return "SCHEMA";
    case Code::Support: return "SUPPORT";
    case Code::Singular: return "SINGULAR";
    case Code::SeriesInfeasible: return "SERIES_INFEASIBLE";
    case Code::Calibration: return "CALIBRATION";
    case Code::Numeric: return "NUMERIC";
    case Code::InvalidArgument: return "INVALID_ARGUMENT";
    case Code::Internal: return "INTERNAL";
  }
  return "INTERNAL";
}

int default_threads() {
  const char* env = std::getenv("TWDGLM_THREADS");
  if (!env || !*env) return 1;
  try {
    std::size_t pos = 0;
    const int t = std::stoi(env, &pos);
    if (pos == std::string(env).size() && t >= 1) return t;
  } catch (...) {
  }
  throw Error(Code::Config, std::string("TWDGLM_THREADS must be a positive integer, got '") + env + "'");
}

}  // namespace twdglm
