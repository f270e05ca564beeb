#include "twdglm/twdglm.h"

#include <algorithm>
#include <cstring>
#include <new>
#include <string>

#include "twdglm/error.hpp"
#include "twdglm/inference.hpp"
#include "twdglm/io.hpp"
#include "twdglm/simgen.hpp"
#include "twdglm/workflow.hpp"

struct tw_options {
  twdglm::Options o;
};
struct tw_graph {
  twdglm::ArealGraph g;
};
struct tw_dataset {
  twdglm::Dataset d;
};
struct tw_fit {
  twdglm::FitResult f;
};

namespace {

thread_local std::string g_last_error;

tw_status status_of(twdglm::Code c) {
  using twdglm::Code;
  switch (c) {
    case Code::Domain: return TW_ERR_DOMAIN;
    case Code::Config: return TW_ERR_CONFIG;
    case Code::IO: return TW_ERR_IO;
    case Code::Schema: return TW_ERR_SCHEMA;
    case Code::Support: return TW_ERR_SUPPORT;
    case Code::Singular: return TW_ERR_SINGULAR;
    case Code::SeriesInfeasible: return TW_ERR_SERIES_INFEASIBLE;
    case Code::Calibration: return TW_ERR_CALIBRATION;
    case Code::Numeric: return TW_ERR_NUMERIC;
    case Code::InvalidArgument: return TW_ERR_INVALID_ARGUMENT;
    case Code::Internal: return TW_ERR_INTERNAL;
  }
  return TW_ERR_INTERNAL;
}

template <class F>
tw_status guard(F&& f) {
  try {
    f();
    g_last_error.clear();
    return TW_OK;
  } catch (const twdglm::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return TW_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return TW_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) throw twdglm::Error(twdglm::Code::InvalidArgument, std::string(what) + " is null");
}

twdglm::FamilySpec family_arg(const char* family, double p) {
  need(family, "family");
  twdglm::FamilySpec s = twdglm::FamilySpec::of(twdglm::parse_member(family), p);
  s.validate();
  return s;
}

}  // namespace

extern "C" {

const char* tw_status_name(tw_status s) {
  switch (s) {
    case TW_OK: return "OK";
    case TW_ERR_DOMAIN: return "DOMAIN";
    case TW_ERR_CONFIG: return "CONFIG";
    case TW_ERR_IO: return "IO";
    case TW_ERR_SCHEMA: return "SCHEMA";
    case TW_ERR_SUPPORT: return "SUPPORT";
    case TW_ERR_SINGULAR: return "SINGULAR";
    case TW_ERR_SERIES_INFEASIBLE: return "SERIES_INFEASIBLE";
    case TW_ERR_CALIBRATION: return "CALIBRATION";
    case TW_ERR_NUMERIC: return "NUMERIC";
    case TW_ERR_INVALID_ARGUMENT: return "INVALID_ARGUMENT";
    case TW_ERR_INTERNAL: return "INTERNAL";
  }
  return "UNKNOWN";
}

const char* tw_last_error(void) { return g_last_error.c_str(); }

const char* tw_version(void) { return "0.1.0"; }

tw_status tw_options_create(tw_options** out) {
  return guard([&] {
    need(out, "out");
    *out = new tw_options();
  });
}

void tw_options_destroy(tw_options* o) { delete o; }

tw_status tw_options_set(tw_options* o, const char* key, const char* value) {
  return guard([&] {
    need(o, "options");
    need(key, "key");
    need(value, "value");
    o->o.set(key, value);
  });
}

tw_status tw_options_load(tw_options* o, const char* path) {
  return guard([&] {
    need(o, "options");
    need(path, "path");
    o->o.load_file(path);
  });
}

tw_status tw_options_dump(const tw_options* o, char* buf, size_t cap, size_t* needed) {
  return guard([&] {
    need(o, "options");
    const std::string s = o->o.to_string();
    if (needed) *needed = s.size() + 1;
    if (buf && cap > 0) {
      const size_t k = std::min(cap - 1, s.size());
      std::memcpy(buf, s.data(), k);
      buf[k] = '\0';
    }
  });
}

tw_status tw_run(const char* command, const tw_options* o, double* value) {
  return guard([&] {
    need(command, "command");
    need(o, "options");
    const double v = twdglm::run_command(command, o->o);
    if (value) *value = v;
  });
}

tw_status tw_graph_load(const char* path, tw_graph** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = new tw_graph{twdglm::load_graph(path)};
  });
}

tw_status tw_graph_lattice(int rows, int cols, tw_graph** out) {
  return guard([&] {
    need(out, "out");
    if (rows < 1 || cols < 1) throw twdglm::Error(twdglm::Code::InvalidArgument, "lattice dimensions must be positive");
    *out = new tw_graph{twdglm::make_lattice(rows, cols)};
  });
}

int tw_graph_size(const tw_graph* g) { return g ? g->g.size() : 0; }

void tw_graph_destroy(tw_graph* g) { delete g; }

tw_status tw_dataset_load(const char* path, const tw_graph* g, const tw_options* o, tw_dataset** out) {
  return guard([&] {
    need(path, "path");
    need(g, "graph");
    need(o, "options");
    need(out, "out");
    const twdglm::FamilySpec spec = twdglm::family_from(o->o);
    *out = new tw_dataset{twdglm::load_dataset(path, g->g, spec, o->o.get_bool("expand", false))};
  });
}

int tw_dataset_rows(const tw_dataset* d) { return d ? d->d.rows() : 0; }

void tw_dataset_destroy(tw_dataset* d) { delete d; }

tw_status tw_fit_run(const tw_dataset* d, const tw_graph* g, const tw_options* o, tw_fit** out) {
  return guard([&] {
    need(d, "dataset");
    need(g, "graph");
    need(o, "options");
    need(out, "out");
    const twdglm::FamilySpec spec = twdglm::family_from(o->o);
    const twdglm::Links links = twdglm::links_from(o->o, spec);
    const twdglm::FitConfig cfg = twdglm::fit_config_from(o->o, spec, d->d, g->g);
    *out = new tw_fit{twdglm::fit(d->d, spec, links, cfg)};
  });
}

double tw_fit_objective(const tw_fit* f) { return f ? f->f.objective : 0.0; }
double tw_fit_p_hat(const tw_fit* f) { return f ? f->f.p_hat : 0.0; }
int tw_fit_iterations(const tw_fit* f) { return f ? f->f.iters : 0; }
int tw_fit_converged(const tw_fit* f) { return f && f->f.converged ? 1 : 0; }

tw_status tw_fit_coefficients(const tw_fit* f, int block, double* buf, size_t cap, size_t* n) {
  return guard([&] {
    need(f, "fit");
    const Eigen::VectorXd* v = block == 0 ? &f->f.theta.beta : block == 1 ? &f->f.theta.alpha
                             : block == 2 ? &f->f.theta.gamma : nullptr;
    if (!v) throw twdglm::Error(twdglm::Code::InvalidArgument, "block must be 0, 1 or 2");
    const size_t len = static_cast<size_t>(v->size());
    if (n) *n = len;
    if (buf) {
      if (cap < len) throw twdglm::Error(twdglm::Code::InvalidArgument, "buffer too small");
      std::memcpy(buf, v->data(), len * sizeof(double));
    }
  });
}

tw_status tw_fit_deviance(const tw_fit* f, const tw_dataset* d, double* out) {
  return guard([&] {
    need(f, "fit");
    need(d, "dataset");
    need(out, "out");
    *out = twdglm::weighted_deviance(d->d, f->f.theta, f->f.spec, f->f.links);
  });
}

void tw_fit_destroy(tw_fit* f) { delete f; }

tw_status tw_log_density(const char* family, double p, double y, double mu, double phi, double* out) {
  return guard([&] {
    need(out, "out");
    *out = twdglm::log_density(family_arg(family, p), y, mu, phi);
  });
}

tw_status tw_unit_deviance(const char* family, double p, double y, double mu, double* out) {
  return guard([&] {
    need(out, "out");
    *out = twdglm::unit_deviance(family_arg(family, p), y, mu);
  });
}

double tw_wald_p_value(double z) { return twdglm::wald_p_value(z); }

}  // extern "C"
