#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "twdglm/twdglm.h"

namespace {

struct Flag {
  const char* key;
  const char* help;
};

const std::vector<Flag> kFlags = {
    {"family", "normal | poisson | cpg | gamma | inverse-gaussian"},
    {"p", "index for the compound Poisson-gamma member"},
    {"p-grid", "lo:hi:step grid for estimating the index"},
    {"mean-link", "log | identity | sqrt | inverse | inverse-squared"},
    {"disp-link", "log | identity"},
    {"penalty", "spatial | spatial+ridge"},
    {"lambda1", "ridge multiplier"},
    {"lambda2", "Laplacian multiplier"},
    {"grid", "l1lo:l1hi:n1,l2lo:l2hi:n2 over log multipliers"},
    {"graph", "edge list"},
    {"data", "CSV with y, vertex, exposure, x_*, z_*"},
    {"train-frac", "training share of the hold-out split"},
    {"seed", "random seed"},
    {"threads", "worker threads (default TWDGLM_THREADS or 1)"},
    {"out", "output directory"},
    {"approx", "series | saddlepoint"},
    {"max-block", "block size of the approximate Laplacian"},
    {"eps", "convergence tolerance on the objective"},
    {"max-iters", "outer iteration limit"},
    {"coef", "coefficients file (predict, report)"},
    {"oracle", "oracle coefficients file (report)"},
    {"surface", "deviance surface file (report)"},
    {"n", "rows to simulate"},
    {"lattice", "RxC lattice to simulate on"},
    {"pattern", "block | smooth | hotspot | gp"},
    {"zero-prop", "target share of zero responses"},
    {"amplitude", "spatial pattern amplitude"},
    {"warm-start", "1 to warm-start grid cells (default), 0 for cold starts"},
};

int fail(tw_status s, const std::string& msg) {
  std::fprintf(stderr, "error %s: %s\n", tw_status_name(s), msg.c_str());
  return static_cast<int>(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial Tweedie double GLM"};
  app.require_subcommand(1, 1);
  std::map<std::string, std::string> values;
  for (const auto& f : kFlags) app.add_option(std::string("--") + f.key, values[f.key], f.help);
  std::string config;
  app.add_option("--config", config, "key = value file; flags override it");
  bool expand = false;
  app.add_flag("--expand", expand, "expand text covariates into dummies, dropping the last level");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"simulate", "generate a synthetic dataset, graph and oracle"},
      {"fit", "fit at fixed multipliers"},
      {"tune", "hold-out grid search over the multipliers"},
      {"predict", "score rows with a coefficients file"},
      {"report", "write plot-ready tables"}};
  for (auto [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(TW_ERR_CONFIG, e.what());
  }

  tw_options* opts = nullptr;
  tw_status s = tw_options_create(&opts);
  if (s != TW_OK) return fail(s, tw_last_error());
  auto done = [&](tw_status st) {
    const int rc = st == TW_OK ? 0 : fail(st, tw_last_error());
    tw_options_destroy(opts);
    return rc;
  };
  if (!config.empty() && (s = tw_options_load(opts, config.c_str())) != TW_OK) return done(s);
  for (const auto& f : kFlags) {
    if (app.count(std::string("--") + f.key) == 0) continue;
    if ((s = tw_options_set(opts, f.key, values[f.key].c_str())) != TW_OK) return done(s);
  }
  if (expand && (s = tw_options_set(opts, "expand", "1")) != TW_OK) return done(s);

  const std::string command = app.get_subcommands().front()->get_name();
  double value = 0.0;
  s = tw_run(command.c_str(), opts, &value);
  if (s == TW_OK) std::printf("%s ok %.17g\n", command.c_str(), value);
  return done(s);
}
