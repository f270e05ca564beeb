#include "twdglm/workflow.hpp"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <regex>
#include <sstream>

#include "twdglm/error.hpp"
#include "twdglm/inference.hpp"
#include "twdglm/io.hpp"
#include "twdglm/simgen.hpp"
#include "util.hpp"

namespace twdglm {

namespace fs = std::filesystem;

namespace {

std::string require(const Options& o, const std::string& key) {
  if (!o.has(key) || o.get(key).empty()) throw Error(Code::Config, "missing required option --" + key);
  return o.get(key);
}

std::string require_file(const Options& o, const std::string& key) {
  const std::string p = require(o, key);
  if (!fs::is_regular_file(p)) throw Error(Code::IO, "--" + key + ": no such file '" + p + "'");
  return p;
}

std::string prepare_out(const Options& o) {
  const std::string dir = require(o, "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(Code::IO, "--out: cannot create directory '" + dir + "'");
  return dir;
}

std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

class Summary {
 public:
  template <class T>
  void add(const std::string& k, const T& v) {
    if constexpr (std::is_floating_point_v<T>)
      s_ << k << '\t' << fmt_double(v) << '\n';
    else
      s_ << k << '\t' << v << '\n';
  }
  std::string str() const { return s_.str(); }

 private:
  std::ostringstream s_;
};

void add_alpha(Summary& s, const Eigen::VectorXd& alpha) {
  const AlphaSummary a = summarize_alpha(alpha);
  s.add("alpha_mean", a.mean);
  s.add("alpha_median", a.median);
  s.add("alpha_sd", a.sd);
  s.add("alpha_min", a.min);
  s.add("alpha_max", a.max);
  s.add("alpha_range", a.range);
}

CoefFile coef_file(const FitResult& f, const Dataset& d, const ArealGraph& g) {
  CoefFile c;
  c.spec = f.spec;
  c.links = f.links;
  c.theta = f.theta;
  c.x_names = d.x_names;
  c.z_names = d.z_names;
  c.alpha_labels = g.labels();
  return c;
}

// Coefficients, Wald tables, trace and summary for one fit.
void write_fit_outputs(const std::string& dir, const FitResult& f, const Dataset& d, const ArealGraph& g,
                       const FitConfig& cfg, Summary& s) {
  write_coefficients(path_in(dir, "coefficients.tsv"), coef_file(f, d, g));
  write_trace(path_in(dir, "trace.tsv"), f);
  s.add("family", member_name(f.spec.member));
  s.add("p_hat", f.p_hat);
  s.add("mean_link", link_name(f.links.mean));
  s.add("disp_link", link_name(f.links.disp));
  s.add("penalty", penalty_mode_name(cfg.penalty.mode));
  s.add("lambda1", cfg.penalty.lambda1);
  s.add("lambda2", cfg.penalty.lambda2);
  s.add("rows", d.rows());
  s.add("vertices", d.L);
  s.add("iterations", f.iters);
  s.add("converged", f.converged ? 1 : 0);
  s.add("objective", f.objective);
  s.add("neg_log_lik", f.neg_log_lik);
  add_alpha(s, f.theta.alpha);

  const Eigen::MatrixXd info = fisher_information(d, f.theta, f.spec, f.links, cfg.threads);
  const std::vector<WaldRow> rows = wald_table(d, f.theta, info);
  std::vector<WaldRow> mean, disp;
  for (const auto& r : rows) (r.block == "mean" ? mean : disp).push_back(r);
  write_wald(path_in(dir, "wald_mean.tsv"), mean);
  write_wald(path_in(dir, "wald_dispersion.tsv"), disp);
}

void echo_config(const std::string& dir, const Options& o) { write_text(path_in(dir, "config.txt"), o.to_string()); }

double cmd_simulate(const Options& o) {
  const std::string dir = prepare_out(o);
  SimConfig c;
  c.n = o.get_int("n", 10000);
  const auto [r, k] = parse_lattice(o.get("lattice", "5x5"));
  c.pattern.rows = r;
  c.pattern.cols = k;
  c.pattern.kind = parse_pattern(o.get("pattern", "block"));
  c.pattern.amplitude = o.get_double("amplitude", 1.0);
  c.p = o.get_double("p", 1.5);
  c.target_zero_prop = o.get_double("zero-prop", 0.15);
  c.seed = o.get_seed("seed", 1);
  const SimResult sim = make_dataset(c);

  write_dataset(path_in(dir, "data.csv"), sim.data, sim.graph);
  write_graph(path_in(dir, "graph.tsv"), sim.graph);
  CoefFile oc;
  oc.spec = FamilySpec::of(Member::CompoundPoissonGamma, c.p);
  oc.theta = sim.oracle;
  oc.x_names = sim.data.x_names;
  oc.z_names = sim.data.z_names;
  oc.alpha_labels = sim.graph.labels();
  write_coefficients(path_in(dir, "oracle.tsv"), oc);
  Summary s;
  s.add("command", "simulate");
  s.add("rows", c.n);
  s.add("lattice", std::to_string(r) + "x" + std::to_string(k));
  s.add("pattern", pattern_name(c.pattern.kind));
  s.add("p", c.p);
  s.add("intercept", sim.intercept);
  s.add("target_zero_prop", c.target_zero_prop);
  s.add("expected_zero_prop", sim.expected_zero_prop);
  s.add("realized_zero_prop", sim.realized_zero_prop);
  write_text(path_in(dir, "summary.txt"), s.str());
  echo_config(dir, o);
  return sim.realized_zero_prop;
}

double cmd_fit(const Options& o) {
  const std::string gpath = require_file(o, "graph");
  const std::string dpath = require_file(o, "data");
  const std::string dir = prepare_out(o);
  const FamilySpec spec = family_from(o);
  const Links links = links_from(o, spec);
  const ArealGraph g = load_graph(gpath);
  const Dataset d = load_dataset(dpath, g, spec, o.get_bool("expand", false));
  const FitConfig cfg = fit_config_from(o, spec, d, g);
  const FitResult f = fit(d, spec, links, cfg);
  Summary s;
  s.add("command", "fit");
  write_fit_outputs(dir, f, d, g, cfg, s);
  write_text(path_in(dir, "summary.txt"), s.str());
  echo_config(dir, o);
  return f.objective;
}

double cmd_tune(const Options& o) {
  const std::string gpath = require_file(o, "graph");
  const std::string dpath = require_file(o, "data");
  const std::string dir = prepare_out(o);
  const FamilySpec spec = family_from(o);
  const Links links = links_from(o, spec);
  const ArealGraph g = load_graph(gpath);
  const CsvTable table = read_csv(dpath);
  const Dataset d = dataset_from_table(table, g, spec, o.get_bool("expand", false));
  GridSpec grid = parse_grid(o.get("grid", "-5:5:20,-5:5:20"));
  grid.train_frac = o.get_double("train-frac", 0.6);
  grid.seed = o.get_seed("seed", 1);
  grid.warm_start = o.get_bool("warm-start", true);
  FitConfig cfg = fit_config_from(o, spec, d, g);
  const TuneResult t = grid_search(d, spec, links, cfg, grid);

  write_surface(path_in(dir, "surface.tsv"), t.surface);
  write_csv_rows(path_in(dir, "holdout.csv"), table, t.split.holdout);
  write_csv_rows(path_in(dir, "train.csv"), table, t.split.train);
  const GridCell& best = t.surface[t.best];
  Summary s;
  s.add("command", "tune");
  s.add("cells", static_cast<int>(t.surface.size()));
  int failed = 0;
  for (const auto& c : t.surface) failed += c.failed;
  s.add("cells_failed", failed);
  s.add("train_rows", static_cast<int>(t.split.train.size()));
  s.add("holdout_rows", static_cast<int>(t.split.holdout.size()));
  s.add("best_log_lambda1", best.log_lambda1);
  s.add("best_log_lambda2", best.log_lambda2);
  s.add("holdout_deviance", best.holdout_deviance);
  cfg.penalty = with_multipliers(cfg.penalty, t.lambda1, t.lambda2);
  write_fit_outputs(dir, t.best_fit, d.subset(t.split.train), g, cfg, s);
  write_text(path_in(dir, "summary.txt"), s.str());
  echo_config(dir, o);
  return best.holdout_deviance;
}

double cmd_predict(const Options& o) {
  const std::string cpath = require_file(o, "coef");
  const std::string dpath = require_file(o, "data");
  const std::string dir = prepare_out(o);
  const CoefFile c = read_coefficients(cpath);
  // Vertex indices follow the fitted alpha order.
  ArealGraph g;
  for (const auto& l : c.alpha_labels) g.add_vertex(l);
  if (g.size() != static_cast<int>(c.alpha_labels.size()))
    throw Error(Code::Schema, cpath + ": duplicate vertex labels in the alpha block");
  const DesignLayout layout{c.x_names, c.z_names};
  const Dataset d = load_dataset(dpath, g, c.spec, false, &layout);
  const int threads = resolve_threads(o);

  const Eigen::VectorXd t = mean_predictor(d, c.theta);
  const Eigen::VectorXd s = disp_predictor(d, c.theta);
  std::ostringstream out;
  out << "row\tvertex\texposure\tmu\tphi\texpected_per_exposure\texpected_total\tdeviance\n";
  for (int i = 0; i < d.rows(); ++i) {
    if (!link_domain_ok(c.links.mean, t[i]))
      throw Error(Code::Domain, "mean predictor outside the link's range (row " + std::to_string(i + 1) + ")");
    const double mu = link_eval(c.links.mean, t[i], 0);
    const double phi = has_dispersion(c.spec.member) ? link_eval(c.links.disp, s[i], 0) : 1.0;
    out << i + 1 << '\t' << g.labels()[d.vertex[i]] << '\t' << fmt_double(d.w[i]) << '\t' << fmt_double(mu) << '\t'
        << fmt_double(phi) << '\t' << fmt_double(mu) << '\t' << fmt_double(d.w[i] * mu) << '\t'
        << fmt_double(d.w[i] * unit_deviance(c.spec, d.y[i], mu)) << '\n';
  }
  write_text(path_in(dir, "predictions.tsv"), out.str());
  const double total = weighted_deviance(d, c.theta, c.spec, c.links, threads);
  Summary sm;
  sm.add("command", "predict");
  sm.add("rows", d.rows());
  sm.add("total_deviance", total);
  write_text(path_in(dir, "summary.txt"), sm.str());
  echo_config(dir, o);
  return total;
}

double cmd_report(const Options& o) {
  const std::string cpath = require_file(o, "coef");
  const std::string dir = prepare_out(o);
  const CoefFile c = read_coefficients(cpath);
  std::optional<CoefFile> oracle;
  if (o.has("oracle")) {
    oracle = read_coefficients(require_file(o, "oracle"));
    if (oracle->alpha_labels != c.alpha_labels)
      throw Error(Code::Schema, "oracle and fitted alpha blocks have different vertices");
  }
  const std::regex lattice_label(R"(r(\d+)c(\d+))");
  std::ostringstream a;
  a << "vertex\trow\tcol\talpha_hat" << (oracle ? "\talpha_oracle" : "") << '\n';
  for (std::size_t v = 0; v < c.alpha_labels.size(); ++v) {
    std::smatch m;
    const std::string& l = c.alpha_labels[v];
    const bool grid = std::regex_match(l, m, lattice_label);
    a << l << '\t' << (grid ? m[1].str() : "") << '\t' << (grid ? m[2].str() : "") << '\t'
      << fmt_double(c.theta.alpha[v]);
    if (oracle) a << '\t' << fmt_double(oracle->theta.alpha[v]);
    a << '\n';
  }
  write_text(path_in(dir, "alpha_compare.tsv"), a.str());

  Summary s;
  s.add("command", "report");
  add_alpha(s, c.theta.alpha);
  double headline = 0.0;
  if (oracle) {
    if (oracle->x_names == c.x_names && oracle->z_names == c.z_names) {
      const SSE e = sse(oracle->theta, c.theta);
      s.add("sse_total", e.total);
      s.add("sse_mean", e.mean_part);
      s.add("sse_spatial", e.spatial_part);
      s.add("sse_dispersion", e.disp_part);
    } else {
      s.add("sse_spatial", (oracle->theta.alpha - c.theta.alpha).squaredNorm());
    }
    headline = (oracle->theta.alpha - c.theta.alpha).squaredNorm();
  }
  if (o.has("surface")) {
    const std::vector<GridCell> surf = read_surface(require_file(o, "surface"));
    std::vector<double> l1, l2;
    for (const auto& cell : surf) {
      if (std::find(l1.begin(), l1.end(), cell.log_lambda1) == l1.end()) l1.push_back(cell.log_lambda1);
      if (std::find(l2.begin(), l2.end(), cell.log_lambda2) == l2.end()) l2.push_back(cell.log_lambda2);
    }
    std::ostringstream g;
    g << "log_lambda1";
    for (double v : l2) g << '\t' << fmt_double(v);
    g << '\n';
    for (double u : l1) {
      g << fmt_double(u);
      for (double v : l2) {
        std::string cellv = "nan";
        for (const auto& cell : surf)
          if (cell.log_lambda1 == u && cell.log_lambda2 == v && !cell.failed) cellv = fmt_double(cell.holdout_deviance);
        g << '\t' << cellv;
      }
      g << '\n';
    }
    write_text(path_in(dir, "surface_grid.tsv"), g.str());
    s.add("surface_cells", static_cast<int>(surf.size()));
  }
  write_text(path_in(dir, "summary.txt"), s.str());
  echo_config(dir, o);
  return headline;
}

}  // namespace

double run_command(const std::string& command, const Options& o) {
  if (command == "simulate") return cmd_simulate(o);
  if (command == "fit") return cmd_fit(o);
  if (command == "tune") return cmd_tune(o);
  if (command == "predict") return cmd_predict(o);
  if (command == "report") return cmd_report(o);
  throw Error(Code::Config, "unknown command '" + command + "' (use simulate, fit, tune, predict or report)");
}

}  // namespace twdglm
