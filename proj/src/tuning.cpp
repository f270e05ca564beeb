#include "twdglm/tuning.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <thread>

#include "twdglm/error.hpp"
#include "twdglm/parallel.hpp"

namespace twdglm {

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw Error(Code::Config, "grid resolution must be at least 1");
  if (n == 1) return {lo};
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
  return v;
}

struct CellOutcome {
  GridCell cell;
  std::optional<FitResult> fit;
};

CellOutcome run_cell(const Dataset& train, const Dataset& holdout, const FamilySpec& spec, const Links& links,
                     const FitConfig& tmpl, double l1, double l2, const std::optional<Coefficients>& init) {
  CellOutcome out;
  out.cell.log_lambda1 = l1;
  out.cell.log_lambda2 = l2;
  try {
    FitConfig cfg = tmpl;
    cfg.penalty = with_multipliers(tmpl.penalty, std::exp(l1), std::exp(l2));
    FitResult f = fit(train, spec, links, cfg, init);
    const double dev = weighted_deviance(holdout, f.theta, f.spec, links, tmpl.threads);
    if (!std::isfinite(dev)) throw Error(Code::Numeric, "hold-out deviance is not finite");
    out.cell.holdout_deviance = dev;
    out.cell.converged = f.converged;
    out.cell.iters = f.iters;
    out.cell.p_hat = f.p_hat;
    out.cell.objective = f.objective;
    out.fit = std::move(f);
  } catch (const Error& e) {
    out.cell.failed = true;
    out.cell.error = std::string(code_name(e.code())) + ": " + e.what();
    out.cell.holdout_deviance = std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace

GridSpec GridSpec::make(double lo1, double hi1, int n1, double lo2, double hi2, int n2) {
  GridSpec g;
  g.log_lambda1 = linspace(lo1, hi1, n1);
  g.log_lambda2 = linspace(lo2, hi2, n2);
  return g;
}

void GridSpec::validate() const {
  if (log_lambda1.empty() || log_lambda2.empty()) throw Error(Code::Config, "tuning grid is empty");
  auto ascending = [](const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
      if (!(v[i] > v[i - 1])) return false;
    return true;
  };
  if (!ascending(log_lambda1) || !ascending(log_lambda2))
    throw Error(Code::Config, "tuning grid axes must be strictly ascending");
  for (double v : log_lambda1)
    if (!std::isfinite(v)) throw Error(Code::Config, "log lambda1 values must be finite");
  for (double v : log_lambda2)
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity())
      throw Error(Code::Config, "log lambda2 values must be below +inf");
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw Error(Code::Config, "train fraction must lie in (0, 1)");
}

GridSpec ridge_line(const GridSpec& grid) {
  GridSpec g = grid;
  g.log_lambda2 = {-std::numeric_limits<double>::infinity()};
  return g;
}

Split split_rows(int n, double train_frac, std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) throw Error(Code::Config, "train fraction must lie in (0, 1)");
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  const int ntr = static_cast<int>(std::lround(train_frac * n));
  if (ntr < 1 || ntr >= n) throw Error(Code::Config, "split leaves an empty training or hold-out set");
  Split s;
  s.train.assign(idx.begin(), idx.begin() + ntr);
  s.holdout.assign(idx.begin() + ntr, idx.end());
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.holdout.begin(), s.holdout.end());
  return s;
}

double weighted_deviance(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                         int threads) {
  const Eigen::VectorXd t = mean_predictor(d, th);
  return chunked_reduce(
      static_cast<std::size_t>(d.rows()), threads, 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
          if (!link_domain_ok(links.mean, t[i]))
            throw Error(Code::Domain, "mean predictor outside the link's range (row " + std::to_string(i + 1) + ")");
          acc += d.w[i] * unit_deviance(spec, d.y[i], link_eval(links.mean, t[i], 0));
        }
        return acc;
      },
      [](double a, double b) { return a + b; });
}

double deviance_ratio(const Dataset& validation, const Coefficients& hat, const Coefficients& oracle,
                      const FamilySpec& spec, const Links& links, int threads) {
  const double den = weighted_deviance(validation, oracle, spec, links, threads);
  if (!(den > 0.0)) throw Error(Code::Numeric, "oracle deviance is zero");
  return weighted_deviance(validation, hat, spec, links, threads) / den;
}

TuneResult grid_search(const Dataset& train, const Dataset& holdout, const FamilySpec& spec, const Links& links,
                       const FitConfig& tmpl, const GridSpec& grid) {
  grid.validate();
  const int n1 = static_cast<int>(grid.log_lambda1.size());
  const int n2 = static_cast<int>(grid.log_lambda2.size());
  const int ncell = n1 * n2;
  TuneResult res;
  res.surface.resize(ncell);
  std::vector<std::optional<FitResult>> fits(ncell);

  if (grid.warm_start) {
    std::optional<Coefficients> init;
    FamilySpec sp = spec;
    for (int c = 0; c < ncell; ++c) {
      CellOutcome o = run_cell(train, holdout, sp, links, tmpl, grid.log_lambda1[c / n2], grid.log_lambda2[c % n2], init);
      if (o.fit) {
        init = o.fit->theta;
        sp.p = o.fit->p_hat;
      }
      res.surface[c] = std::move(o.cell);
      fits[c] = std::move(o.fit);
    }
  } else {
    const int nt = std::clamp(tmpl.threads, 1, ncell);
    FitConfig inner = tmpl;
    if (nt > 1) inner.threads = 1;
    std::atomic<int> next{0};
    auto worker = [&] {
      for (int c = next++; c < ncell; c = next++) {
        CellOutcome o =
            run_cell(train, holdout, spec, links, inner, grid.log_lambda1[c / n2], grid.log_lambda2[c % n2], std::nullopt);
        res.surface[c] = std::move(o.cell);
        fits[c] = std::move(o.fit);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
  }

  for (int c = 0; c < ncell; ++c) {
    const GridCell& g = res.surface[c];
    if (g.failed) continue;
    if (res.best < 0 || g.holdout_deviance < res.surface[res.best].holdout_deviance) res.best = c;
  }
  if (res.best < 0) {
    std::string why = res.surface.front().error;
    throw Error(Code::Numeric, "every grid cell failed; first: " + why);
  }
  res.lambda1 = std::exp(res.surface[res.best].log_lambda1);
  res.lambda2 = std::exp(res.surface[res.best].log_lambda2);
  res.best_fit = std::move(*fits[res.best]);
  return res;
}

TuneResult grid_search(const Dataset& data, const FamilySpec& spec, const Links& links, const FitConfig& tmpl,
                       const GridSpec& grid) {
  grid.validate();
  Split s = split_rows(data.rows(), grid.train_frac, grid.seed);
  TuneResult r = grid_search(data.subset(s.train), data.subset(s.holdout), spec, links, tmpl, grid);
  r.split = std::move(s);
  return r;
}

}  // namespace twdglm
