#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "twdglm/optimizer.hpp"

namespace twdglm {

struct GridSpec {
  std::vector<double> log_lambda1;
  std::vector<double> log_lambda2;
  double train_frac = 0.6;
  std::uint64_t seed = 1;
  bool warm_start = true;

  // n evenly spaced points on [lo, hi] per axis.
  static GridSpec make(double lo1, double hi1, int n1, double lo2, double hi2, int n2);
  void validate() const;
};

struct Split {
  std::vector<int> train;
  std::vector<int> holdout;
};

Split split_rows(int n, double train_frac, std::uint64_t seed);

struct GridCell {
  double log_lambda1 = 0.0;
  double log_lambda2 = 0.0;
  double holdout_deviance = 0.0;
  bool converged = false;
  bool failed = false;
  std::string error;
  int iters = 0;
  double p_hat = 0.0;
  double objective = 0.0;
};

struct TuneResult {
  std::vector<GridCell> surface;  // traversal order
  int best = -1;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  FitResult best_fit;
  Split split;
};

// Sum of w * d(y, mu) with mu from the fitted mean predictor.
double weighted_deviance(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                         int threads = 1);
double deviance_ratio(const Dataset& validation, const Coefficients& hat, const Coefficients& oracle,
                      const FamilySpec& spec, const Links& links, int threads = 1);

// Fits every cell on `train`, warm-starting from the previous cell, and
// scores it on `holdout`.
TuneResult grid_search(const Dataset& train, const Dataset& holdout, const FamilySpec& spec, const Links& links,
                       const FitConfig& tmpl, const GridSpec& grid);
// Splits `data` by grid.seed and grid.train_frac first.
TuneResult grid_search(const Dataset& data, const FamilySpec& spec, const Links& links, const FitConfig& tmpl,
                       const GridSpec& grid);

// The ridge comparator's line: lambda2 fixed at 0.
GridSpec ridge_line(const GridSpec& grid);

}  // namespace twdglm
