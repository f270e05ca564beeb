#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "twdglm/graph.hpp"
#include "twdglm/likelihood.hpp"

namespace twdglm {

struct FitConfig {
  PenaltyConfig penalty;
  // Candidate index values for the compound Poisson-gamma member. Empty
  // keeps spec.p fixed.
  std::vector<double> p_grid;
  double eps_converge = 1e-8;
  int max_iters = 200;
  double c_growth = 2.0;
  int max_doublings = 60;
  bool use_block_solve = false;
  // Pseudo-inverse mean solves for the unpenalized and ridge comparators,
  // where the intercept and the spatial effects are confounded.
  bool allow_rank_deficient = false;
  int threads = 1;

  void validate(const FamilySpec& spec) const;
};

std::vector<double> make_p_grid(double lo, double hi, double step);
std::vector<double> default_p_grid();

struct IterationRecord {
  int iter = 0;
  double F_start = 0.0;
  double F_mean = 0.0;  // after the mean step
  double F_disp = 0.0;  // after the dispersion step
  double F_end = 0.0;   // after the index step
  double c1 = 1.0;
  double c2 = 1.0;
  double p = 0.0;
  double dalpha_sq = 0.0;  // ||alpha* - alpha||^2 of the mean step
  double deta_sq = 0.0;    // ||eta* - eta||^2 of the mean step
  double dtheta_sq = 0.0;  // ||Theta* - Theta||^2 over the whole iteration
  bool mean_expected = false;
  bool disp_clamped = false;
};

struct FitResult {
  Coefficients theta;
  double p_hat = 0.0;
  FamilySpec spec;  // spec with p = p_hat
  Links links;
  std::vector<double> objective_trace;  // F at the start, then after each iteration
  std::vector<IterationRecord> history;
  int iters = 0;
  bool converged = false;
  double c1_final = 1.0;
  double c2_final = 1.0;
  double objective = 0.0;
  double neg_log_lik = 0.0;
};

// Linear system of the mean step in partitioned form:
// [A11 A12; A12' A22] delta = rhs, A22 = l1 I + l2 W + c diag(H22).
struct MeanSystem {
  Eigen::MatrixXd A11;
  Eigen::MatrixXd A12;
  SpMat A22;
  Eigen::VectorXd rhs;
  std::vector<std::vector<int>> blocks;  // vertex groups with A22 block-diagonal over them

  Eigen::MatrixXd dense() const;
};

enum class SolveStatus { Ok, NotPositiveDefinite };

Eigen::VectorXd solve_dense(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs, bool allow_rank_deficient,
                            SolveStatus& status);
// Schur complement solve over the alpha blocks.
Eigen::VectorXd solve_block(const MeanSystem& sys, SolveStatus& status);

MeanSystem build_mean_system(const MeanDerivatives& der, const Coefficients& th, const PenaltyConfig& pen, double c);

Coefficients default_init(const Dataset& d, const FamilySpec& spec, const Links& links);

double objective(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                 const PenaltyConfig& pen, int threads = 1);

// eta* for a fixed scaling c1 with observed curvature.
Eigen::VectorXd solve_mean_step(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                                const FitConfig& cfg, double c1);
// gamma* for a fixed scaling c2 at the given (eta*, gamma).
Eigen::VectorXd solve_disp_step(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                                const FitConfig& cfg, double c2);

enum class StepKind { Mean, Dispersion };

struct ScalingOutcome {
  double c = 1.0;
  Coefficients theta;
  double F_before = 0.0;
  double F_after = 0.0;
  bool expected_curvature = false;  // mean step fell back to expected information
  bool clamped = false;             // dispersion Hessian eigenvalues were clamped
  bool zero_step = false;
};

ScalingOutcome choose_scaling(StepKind kind, const Dataset& d, const Coefficients& th, const FamilySpec& spec,
                              const Links& links, const FitConfig& cfg);

double update_index(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                    const std::vector<double>& p_grid, int threads = 1);

FitResult fit(const Dataset& d, const FamilySpec& spec, const Links& links, const FitConfig& cfg,
              const std::optional<Coefficients>& init = std::nullopt);
FitResult fit_unpenalized(const Dataset& d, const FamilySpec& spec, const Links& links, const FitConfig& base,
                          const std::optional<Coefficients>& init = std::nullopt);
FitResult fit_ridge(const Dataset& d, const FamilySpec& spec, const Links& links, const FitConfig& base,
                    double lambda1, const std::optional<Coefficients>& init = std::nullopt);

}  // namespace twdglm
