#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "twdglm/family.hpp"
#include "twdglm/links.hpp"

namespace twdglm {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  std::vector<int> vertex;
  RowMatrix X;
  RowMatrix Z;
  std::vector<std::string> x_names;
  std::vector<std::string> z_names;
  int L = 0;

  int rows() const { return static_cast<int>(y.size()); }
  int k_beta() const { return static_cast<int>(X.cols()); }
  int k_gamma() const { return static_cast<int>(Z.cols()); }

  // Shapes, vertex range, positive exposure, member support.
  void validate(const FamilySpec& spec) const;
  Dataset subset(const std::vector<int>& rows) const;
  std::vector<int> vertex_counts() const;
  // Index of a column named "(Intercept)", or -1.
  int x_intercept() const;
  int z_intercept() const;
};

struct Coefficients {
  Eigen::VectorXd beta;
  Eigen::VectorXd alpha;
  Eigen::VectorXd gamma;

  static Coefficients zeros(int k_beta, int L, int k_gamma);
  Eigen::VectorXd eta() const;
  Eigen::VectorXd theta() const;
  void set_eta(const Eigen::VectorXd& eta);
  bool finite() const;
};

enum class Curvature { Observed, Expected };

// Linear predictors.
Eigen::VectorXd mean_predictor(const Dataset& d, const Coefficients& th);
Eigen::VectorXd disp_predictor(const Dataset& d, const Coefficients& th);

// phi / w per row; false when some phi leaves (0, inf).
bool effective_dispersion(const Dataset& d, const Eigen::VectorXd& s, const FamilySpec& spec, const Links& links,
                          Eigen::VectorXd& phi_e);

// Sum over rows of log C(y, phi_e).
double normalizer_sum(const Dataset& d, const Eigen::VectorXd& phi_e, const FamilySpec& spec, int threads = 1);

// Sum over rows of D / phi_e. Returns +inf instead of throwing when a mean
// leaves the member's range, so trial steps can be rejected. D is stored
// per row when requested.
double mean_term(const Dataset& d, const Eigen::VectorXd& t, const Eigen::VectorXd& phi_e, const FamilySpec& spec,
                 const Links& links, int threads = 1, Eigen::VectorXd* D = nullptr);

double neg_log_lik(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                   int threads = 1);

struct MeanDerivatives {
  Eigen::VectorXd grad;     // length k_beta + L
  Eigen::MatrixXd H11;      // k_beta x k_beta
  Eigen::MatrixXd H12;      // k_beta x L
  Eigen::VectorXd H22;      // diagonal of the alpha block
  Eigen::MatrixXd dense() const;
};

MeanDerivatives mean_derivatives(const Dataset& d, const Coefficients& th, const Eigen::VectorXd& phi_e,
                                 const FamilySpec& spec, const Links& links, Curvature curv, int threads = 1);

struct DispDerivatives {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

// D holds y theta - kappa per row at the current mean.
DispDerivatives disp_derivatives(const Dataset& d, const Eigen::VectorXd& D, const Coefficients& th,
                                 const FamilySpec& spec, const Links& links, int threads = 1);

Eigen::VectorXd grad_mean(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                          int threads = 1);
MeanDerivatives hess_mean(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                          int threads = 1);
Eigen::VectorXd grad_disp(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                          int threads = 1);
Eigen::MatrixXd hess_disp(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                          int threads = 1);

}  // namespace twdglm
