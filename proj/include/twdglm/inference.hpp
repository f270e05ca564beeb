#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "twdglm/likelihood.hpp"

namespace twdglm {

// Observed information over Theta = (beta, alpha, gamma); the
// mean-dispersion cross block is zero.
Eigen::MatrixXd fisher_information(const Dataset& d, const Coefficients& th, const FamilySpec& spec,
                                   const Links& links, int threads = 1);

// 1 - Phi(|z|).
double wald_p_value(double z);

struct WaldRow {
  std::string name;
  std::string effect;  // name up to '=' when the column is a dummy
  std::string level;
  std::string block;  // "mean" or "dispersion"
  double estimate = 0.0;
  double std_error = 0.0;
  double z = 0.0;
  double p_value = 0.0;
};

// Rows for beta then gamma, from the inverse of the (beta, gamma) sub-block.
std::vector<WaldRow> wald_table(const Dataset& d, const Coefficients& th, const Eigen::MatrixXd& info);

struct AlphaSummary {
  double mean = 0.0;
  double median = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double max = 0.0;
  double range = 0.0;
};

AlphaSummary summarize_alpha(const Eigen::VectorXd& alpha);

}  // namespace twdglm
