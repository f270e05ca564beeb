#include "twdglm/inference.hpp"

#include <algorithm>
#include <cmath>

#include "twdglm/error.hpp"
#include "util.hpp"

namespace twdglm {

Eigen::MatrixXd fisher_information(const Dataset& d, const Coefficients& th, const FamilySpec& spec,
                                   const Links& links, int threads) {
  const int kb = d.k_beta(), L = d.L, kg = d.k_gamma();
  Eigen::MatrixXd I = Eigen::MatrixXd::Zero(kb + L + kg, kb + L + kg);
  I.topLeftCorner(kb + L, kb + L) = hess_mean(d, th, spec, links, threads).dense();
  if (kg > 0 && has_dispersion(spec.member)) I.bottomRightCorner(kg, kg) = hess_disp(d, th, spec, links, threads);
  return I;
}

double wald_p_value(double z) { return 0.5 * std::erfc(std::fabs(z) / std::sqrt(2.0)); }

std::vector<WaldRow> wald_table(const Dataset& d, const Coefficients& th, const Eigen::MatrixXd& info) {
  const int kb = d.k_beta(), L = d.L, kg = d.k_gamma();
  if (info.rows() != kb + L + kg || info.cols() != kb + L + kg)
    throw Error(Code::InvalidArgument, "information matrix does not match the dataset");
  const int k = kb + kg;
  std::vector<int> idx;
  std::vector<std::string> names;
  for (int a = 0; a < kb; ++a) {
    idx.push_back(a);
    names.push_back(d.x_names[a]);
  }
  for (int a = 0; a < kg; ++a) {
    idx.push_back(kb + L + a);
    names.push_back(d.z_names[a]);
  }
  Eigen::MatrixXd S(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) S(i, j) = info(idx[i], idx[j]);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw Error(Code::Numeric, "eigen-decomposition of the information failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (k > 0 && ev[0] <= 1e-12 * scale) {
    Eigen::Index arg = 0;
    es.eigenvectors().col(0).cwiseAbs().maxCoeff(&arg);
    throw Error(Code::Singular, "information is singular on the fixed effects (eigenvalue " + fmt_double(ev[0]) +
                                    "; null direction loads on '" + names[arg] + "')");
  }
  const Eigen::MatrixXd cov = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();

  std::vector<WaldRow> rows;
  for (int i = 0; i < k; ++i) {
    WaldRow r;
    r.name = names[i];
    const auto eq = r.name.find('=');
    r.effect = r.name.substr(0, eq);
    if (eq != std::string::npos) r.level = r.name.substr(eq + 1);
    r.block = i < kb ? "mean" : "dispersion";
    r.estimate = i < kb ? th.beta[i] : th.gamma[i - kb];
    r.std_error = std::sqrt(cov(i, i));
    r.z = r.estimate / r.std_error;
    r.p_value = wald_p_value(r.z);
    rows.push_back(std::move(r));
  }
  return rows;
}

AlphaSummary summarize_alpha(const Eigen::VectorXd& alpha) {
  AlphaSummary s;
  const Eigen::Index n = alpha.size();
  if (n == 0) return s;
  s.mean = alpha.mean();
  s.min = alpha.minCoeff();
  s.max = alpha.maxCoeff();
  s.range = s.max - s.min;
  std::vector<double> v(alpha.data(), alpha.data() + n);
  std::sort(v.begin(), v.end());
  s.median = n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  if (n > 1) s.sd = std::sqrt((alpha.array() - s.mean).square().sum() / static_cast<double>(n - 1));
  return s;
}

}  // namespace twdglm
