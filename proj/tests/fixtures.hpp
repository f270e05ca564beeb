#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <random>

#include "twdglm/graph.hpp"
#include "twdglm/likelihood.hpp"
#include "twdglm/simgen.hpp"

namespace fx {

using namespace twdglm;

struct Instance {
  Dataset d;
  Coefficients th;
  FamilySpec spec;
  Links links;
};

inline double draw_ig(double mu, double lambda, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud;
  const double v = nd(rng);
  const double y = v * v;
  const double x = mu + mu * mu * y / (2 * lambda) - mu / (2 * lambda) * std::sqrt(4 * mu * lambda * y + mu * mu * y * y);
  return ud(rng) <= mu / (mu + x) ? x : mu * mu / x;
}

inline double draw_response(const FamilySpec& s, double mu, double phi, std::mt19937_64& rng) {
  switch (s.member) {
    case Member::Normal: return mu + std::sqrt(phi) * std::normal_distribution<double>()(rng);
    case Member::Poisson: return static_cast<double>(std::poisson_distribution<int>(mu)(rng));
    case Member::CompoundPoissonGamma: return sample_cpg(mu, phi, s.p, rng);
    case Member::Gamma: return std::gamma_distribution<double>(1.0 / phi, mu * phi)(rng);
    case Member::InverseGaussian: return draw_ig(mu, 1.0 / phi, rng);
  }
  return 0.0;
}

// Small random instance with predictors kept well inside every link's
// domain: each linear predictor stays within 15% of its base value.
inline Instance random_instance(Member m, LinkKind mean_link, LinkKind disp_link, int n, int L, std::uint64_t seed,
                                double p = 1.5, double mu0 = 1.5, double phi0 = 0.7) {
  Instance in;
  in.spec = FamilySpec::of(m, p);
  in.links = {mean_link, disp_link};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Dataset& d = in.d;
  d.L = L;
  d.y.resize(n);
  d.w.resize(n);
  d.vertex.resize(n);
  d.X.resize(n, 3);
  const bool disp = has_dispersion(m);
  d.Z.resize(n, disp ? 2 : 0);
  d.x_names = {"(Intercept)", "x_a", "x_b"};
  if (disp) d.z_names = {"(Intercept)", "z_a"};
  for (int i = 0; i < n; ++i) {
    d.vertex[i] = i % L;
    d.w[i] = 1.0 + 0.5 * (u(rng) + 1.0);
    d.X(i, 0) = 1.0;
    d.X(i, 1) = u(rng);
    d.X(i, 2) = u(rng);
    if (disp) {
      d.Z(i, 0) = 1.0;
      d.Z(i, 1) = u(rng);
    }
  }
  const double b0 = link_apply(mean_link, mu0);
  const double g0 = link_apply(disp_link, phi0);
  in.th = Coefficients::zeros(3, L, disp ? 2 : 0);
  in.th.beta << b0, 0.05 * std::fabs(b0) * u(rng), 0.05 * std::fabs(b0) * u(rng);
  for (int v = 0; v < L; ++v) in.th.alpha[v] = 0.04 * std::fabs(b0) * u(rng);
  if (disp) in.th.gamma << g0, 0.1 * std::fabs(g0) * u(rng);
  const Eigen::VectorXd t = mean_predictor(d, in.th);
  const Eigen::VectorXd s = disp_predictor(d, in.th);
  for (int i = 0; i < n; ++i) {
    const double mu = link_eval(mean_link, t[i], 0);
    const double phi = disp ? link_eval(disp_link, s[i], 0) / d.w[i] : 1.0;
    double y = draw_response(in.spec, mu, phi, rng);
    if ((m == Member::Gamma || m == Member::InverseGaussian) && y <= 1e-8) y = 1e-8;
    d.y[i] = y;
  }
  return in;
}

// Central differences of f at x, one coordinate at a time.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                   double rel = 1e-6) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double h = rel * std::max(1.0, std::fabs(x[j]));
    const double x0 = x[j];
    x[j] = x0 + h;
    const double fp = f(x);
    x[j] = x0 - h;
    const double fm = f(x);
    x[j] = x0;
    g[j] = (fp - fm) / (2 * h);
  }
  return g;
}

inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, Eigen::VectorXd x,
                                   double rel = 1e-6) {
  const Eigen::Index n = x.size();
  Eigen::MatrixXd J;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = rel * std::max(1.0, std::fabs(x[j]));
    const double x0 = x[j];
    x[j] = x0 + h;
    const Eigen::VectorXd fp = f(x);
    x[j] = x0 - h;
    const Eigen::VectorXd fm = f(x);
    x[j] = x0;
    if (j == 0) J.resize(fp.size(), n);
    J.col(j) = (fp - fm) / (2 * h);
  }
  return J;
}

// max |a - b| relative to the largest entry of b.
inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double scale = std::max(b.cwiseAbs().maxCoeff(), 1e-12);
  return (a - b).cwiseAbs().maxCoeff() / scale;
}

}  // namespace fx
