#include "twdglm/likelihood.hpp"

#include <cmath>
#include <limits>

#include "twdglm/error.hpp"
#include "twdglm/parallel.hpp"
#include "util.hpp"

namespace twdglm {

namespace {

std::string at_row(int i) { return " (row " + std::to_string(i + 1) + ")"; }

[[noreturn]] void rethrow_at(const Error& e, int i) { throw Error(e.code(), std::string(e.what()) + at_row(i)); }

void check_shapes(const Dataset& d, const Coefficients& th) {
  if (th.beta.size() != d.k_beta() || th.alpha.size() != d.L || th.gamma.size() != d.k_gamma())
    throw Error(Code::InvalidArgument, "coefficient dimensions do not match the dataset");
}

}  // namespace

void Dataset::validate(const FamilySpec& spec) const {
  const int n = rows();
  if (w.size() != n || static_cast<int>(vertex.size()) != n || X.rows() != n || Z.rows() != n)
    throw Error(Code::InvalidArgument, "dataset columns have inconsistent lengths");
  if (static_cast<int>(x_names.size()) != k_beta() || static_cast<int>(z_names.size()) != k_gamma())
    throw Error(Code::InvalidArgument, "dataset column names do not match the design");
  if (L < 1) throw Error(Code::InvalidArgument, "dataset needs at least one vertex");
  if (spec.member == Member::Poisson && k_gamma() > 0)
    throw Error(Code::Config, "constant dispersion member: poisson takes no dispersion covariates");
  for (int i = 0; i < n; ++i) {
    if (vertex[i] < 0 || vertex[i] >= L) throw Error(Code::Schema, "vertex index out of range" + at_row(i));
    if (!(w[i] > 0.0) || !std::isfinite(w[i])) throw Error(Code::Support, "exposure must be positive" + at_row(i));
    try {
      check_response(spec, y[i]);
    } catch (const Error& e) {
      rethrow_at(e, i);
    }
    for (int j = 0; j < k_beta(); ++j)
      if (!std::isfinite(X(i, j))) throw Error(Code::Schema, "non-finite mean covariate" + at_row(i));
    for (int j = 0; j < k_gamma(); ++j)
      if (!std::isfinite(Z(i, j))) throw Error(Code::Schema, "non-finite dispersion covariate" + at_row(i));
  }
}

Dataset Dataset::subset(const std::vector<int>& idx) const {
  Dataset s;
  const int m = static_cast<int>(idx.size());
  s.y.resize(m);
  s.w.resize(m);
  s.vertex.resize(m);
  s.X.resize(m, k_beta());
  s.Z.resize(m, k_gamma());
  for (int r = 0; r < m; ++r) {
    const int i = idx[r];
    s.y[r] = y[i];
    s.w[r] = w[i];
    s.vertex[r] = vertex[i];
    s.X.row(r) = X.row(i);
    s.Z.row(r) = Z.row(i);
  }
  s.x_names = x_names;
  s.z_names = z_names;
  s.L = L;
  return s;
}

std::vector<int> Dataset::vertex_counts() const {
  std::vector<int> c(L, 0);
  for (int v : vertex) ++c[v];
  return c;
}

int Dataset::x_intercept() const {
  for (int j = 0; j < k_beta(); ++j)
    if (x_names[j] == "(Intercept)") return j;
  return -1;
}

int Dataset::z_intercept() const {
  for (int j = 0; j < k_gamma(); ++j)
    if (z_names[j] == "(Intercept)") return j;
  return -1;
}

Coefficients Coefficients::zeros(int k_beta, int L, int k_gamma) {
  return {Eigen::VectorXd::Zero(k_beta), Eigen::VectorXd::Zero(L), Eigen::VectorXd::Zero(k_gamma)};
}

Eigen::VectorXd Coefficients::eta() const {
  Eigen::VectorXd e(beta.size() + alpha.size());
  e << beta, alpha;
  return e;
}

Eigen::VectorXd Coefficients::theta() const {
  Eigen::VectorXd e(beta.size() + alpha.size() + gamma.size());
  e << beta, alpha, gamma;
  return e;
}

void Coefficients::set_eta(const Eigen::VectorXd& eta) {
  beta = eta.head(beta.size());
  alpha = eta.tail(alpha.size());
}

bool Coefficients::finite() const { return beta.allFinite() && alpha.allFinite() && gamma.allFinite(); }

Eigen::VectorXd mean_predictor(const Dataset& d, const Coefficients& th) {
  Eigen::VectorXd t = d.X * th.beta;
  for (int i = 0; i < d.rows(); ++i) t[i] += th.alpha[d.vertex[i]];
  return t;
}

Eigen::VectorXd disp_predictor(const Dataset& d, const Coefficients& th) {
  if (d.k_gamma() == 0) return Eigen::VectorXd::Zero(d.rows());
  return d.Z * th.gamma;
}

bool effective_dispersion(const Dataset& d, const Eigen::VectorXd& s, const FamilySpec& spec, const Links& links,
                          Eigen::VectorXd& phi_e) {
  const int n = d.rows();
  phi_e.resize(n);
  if (!has_dispersion(spec.member) || d.k_gamma() == 0) {
    for (int i = 0; i < n; ++i) phi_e[i] = 1.0 / d.w[i];
    return true;
  }
  for (int i = 0; i < n; ++i) {
    if (!link_domain_ok(links.disp, s[i])) return false;
    const double phi = link_eval(links.disp, s[i], 0);
    if (!(phi > 0.0) || !std::isfinite(phi)) return false;
    phi_e[i] = phi / d.w[i];
  }
  return true;
}

double normalizer_sum(const Dataset& d, const Eigen::VectorXd& phi_e, const FamilySpec& spec, int threads) {
  return chunked_reduce(
      d.rows(), threads, 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
          try {
            acc += log_normalizer(spec, d.y[i], phi_e[i], 0).value;
          } catch (const Error& e) {
            rethrow_at(e, static_cast<int>(i));
          }
        }
        return acc;
      },
      [](double a, double b) { return a + b; });
}

double mean_term(const Dataset& d, const Eigen::VectorXd& t, const Eigen::VectorXd& phi_e, const FamilySpec& spec,
                 const Links& links, int threads, Eigen::VectorXd* D) {
  if (D) D->resize(d.rows());
  return chunked_reduce(
      d.rows(), threads, 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        try {
          for (std::size_t i = lo; i < hi; ++i) {
            const DTerms r = d_terms(spec, links.mean, d.y[i], t[i]);
            if (D) (*D)[i] = r.D;
            acc += r.D / phi_e[i];
          }
        } catch (const Error&) {
          return std::numeric_limits<double>::infinity();
        }
        return std::isfinite(acc) ? acc : std::numeric_limits<double>::infinity();
      },
      [](double a, double b) { return a + b; });
}

double neg_log_lik(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                   int threads) {
  check_shapes(d, th);
  if (d.rows() == 0) return 0.0;
  const Eigen::VectorXd t = mean_predictor(d, th);
  const Eigen::VectorXd s = disp_predictor(d, th);
  Eigen::VectorXd phi_e;
  if (!effective_dispersion(d, s, spec, links, phi_e)) {
    for (int i = 0; i < d.rows(); ++i)
      if (!link_domain_ok(links.disp, s[i]) || !(link_eval(links.disp, s[i], 0) > 0.0))
        throw Error(Code::Domain, "dispersion is not positive" + at_row(i));
    throw Error(Code::Numeric, "dispersion is not finite for some row");
  }
  const double total = chunked_reduce(
      d.rows(), threads, 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
          try {
            const DTerms r = d_terms(spec, links.mean, d.y[i], t[i]);
            const double v = -(r.D / phi_e[i] + log_normalizer(spec, d.y[i], phi_e[i], 0).value);
            if (!std::isfinite(v)) throw Error(Code::Numeric, "non-finite log-likelihood contribution");
            acc += v;
          } catch (const Error& e) {
            rethrow_at(e, static_cast<int>(i));
          }
        }
        return acc;
      },
      [](double a, double b) { return a + b; });
  return total;
}

Eigen::MatrixXd MeanDerivatives::dense() const {
  const int kb = static_cast<int>(H11.rows());
  const int L = static_cast<int>(H22.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(kb + L, kb + L);
  H.topLeftCorner(kb, kb) = H11;
  H.topRightCorner(kb, L) = H12;
  H.bottomLeftCorner(L, kb) = H12.transpose();
  H.bottomRightCorner(L, L).diagonal() = H22;
  return H;
}

MeanDerivatives mean_derivatives(const Dataset& d, const Coefficients& th, const Eigen::VectorXd& phi_e,
                                 const FamilySpec& spec, const Links& links, Curvature curv, int threads) {
  check_shapes(d, th);
  const int kb = d.k_beta(), L = d.L;
  const Eigen::VectorXd t = mean_predictor(d, th);
  MeanDerivatives zero;
  zero.grad = Eigen::VectorXd::Zero(kb + L);
  zero.H11 = Eigen::MatrixXd::Zero(kb, kb);
  zero.H12 = Eigen::MatrixXd::Zero(kb, L);
  zero.H22 = Eigen::VectorXd::Zero(L);
  MeanDerivatives out = chunked_reduce(
      d.rows(), threads, zero,
      [&](std::size_t lo, std::size_t hi) {
        MeanDerivatives m = zero;
        for (std::size_t i = lo; i < hi; ++i) {
          DTerms r;
          try {
            r = d_terms(spec, links.mean, d.y[i], t[i]);
          } catch (const Error& e) {
            rethrow_at(e, static_cast<int>(i));
          }
          const double gt = -r.D1 / phi_e[i];
          const double ht = (curv == Curvature::Observed ? -r.D2 : r.info) / phi_e[i];
          const int v = d.vertex[i];
          for (int a = 0; a < kb; ++a) {
            const double xa = d.X(i, a);
            m.grad[a] += gt * xa;
            m.H12(a, v) += ht * xa;
            for (int b = 0; b <= a; ++b) m.H11(a, b) += ht * xa * d.X(i, b);
          }
          m.grad[kb + v] += gt;
          m.H22[v] += ht;
        }
        return m;
      },
      [](MeanDerivatives a, const MeanDerivatives& b) {
        a.grad += b.grad;
        a.H11 += b.H11;
        a.H12 += b.H12;
        a.H22 += b.H22;
        return a;
      });
  for (int a = 0; a < kb; ++a)
    for (int b = a + 1; b < kb; ++b) out.H11(a, b) = out.H11(b, a);
  return out;
}

DispDerivatives disp_derivatives(const Dataset& d, const Eigen::VectorXd& D, const Coefficients& th,
                                 const FamilySpec& spec, const Links& links, int threads) {
  check_shapes(d, th);
  if (!has_dispersion(spec.member))
    throw Error(Code::Config, "constant dispersion member: " + member_name(spec.member) + " has no dispersion model");
  const int kg = d.k_gamma();
  const Eigen::VectorXd s = disp_predictor(d, th);
  DispDerivatives zero{Eigen::VectorXd::Zero(kg), Eigen::MatrixXd::Zero(kg, kg)};
  DispDerivatives out = chunked_reduce(
      d.rows(), threads, zero,
      [&](std::size_t lo, std::size_t hi) {
        DispDerivatives m = zero;
        for (std::size_t i = lo; i < hi; ++i) {
          double gs = 0.0, hs = 0.0;
          try {
            const double phi = link_eval(links.disp, s[i], 0);
            if (!(phi > 0.0)) throw Error(Code::Domain, "dispersion is not positive");
            const double w = d.w[i];
            const double pe = phi / w;
            const double pe1 = link_eval(links.disp, s[i], 1) / w;
            const double pe2 = link_eval(links.disp, s[i], 2) / w;
            const double dq = -pe1 / (pe * pe);
            const double d2q = 2.0 * pe1 * pe1 / (pe * pe * pe) - pe2 / (pe * pe);
            const LogNormalizer c = log_normalizer(spec, d.y[i], pe, 2);
            gs = -(D[i] * dq + c.d1 * pe1);
            hs = -(D[i] * d2q + c.d2 * pe1 * pe1 + c.d1 * pe2);
          } catch (const Error& e) {
            rethrow_at(e, static_cast<int>(i));
          }
          for (int a = 0; a < kg; ++a) {
            const double za = d.Z(i, a);
            m.grad[a] += gs * za;
            for (int b = 0; b <= a; ++b) m.hess(a, b) += hs * za * d.Z(i, b);
          }
        }
        return m;
      },
      [](DispDerivatives a, const DispDerivatives& b) {
        a.grad += b.grad;
        a.hess += b.hess;
        return a;
      });
  for (int a = 0; a < kg; ++a)
    for (int b = a + 1; b < kg; ++b) out.hess(a, b) = out.hess(b, a);
  return out;
}

namespace {

Eigen::VectorXd phi_e_or_throw(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links) {
  Eigen::VectorXd phi_e;
  if (!effective_dispersion(d, disp_predictor(d, th), spec, links, phi_e))
    throw Error(Code::Domain, "dispersion is not positive for some row");
  return phi_e;
}

}  // namespace

Eigen::VectorXd grad_mean(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                          int threads) {
  return hess_mean(d, th, spec, links, threads).grad;
}

MeanDerivatives hess_mean(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                          int threads) {
  check_shapes(d, th);
  return mean_derivatives(d, th, phi_e_or_throw(d, th, spec, links), spec, links, Curvature::Observed, threads);
}

namespace {

DispDerivatives disp_at(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                        int threads) {
  check_shapes(d, th);
  if (!has_dispersion(spec.member))
    throw Error(Code::Config, "constant dispersion member: " + member_name(spec.member) + " has no dispersion model");
  Eigen::VectorXd D;
  const Eigen::VectorXd phi_e = phi_e_or_throw(d, th, spec, links);
  if (!std::isfinite(mean_term(d, mean_predictor(d, th), phi_e, spec, links, threads, &D)))
    throw Error(Code::Domain, "mean leaves the member's range for some row");
  return disp_derivatives(d, D, th, spec, links, threads);
}

}  // namespace

Eigen::VectorXd grad_disp(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                          int threads) {
  return disp_at(d, th, spec, links, threads).grad;
}

Eigen::MatrixXd hess_disp(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                          int threads) {
  return disp_at(d, th, spec, links, threads).hess;
}

}  // namespace twdglm
