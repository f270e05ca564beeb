#include <cmath>
#include <string>

#include "doctest.h"
#include "fixtures.hpp"
#include "twdglm/error.hpp"
#include "twdglm/likelihood.hpp"

using namespace twdglm;

namespace {

struct Pair {
  Member m;
  LinkKind mean;
};

const Pair kPairs[] = {{Member::Normal, LinkKind::Identity},
                       {Member::Normal, LinkKind::Log},
                       {Member::Poisson, LinkKind::Log},
                       {Member::Poisson, LinkKind::Sqrt},
                       {Member::Poisson, LinkKind::Identity},
                       {Member::CompoundPoissonGamma, LinkKind::Log},
                       {Member::CompoundPoissonGamma, LinkKind::Identity},
                       {Member::Gamma, LinkKind::Log},
                       {Member::Gamma, LinkKind::Identity},
                       {Member::Gamma, LinkKind::Inverse},
                       {Member::InverseGaussian, LinkKind::InverseSquared},
                       {Member::InverseGaussian, LinkKind::Log}};

Dataset one_row(double y, int kb, int kg) {
  Dataset d;
  d.L = 1;
  d.y = Eigen::VectorXd::Constant(1, y);
  d.w = Eigen::VectorXd::Ones(1);
  d.vertex = {0};
  d.X = RowMatrix::Ones(1, kb);
  d.Z = RowMatrix::Ones(1, kg);
  for (int j = 0; j < kb; ++j) d.x_names.push_back(j ? "x" + std::to_string(j) : "(Intercept)");
  for (int j = 0; j < kg; ++j) d.z_names.push_back(j ? "z" + std::to_string(j) : "(Intercept)");
  return d;
}

// Negative log-likelihood as a function of eta or gamma alone.
double nll_eta(const fx::Instance& in, const Eigen::VectorXd& eta) {
  Coefficients th = in.th;
  th.set_eta(eta);
  return neg_log_lik(in.d, th, in.spec, in.links);
}

double nll_gamma(const fx::Instance& in, const Eigen::VectorXd& g) {
  Coefficients th = in.th;
  th.gamma = g;
  return neg_log_lik(in.d, th, in.spec, in.links);
}

}  // namespace

TEST_SUITE("likelihood") {
  TEST_CASE("empty dataset") {
    Dataset d = one_row(1.0, 1, 1).subset({});
    CHECK(neg_log_lik(d, Coefficients::zeros(1, 1, 1), FamilySpec::of(Member::Normal), {}) == 0.0);
  }

  TEST_CASE("single-row values") {
    const Dataset d = one_row(0.0, 1, 1);
    CHECK(neg_log_lik(d, Coefficients::zeros(1, 1, 1), FamilySpec::of(Member::Normal),
                      {LinkKind::Identity, LinkKind::Log}) == doctest::Approx(0.5 * std::log(2 * M_PI)));
    CHECK(neg_log_lik(d, Coefficients::zeros(1, 1, 1), FamilySpec::of(Member::CompoundPoissonGamma, 1.5), {}) ==
          doctest::Approx(2.0));
  }

  TEST_CASE("mean gradient at a data-free vertex and a hand-computed slot") {
    fx::Instance in = fx::random_instance(Member::CompoundPoissonGamma, LinkKind::Log, LinkKind::Log, 40, 5, 3);
    in.d.L = 6;
    in.th.alpha.conservativeResize(6);
    in.th.alpha[5] = 0.1;
    const Eigen::VectorXd g = grad_mean(in.d, in.th, in.spec, in.links);
    CHECK(g[3 + 5] == 0.0);

    const Dataset d = one_row(1.0, 1, 1);
    const Eigen::VectorXd g1 =
        grad_mean(d, Coefficients::zeros(1, 1, 1), FamilySpec::of(Member::Normal), {LinkKind::Identity, LinkKind::Log});
    CHECK(g1[0] == doctest::Approx(-1.0));
  }

  TEST_CASE("derivatives match finite differences for every member and permitted link") {
    for (const Pair& pr : kPairs)
      for (LinkKind dl : {LinkKind::Log, LinkKind::Identity})
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
          if (pr.m == Member::Poisson && dl == LinkKind::Identity) continue;
          const fx::Instance in = fx::random_instance(pr.m, pr.mean, dl, 50, 5, seed);
          CAPTURE(member_name(pr.m));
          CAPTURE(link_name(pr.mean));
          CAPTURE(link_name(dl));
          CAPTURE(seed);
          const Eigen::VectorXd eta = in.th.eta();
          const Eigen::VectorXd ga = grad_mean(in.d, in.th, in.spec, in.links);
          const Eigen::VectorXd gf = fx::fd_gradient([&](const Eigen::VectorXd& e) { return nll_eta(in, e); }, eta);
          CHECK(fx::rel_err(ga, gf) < 1e-5);
          const Eigen::MatrixXd Ha = hess_mean(in.d, in.th, in.spec, in.links).dense();
          const Eigen::MatrixXd Hf = fx::fd_jacobian(
              [&](const Eigen::VectorXd& e) {
                Coefficients th = in.th;
                th.set_eta(e);
                return grad_mean(in.d, th, in.spec, in.links);
              },
              eta);
          CHECK(fx::rel_err(Ha, Hf) < 1e-4);
          if (!has_dispersion(pr.m)) continue;
          const Eigen::VectorXd da = grad_disp(in.d, in.th, in.spec, in.links);
          const Eigen::VectorXd df =
              fx::fd_gradient([&](const Eigen::VectorXd& g) { return nll_gamma(in, g); }, in.th.gamma);
          CHECK(fx::rel_err(da, df) < 1e-5);
          const Eigen::MatrixXd Da = hess_disp(in.d, in.th, in.spec, in.links);
          const Eigen::MatrixXd Df = fx::fd_jacobian(
              [&](const Eigen::VectorXd& g) {
                Coefficients th = in.th;
                th.gamma = g;
                return grad_disp(in.d, th, in.spec, in.links);
              },
              in.th.gamma);
          CHECK(fx::rel_err(Da, Df) < 1e-4);
          CHECK((Da - Da.transpose()).cwiseAbs().maxCoeff() == 0.0);
        }
  }

  TEST_CASE("saddlepoint derivatives match finite differences") {
    fx::Instance in = fx::random_instance(Member::CompoundPoissonGamma, LinkKind::Log, LinkKind::Log, 50, 5, 9);
    in.spec.approx = Approx::Saddlepoint;
    const Eigen::VectorXd da = grad_disp(in.d, in.th, in.spec, in.links);
    const Eigen::VectorXd df = fx::fd_gradient([&](const Eigen::VectorXd& g) { return nll_gamma(in, g); }, in.th.gamma);
    CHECK(fx::rel_err(da, df) < 1e-5);
  }

  TEST_CASE("alpha block is diagonal and the Normal Hessian is the Gram matrix") {
    const fx::Instance in = fx::random_instance(Member::Normal, LinkKind::Identity, LinkKind::Log, 60, 4, 2);
    Coefficients th = in.th;
    th.gamma.setZero();
    const Eigen::MatrixXd H = hess_mean(in.d, th, in.spec, in.links).dense();
    Eigen::MatrixXd XR = Eigen::MatrixXd::Zero(in.d.rows(), 3 + 4);
    for (int i = 0; i < in.d.rows(); ++i) {
      XR.row(i).head(3) = in.d.X.row(i);
      XR(i, 3 + in.d.vertex[i]) = 1.0;
    }
    // phi_e = 1/w, so the Gram matrix carries the exposures.
    const Eigen::MatrixXd G = XR.transpose() * in.d.w.asDiagonal() * XR;
    CHECK((H - G).cwiseAbs().maxCoeff() < 1e-10);
    const Eigen::MatrixXd A = H.bottomRightCorner(4, 4);
    CHECK((A - Eigen::MatrixXd(A.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("series and saddlepoint dispersion gradients agree at small dispersion") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      fx::Instance in =
          fx::random_instance(Member::CompoundPoissonGamma, LinkKind::Log, LinkKind::Log, 50, 5, seed, 1.5, 1.5, 0.1);
      in.d.w.setOnes();
      const Eigen::VectorXd gs = grad_disp(in.d, in.th, in.spec, in.links);
      in.spec.approx = Approx::Saddlepoint;
      const Eigen::VectorXd gp = grad_disp(in.d, in.th, in.spec, in.links);
      CHECK((gs - gp).norm() < 0.05 * gs.norm());
    }
  }

  TEST_CASE("exposure scales the dispersion") {
    const fx::Instance in = fx::random_instance(Member::CompoundPoissonGamma, LinkKind::Log, LinkKind::Log, 30, 3, 4);
    const Eigen::VectorXd t = mean_predictor(in.d, in.th), s = disp_predictor(in.d, in.th);
    double want = 0.0;
    for (int i = 0; i < in.d.rows(); ++i)
      want -= log_density(in.spec, in.d.y[i], std::exp(t[i]), std::exp(s[i]) / in.d.w[i]);
    CHECK(neg_log_lik(in.d, in.th, in.spec, in.links) == doctest::Approx(want).epsilon(1e-12));
  }

  TEST_CASE("errors carry the row") {
    fx::Instance in = fx::random_instance(Member::Gamma, LinkKind::Log, LinkKind::Log, 10, 2, 1);
    in.d.y[6] = -1.0;
    try {
      neg_log_lik(in.d, in.th, in.spec, in.links);
      FAIL("expected an error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("(row 7)") != std::string::npos);
    }
    fx::Instance p = fx::random_instance(Member::Poisson, LinkKind::Log, LinkKind::Log, 10, 2, 1);
    CHECK_THROWS_AS(grad_disp(p.d, p.th, p.spec, p.links), Error);
  }

  TEST_CASE("sums do not depend on the thread count") {
    const fx::Instance in = fx::random_instance(Member::CompoundPoissonGamma, LinkKind::Log, LinkKind::Log, 9000, 7, 8);
    const double a = neg_log_lik(in.d, in.th, in.spec, in.links, 1);
    const double b = neg_log_lik(in.d, in.th, in.spec, in.links, 3);
    CHECK(a == b);
    const MeanDerivatives m1 = hess_mean(in.d, in.th, in.spec, in.links, 1);
    const MeanDerivatives m3 = hess_mean(in.d, in.th, in.spec, in.links, 4);
    CHECK(m1.grad == m3.grad);
    CHECK(m1.H11 == m3.H11);
    CHECK(grad_disp(in.d, in.th, in.spec, in.links, 1) == grad_disp(in.d, in.th, in.spec, in.links, 2));
  }
}
