#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "twdglm/error.hpp"
#include "twdglm/optimizer.hpp"
#include "twdglm/simgen.hpp"

using namespace twdglm;

namespace {

FitConfig config_for(const Dataset& d, const ArealGraph& g, PenaltyMode mode, double l1, double l2) {
  FitConfig c;
  c.penalty = assemble_penalty(mode, l1, l2, d.k_beta(), g, d.k_gamma());
  return c;
}

ArealGraph ring(int L) {
  ArealGraph g(L);
  for (int i = 0; i < L; ++i) g.add_edge(i, (i + 1) % L);
  return g;
}

// Instance on a ring graph matching the fixture's vertex count.
struct Problem {
  fx::Instance in;
  ArealGraph g;
};

Problem problem(Member m, LinkKind ml, int n, int L, std::uint64_t seed) {
  return {fx::random_instance(m, ml, LinkKind::Log, n, L, seed), ring(L)};
}

Eigen::MatrixXd stacked(const Dataset& d) {
  Eigen::MatrixXd XR = Eigen::MatrixXd::Zero(d.rows(), d.k_beta() + d.L);
  for (int i = 0; i < d.rows(); ++i) {
    XR.row(i).head(d.k_beta()) = d.X.row(i);
    XR(i, d.k_beta() + d.vertex[i]) = 1.0;
  }
  return XR;
}

// Normal identity data with unit exposure and no intercept column, so the
// stacked design has full rank.
Problem normal_no_intercept(int n, int L, std::uint64_t seed) {
  Problem p = problem(Member::Normal, LinkKind::Identity, n, L, seed);
  Dataset& d = p.in.d;
  d.w.setOnes();
  RowMatrix X = d.X.rightCols(2);
  d.X = X;
  d.x_names = {"x_a", "x_b"};
  p.in.th.beta = p.in.th.beta.tail(2).eval();
  return p;
}

}  // namespace

TEST_SUITE("optimizer") {
  TEST_CASE("config validation") {
    const Problem p = problem(Member::CompoundPoissonGamma, LinkKind::Log, 20, 4, 1);
    FitConfig c = config_for(p.in.d, p.g, PenaltyMode::SpatialOnly, 1, 1);
    c.eps_converge = 0;
    CHECK_THROWS_AS(c.validate(p.in.spec), Error);
    c.eps_converge = 1e-8;
    c.p_grid = {1.2, 2.0};
    CHECK_THROWS_AS(c.validate(p.in.spec), Error);
    c.p_grid = {1.4, 1.2};
    CHECK_THROWS_AS(c.validate(p.in.spec), Error);
    CHECK(default_p_grid().size() == 19);
    CHECK(default_p_grid().front() == doctest::Approx(1.05));
    CHECK(default_p_grid().back() == doctest::Approx(1.95));
  }

  TEST_CASE("mean step reduces to least squares for Normal identity") {
    Problem p = normal_no_intercept(80, 4, 2);
    p.in.th.gamma.setZero();
    FitConfig c = config_for(p.in.d, p.g, PenaltyMode::SpatialOnly, 0, 0);
    const Eigen::VectorXd eta = solve_mean_step(p.in.d, p.in.th, p.in.spec, p.in.links, c, 1.0);
    const Eigen::MatrixXd XR = stacked(p.in.d);
    const Eigen::VectorXd ols = (XR.transpose() * XR).ldlt().solve(XR.transpose() * p.in.d.y);
    CHECK((eta - ols).cwiseAbs().maxCoeff() < 1e-10);

    // At a stationary point the step stays put.
    Coefficients th = p.in.th;
    th.set_eta(ols);
    c.penalty = with_multipliers(c.penalty, 1e-12, 0.0);
    const Eigen::VectorXd again = solve_mean_step(p.in.d, th, p.in.spec, p.in.links, c, 1.0);
    CHECK((again - ols).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("block solve equals dense solve") {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> nd;
    const int kb = 3, L = 10;
    const ArealGraph g = make_lattice(2, 5);
    for (int trial = 0; trial < 10; ++trial) {
      MeanDerivatives der;
      Eigen::MatrixXd A(kb, kb);
      for (int i = 0; i < kb; ++i)
        for (int j = 0; j < kb; ++j) A(i, j) = nd(rng);
      der.H12 = Eigen::MatrixXd::Zero(kb, L);
      for (int i = 0; i < kb; ++i)
        for (int j = 0; j < L; ++j) der.H12(i, j) = 0.3 * nd(rng);
      der.H22 = Eigen::VectorXd::Constant(L, 2.0) + Eigen::VectorXd::Random(L).cwiseAbs();
      der.H11 = A * A.transpose() + Eigen::MatrixXd::Identity(kb, kb) +
                der.H12 * der.H22.cwiseInverse().asDiagonal() * der.H12.transpose();
      der.grad = Eigen::VectorXd::Zero(kb + L);
      for (int i = 0; i < kb + L; ++i) der.grad[i] = nd(rng);
      Coefficients th = Coefficients::zeros(kb, L, 1);
      for (int i = 0; i < L; ++i) th.alpha[i] = nd(rng);
      const PenaltyConfig pen = assemble_penalty(PenaltyMode::SpatialOnly, 0.5, 0.8, kb, g, 1);
      const MeanSystem sys = build_mean_system(der, th, pen, 1.5);
      SolveStatus s1, s2;
      const Eigen::VectorXd a = solve_block(sys, s1);
      const Eigen::VectorXd b = solve_dense(sys.dense(), sys.rhs, false, s2);
      CHECK(s1 == SolveStatus::Ok);
      CHECK(s2 == SolveStatus::Ok);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);

      // Approximate Laplacian with max_block = L keeps every edge.
      const PenaltyConfig ap = assemble_penalty(PenaltyMode::SpatialOnly, 0.5, 0.8, kb, g, 1, L);
      CHECK(Eigen::MatrixXd(ap.W) == Eigen::MatrixXd(pen.W));
      const Eigen::VectorXd c = solve_block(build_mean_system(der, th, ap, 1.5), s1);
      CHECK((c - b).cwiseAbs().maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("block solve with a genuinely block-diagonal Laplacian") {
    const Problem p = problem(Member::CompoundPoissonGamma, LinkKind::Log, 400, 12, 5);
    const ArealGraph g = make_lattice(3, 4);
    FitConfig dense;
    dense.penalty = assemble_penalty(PenaltyMode::SpatialOnly, 0.5, 2.0, 3, g, 2, 4);
    FitConfig block = dense;
    block.use_block_solve = true;
    CHECK(dense.penalty.blocks.size() == 3);
    const Eigen::VectorXd a = solve_mean_step(p.in.d, p.in.th, p.in.spec, p.in.links, dense, 2.0);
    const Eigen::VectorXd b = solve_mean_step(p.in.d, p.in.th, p.in.spec, p.in.links, block, 2.0);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
  }

  TEST_CASE("dispersion step") {
    // Scalar Newton step for Normal with an intercept-only dispersion model.
    Problem p = problem(Member::Normal, LinkKind::Identity, 60, 3, 4);
    Dataset& d = p.in.d;
    d.Z = d.Z.leftCols(1).eval();
    d.z_names = {"(Intercept)"};
    p.in.th.gamma = Eigen::VectorXd::Constant(1, 0.3);
    FitConfig c = config_for(d, p.g, PenaltyMode::SpatialOnly, 1, 1);
    const Eigen::VectorXd mu = mean_predictor(d, p.in.th);
    const double s = 0.3;
    double g1 = 0, g2 = 0;
    for (int i = 0; i < d.rows(); ++i) {
      const double r2 = (d.y[i] - mu[i]) * (d.y[i] - mu[i]) * d.w[i] * std::exp(-s);
      g1 += -0.5 * r2 + 0.5;
      g2 += 0.5 * r2;
    }
    for (double c2 : {1.0, 2.0, 8.0}) {
      const Eigen::VectorXd gs = solve_disp_step(d, p.in.th, p.in.spec, p.in.links, c, c2);
      CHECK(gs[0] == doctest::Approx(s - g1 / (c2 * g2)).epsilon(1e-12));
    }
    // Stationary gamma stays put.
    Coefficients th = p.in.th;
    th.gamma[0] = s + std::log(2 * g2 / d.rows());
    CHECK(solve_disp_step(d, th, p.in.spec, p.in.links, c, 1.0)[0] == doctest::Approx(th.gamma[0]).epsilon(1e-10));
    // A dominating ridge pulls gamma to zero.
    FitConfig r = config_for(d, p.g, PenaltyMode::SpatialPlusRidge, 1e12, 1);
    CHECK(std::fabs(solve_disp_step(d, p.in.th, p.in.spec, p.in.links, r, 1.0)[0]) < 1e-8);
  }

  TEST_CASE("scaling: convex quadratic accepts c = 1") {
    Problem p = normal_no_intercept(50, 4, 3);
    const FitConfig c = config_for(p.in.d, p.g, PenaltyMode::SpatialOnly, 0.5, 0.5);
    const ScalingOutcome o = choose_scaling(StepKind::Mean, p.in.d, p.in.th, p.in.spec, p.in.links, c);
    CHECK(o.c == 1.0);
    CHECK(o.F_after <= o.F_before);
    CHECK_FALSE(o.expected_curvature);
  }

  TEST_CASE("scaling: indefinite curvature still yields a PSD system and descent") {
    // Identity link with all-zero responses at vertex 0 gives negative
    // observed curvature in that alpha slot.
    Problem p = problem(Member::CompoundPoissonGamma, LinkKind::Identity, 80, 4, 6);
    for (int i = 0; i < p.in.d.rows(); ++i)
      if (p.in.d.vertex[i] == 0) p.in.d.y[i] = 0.0;
    const FitConfig c = config_for(p.in.d, p.g, PenaltyMode::SpatialOnly, 0.1, 0.1);
    Eigen::VectorXd phi_e;
    REQUIRE(effective_dispersion(p.in.d, disp_predictor(p.in.d, p.in.th), p.in.spec, p.in.links, phi_e));
    const MeanDerivatives obs =
        mean_derivatives(p.in.d, p.in.th, phi_e, p.in.spec, p.in.links, Curvature::Observed);
    CHECK(obs.H22[0] < 0.0);
    const ScalingOutcome o = choose_scaling(StepKind::Mean, p.in.d, p.in.th, p.in.spec, p.in.links, c);
    const MeanDerivatives used = mean_derivatives(p.in.d, p.in.th, phi_e, p.in.spec, p.in.links,
                                                  o.expected_curvature ? Curvature::Expected : Curvature::Observed);
    const Eigen::MatrixXd M = build_mean_system(used, p.in.th, c.penalty, o.c).dense();
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(M).eigenvalues().minCoeff() >= 0.0);
    CHECK(o.F_after <= o.F_before);
  }

  TEST_CASE("index update") {
    const Problem g = problem(Member::Gamma, LinkKind::Log, 30, 3, 1);
    CHECK(update_index(g.in.d, g.in.th, g.in.spec, g.in.links, default_p_grid()) == 2.0);
    const Problem p = problem(Member::CompoundPoissonGamma, LinkKind::Log, 30, 3, 1);
    CHECK(update_index(p.in.d, p.in.th, p.in.spec, p.in.links, {1.35}) == 1.35);
  }

  TEST_CASE("fit matches least squares and the moment dispersion") {
    Problem p = problem(Member::Normal, LinkKind::Identity, 120, 4, 8);
    Dataset& d = p.in.d;
    d.w.setOnes();
    d.Z = d.Z.leftCols(1).eval();
    d.z_names = {"(Intercept)"};
    FitConfig c = config_for(d, p.g, PenaltyMode::SpatialOnly, 0, 0);
    c.eps_converge = 1e-12;
    const FitResult f = fit_unpenalized(d, p.in.spec, p.in.links, c);
    CHECK(f.converged);
    const Eigen::MatrixXd XR = stacked(d);
    const Eigen::VectorXd fitted = XR * XR.completeOrthogonalDecomposition().solve(d.y);
    const Eigen::VectorXd mu = mean_predictor(d, f.theta);
    CHECK((mu - fitted).cwiseAbs().maxCoeff() < 1e-6);
    const double phi = (d.y - fitted).squaredNorm() / d.rows();
    CHECK(std::exp(f.theta.gamma[0]) == doctest::Approx(phi).epsilon(1e-6));
  }

  TEST_CASE("objective trace never increases") {
    for (std::uint64_t seed = 1; seed <= 4; ++seed)
      for (PenaltyMode mode : {PenaltyMode::SpatialOnly, PenaltyMode::SpatialPlusRidge}) {
        const Problem p = problem(Member::CompoundPoissonGamma, LinkKind::Log, 300, 6, seed);
        FitConfig c = config_for(p.in.d, p.g, mode, 0.8, 1.5);
        c.p_grid = make_p_grid(1.2, 1.8, 0.1);
        const FitResult f = fit(p.in.d, p.in.spec, p.in.links, c);
        CHECK(f.converged);
        for (std::size_t t = 1; t < f.objective_trace.size(); ++t)
          CHECK(f.objective_trace[t] <= f.objective_trace[t - 1] + 1e-10);
        for (const auto& r : f.history) {
          CHECK(r.F_mean <= r.F_start + 1e-10);
          CHECK(r.F_disp <= r.F_mean + 1e-10);
          CHECK(r.F_end <= r.F_disp + 1e-10);
          if (mode == PenaltyMode::SpatialOnly) CHECK(r.F_start - r.F_mean >= 0.5 * 0.8 * r.dalpha_sq - 1e-8);
        }
      }
  }

  TEST_CASE("other members converge") {
    const Member ms[] = {Member::Normal, Member::Poisson, Member::Gamma, Member::InverseGaussian};
    for (Member m : ms) {
      const Problem p = problem(m, LinkKind::Log, 200, 5, 3);
      const FitResult f = fit(p.in.d, p.in.spec, p.in.links, config_for(p.in.d, p.g, PenaltyMode::SpatialOnly, 1, 1));
      CAPTURE(member_name(m));
      CHECK(f.converged);
      CHECK(f.theta.finite());
    }
  }

  TEST_CASE("ridge at zero is the unpenalized fit; a heavy ridge shrinks alpha") {
    const Problem p = problem(Member::CompoundPoissonGamma, LinkKind::Log, 300, 5, 2);
    const FitConfig c = config_for(p.in.d, p.g, PenaltyMode::SpatialOnly, 1, 1);
    const FitResult a = fit_unpenalized(p.in.d, p.in.spec, p.in.links, c);
    const FitResult b = fit_ridge(p.in.d, p.in.spec, p.in.links, c, 0.0);
    CHECK(a.objective_trace == b.objective_trace);
    CHECK(a.theta.theta() == b.theta.theta());
    const FitResult r = fit_ridge(p.in.d, p.in.spec, p.in.links, c, 1e8);
    CHECK(r.theta.alpha.norm() < 1e-5);
  }

  TEST_CASE("relabelling vertices permutes alpha and nothing else") {
    const Problem p = problem(Member::CompoundPoissonGamma, LinkKind::Log, 300, 6, 4);
    const ArealGraph g = make_lattice(2, 3);
    std::vector<int> perm(6);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), std::mt19937_64(3));
    // perm[old] = new
    std::vector<std::string> labels(6);
    for (int v = 0; v < 6; ++v) labels[perm[v]] = g.labels()[v];
    std::vector<std::pair<int, int>> edges;
    for (auto [a, b] : g.edges()) edges.emplace_back(perm[a], perm[b]);
    const ArealGraph h(labels, edges);
    Dataset d2 = p.in.d;
    for (auto& v : d2.vertex) v = perm[v];
    FitConfig c1 = config_for(p.in.d, g, PenaltyMode::SpatialOnly, 0.7, 1.3);
    FitConfig c2 = config_for(d2, h, PenaltyMode::SpatialOnly, 0.7, 1.3);
    c1.p_grid = c2.p_grid = make_p_grid(1.3, 1.7, 0.1);
    const FitResult a = fit(p.in.d, p.in.spec, p.in.links, c1);
    const FitResult b = fit(d2, p.in.spec, p.in.links, c2);
    CHECK(a.p_hat == b.p_hat);
    REQUIRE(a.objective_trace.size() == b.objective_trace.size());
    for (std::size_t t = 0; t < a.objective_trace.size(); ++t)
      CHECK(a.objective_trace[t] == doctest::Approx(b.objective_trace[t]).epsilon(1e-10));
    CHECK((a.theta.beta - b.theta.beta).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((a.theta.gamma - b.theta.gamma).cwiseAbs().maxCoeff() < 1e-10);
    for (int v = 0; v < 6; ++v) CHECK(std::fabs(a.theta.alpha[v] - b.theta.alpha[perm[v]]) < 1e-10);
  }

  TEST_CASE("warm start at the truth of noiseless data") {
    Problem p = normal_no_intercept(60, 4, 5);
    Dataset& d = p.in.d;
    d.Z.resize(d.rows(), 0);
    d.z_names.clear();
    Coefficients truth = p.in.th;
    truth.gamma.resize(0);
    d.y = mean_predictor(d, truth);
    FitConfig c = config_for(d, p.g, PenaltyMode::SpatialOnly, 0, 0);
    const FitResult f = fit_unpenalized(d, p.in.spec, p.in.links, c, truth);
    CHECK(f.converged);
    CHECK(f.iters <= 2);
    CHECK((f.theta.eta() - truth.eta()).cwiseAbs().maxCoeff() < 1e-10);
  }

  TEST_CASE("termination bound on successive iterates") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const Problem p = problem(Member::CompoundPoissonGamma, LinkKind::Log, 300, 6, seed);
      FitConfig c = config_for(p.in.d, p.g, PenaltyMode::SpatialOnly, 1.0, 1.0);
      c.eps_converge = 1e-8;
      const FitResult f = fit(p.in.d, p.in.spec, p.in.links, c);
      REQUIRE(f.converged);
      CHECK(f.history.back().dalpha_sq <= 2 * 1e-8 / 1.0);
      CHECK(f.history.back().dtheta_sq <= 2 * 1e-8 / 1.0);
    }
  }

  TEST_CASE("errors name the iteration") {
    Problem p = problem(Member::CompoundPoissonGamma, LinkKind::Log, 50, 4, 1);
    FitConfig c = config_for(p.in.d, p.g, PenaltyMode::SpatialOnly, 1, 1);
    c.max_doublings = 0;
    c.c_growth = 2;
    Coefficients start = p.in.th;
    start.beta[0] += 8.0;
    try {
      fit(p.in.d, p.in.spec, p.in.links, c, start);
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("at iteration") != std::string::npos);
    }
  }
}
