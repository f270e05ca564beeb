#include "twdglm/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "twdglm/error.hpp"
#include "twdglm/parallel.hpp"
#include "util.hpp"

namespace twdglm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Same chunking as mean_term, so both give bit-identical sums.
double scaled_sum(const Eigen::VectorXd& D, const Eigen::VectorXd& phi_e, int threads) {
  return chunked_reduce(
      static_cast<std::size_t>(D.size()), threads, 0.0,
      [&](std::size_t lo, std::size_t hi) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += D[i] / phi_e[i];
        return std::isfinite(acc) ? acc : kInf;
      },
      [](double a, double b) { return a + b; });
}

// Normalizer sum; an infeasible series window gives -inf so that
// F = P - (A + C) comes out as +inf and the trial is rejected.
double normalizer_or_inf(const Dataset& d, const Eigen::VectorXd& phi_e, const FamilySpec& spec, int threads) {
  try {
    const double c = normalizer_sum(d, phi_e, spec, threads);
    return std::isfinite(c) ? c : -kInf;
  } catch (const Error& e) {
    if (e.code() == Code::SeriesInfeasible || e.code() == Code::Domain) return -kInf;
    throw;
  }
}

bool is_ridge(const PenaltyConfig& pen) { return pen.mode == PenaltyMode::SpatialPlusRidge; }

class Engine {
 public:
  Engine(const Dataset& d, const FamilySpec& spec, const Links& links, const FitConfig& cfg, Coefficients init)
      : d_(d), spec_(spec), links_(links), cfg_(cfg), th_(std::move(init)) {
    refresh_disp();
    refresh_mean();
    update_F();
    if (!std::isfinite(F_)) throw Error(Code::Domain, "objective is not finite at the starting coefficients");
  }

  const Coefficients& theta() const { return th_; }
  const FamilySpec& spec() const { return spec_; }
  double F() const { return F_; }
  double A() const { return A_; }
  double C() const { return C_; }

  ScalingOutcome mean_step();
  ScalingOutcome disp_step();
  void index_step();

 private:
  void refresh_disp() {
    if (!effective_dispersion(d_, disp_predictor(d_, th_), spec_, links_, phi_e_))
      throw Error(Code::Domain, "dispersion is not positive at the current coefficients");
    C_ = normalizer_sum(d_, phi_e_, spec_, cfg_.threads);
  }
  void refresh_mean() {
    A_ = mean_term(d_, mean_predictor(d_, th_), phi_e_, spec_, links_, cfg_.threads, &D_);
    if (!std::isfinite(A_)) throw Error(Code::Domain, "mean leaves the member's range at the current coefficients");
  }
  void update_F() { F_ = cfg_.penalty.value(th_.beta, th_.alpha, th_.gamma) - (A_ + C_); }
  double tiny() const { return 1e-13 * std::max(1.0, std::abs(F_)); }

  const Dataset& d_;
  FamilySpec spec_;
  Links links_;
  const FitConfig& cfg_;
  Coefficients th_;
  Eigen::VectorXd phi_e_, D_;
  double A_ = 0.0, C_ = 0.0, F_ = 0.0;
};

ScalingOutcome Engine::mean_step() {
  const PenaltyConfig& pen = cfg_.penalty;
  ScalingOutcome out;
  out.F_before = F_;
  Curvature curv = Curvature::Observed;
  MeanDerivatives der = mean_derivatives(d_, th_, phi_e_, spec_, links_, curv, cfg_.threads);
  const Eigen::VectorXd eta = th_.eta();
  double c = 1.0;
  int doublings = 0;
  for (;;) {
    const MeanSystem sys = build_mean_system(der, th_, pen, c);
    SolveStatus st = SolveStatus::Ok;
    Eigen::VectorXd delta;
    if (cfg_.use_block_solve && !cfg_.allow_rank_deficient) {
      delta = solve_block(sys, st);
      if (st != SolveStatus::Ok) delta = solve_dense(sys.dense(), sys.rhs, false, st);
    } else {
      delta = solve_dense(sys.dense(), sys.rhs, cfg_.allow_rank_deficient, st);
    }
    if (st != SolveStatus::Ok) {
      if (curv == Curvature::Observed) {
        curv = Curvature::Expected;
        out.expected_curvature = true;
        der = mean_derivatives(d_, th_, phi_e_, spec_, links_, curv, cfg_.threads);
        continue;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(sys.dense());
      const double pivot = ldlt.vectorD().cwiseAbs().minCoeff();
      throw Error(Code::Singular, "mean-step system is singular (smallest pivot " + fmt_double(pivot) + ")");
    }
    Coefficients cand = th_;
    cand.set_eta(eta + delta);
    Eigen::VectorXd Dc;
    const double Ac = mean_term(d_, mean_predictor(d_, cand), phi_e_, spec_, links_, cfg_.threads, &Dc);
    const double Fc = std::isfinite(Ac) ? pen.value(cand.beta, cand.alpha, cand.gamma) - (Ac + C_) : kInf;
    const double bound =
        0.5 * pen.lambda1 * (is_ridge(pen) ? delta.squaredNorm() : delta.tail(d_.L).squaredNorm());
    if (std::isfinite(Fc) && F_ - Fc >= bound) {
      th_ = std::move(cand);
      D_ = std::move(Dc);
      A_ = Ac;
      update_F();
      out.c = c;
      break;
    }
    const double predicted = 0.5 * delta.dot(sys.rhs);
    if (!(predicted > tiny())) {
      out.c = c;
      out.zero_step = true;
      break;
    }
    if (++doublings > cfg_.max_doublings)
      throw Error(Code::Numeric, "mean step: no admissible scaling after " + std::to_string(cfg_.max_doublings) +
                                     " doublings");
    c *= cfg_.c_growth;
  }
  out.theta = th_;
  out.F_after = F_;
  return out;
}

ScalingOutcome Engine::disp_step() {
  ScalingOutcome out;
  out.F_before = F_;
  out.F_after = F_;
  if (!has_dispersion(spec_.member) || d_.k_gamma() == 0) {
    out.theta = th_;
    out.zero_step = true;
    return out;
  }
  const PenaltyConfig& pen = cfg_.penalty;
  const bool ridge = is_ridge(pen);
  const DispDerivatives der = disp_derivatives(d_, D_, th_, spec_, links_, cfg_.threads);
  Eigen::MatrixXd H = der.hess;
  if (Eigen::LLT<Eigen::MatrixXd>(H).info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    Eigen::VectorXd ev = es.eigenvalues().cwiseAbs();
    const double floor = std::max(1e-8 * ev.maxCoeff(), 1e-12);
    ev = ev.cwiseMax(floor);
    H = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
    out.clamped = true;
  }
  Eigen::VectorXd rhs = -der.grad;
  if (ridge) rhs -= pen.lambda1 * th_.gamma;
  double c = 1.0;
  int doublings = 0;
  for (;;) {
    Eigen::MatrixXd M = c * H;
    if (ridge) M.diagonal().array() += pen.lambda1;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) throw Error(Code::Singular, "dispersion-step system is singular");
    const Eigen::VectorXd delta = llt.solve(rhs);
    Coefficients cand = th_;
    cand.gamma += delta;
    Eigen::VectorXd pe;
    double Fc = kInf, Cc = 0.0, Ac = 0.0;
    if (effective_dispersion(d_, disp_predictor(d_, cand), spec_, links_, pe)) {
      Cc = normalizer_or_inf(d_, pe, spec_, cfg_.threads);
      Ac = scaled_sum(D_, pe, cfg_.threads);
      if (std::isfinite(Cc) && std::isfinite(Ac)) Fc = pen.value(cand.beta, cand.alpha, cand.gamma) - (Ac + Cc);
    }
    const double bound = ridge ? 0.5 * pen.lambda1 * delta.squaredNorm() : 0.0;
    if (std::isfinite(Fc) && F_ - Fc >= bound) {
      th_ = std::move(cand);
      phi_e_ = std::move(pe);
      A_ = Ac;
      C_ = Cc;
      update_F();
      out.c = c;
      break;
    }
    const double predicted = 0.5 * delta.dot(rhs);
    if (!(predicted > tiny())) {
      out.c = c;
      out.zero_step = true;
      break;
    }
    if (++doublings > cfg_.max_doublings)
      throw Error(Code::Numeric, "dispersion step: no admissible scaling after " +
                                     std::to_string(cfg_.max_doublings) + " doublings");
    c *= cfg_.c_growth;
  }
  out.theta = th_;
  out.F_after = F_;
  return out;
}

void Engine::index_step() {
  if (!is_cpg(spec_.member) || cfg_.p_grid.size() <= 1) return;
  const Eigen::VectorXd t = mean_predictor(d_, th_);
  const double P = cfg_.penalty.value(th_.beta, th_.alpha, th_.gamma);
  double best_p = spec_.p, best_F = kInf;
  for (double p : cfg_.p_grid) {
    double Fp;
    if (p == spec_.p) {
      Fp = F_;
    } else {
      FamilySpec sp = spec_;
      sp.p = p;
      const double Ap = mean_term(d_, t, phi_e_, sp, links_, cfg_.threads);
      Fp = kInf;
      if (std::isfinite(Ap)) {
        const double Cp = normalizer_or_inf(d_, phi_e_, sp, cfg_.threads);
        if (std::isfinite(Cp)) Fp = P - (Ap + Cp);
      }
    }
    if (Fp < best_F) {
      best_F = Fp;
      best_p = p;
    }
  }
  if (best_p != spec_.p) {
    spec_.p = best_p;
    C_ = normalizer_sum(d_, phi_e_, spec_, cfg_.threads);
    refresh_mean();
    update_F();
  }
}

double snap_to_grid(double p, const std::vector<double>& grid) {
  double best = grid.front();
  for (double g : grid)
    if (std::abs(g - p) < std::abs(best - p)) best = g;
  return best;
}

}  // namespace

void FitConfig::validate(const FamilySpec& spec) const {
  if (!(eps_converge > 0.0)) throw Error(Code::Config, "convergence tolerance must be positive");
  if (max_iters < 1) throw Error(Code::Config, "max_iters must be at least 1");
  if (!(c_growth > 1.0)) throw Error(Code::Config, "scaling growth factor must exceed 1");
  if (is_cpg(spec.member)) {
    for (std::size_t i = 0; i < p_grid.size(); ++i) {
      if (!(p_grid[i] > 1.0 && p_grid[i] < 2.0)) throw Error(Code::Config, "p grid values must lie in (1, 2)");
      if (i > 0 && !(p_grid[i] > p_grid[i - 1])) throw Error(Code::Config, "p grid must be strictly ascending");
    }
  }
}

std::vector<double> make_p_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo)) throw Error(Code::Config, "p grid needs lo <= hi and step > 0");
  std::vector<double> g;
  const long n = std::lround(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) g.push_back(std::round((lo + static_cast<double>(i) * step) * 1e12) / 1e12);
  return g;
}

std::vector<double> default_p_grid() { return make_p_grid(1.05, 1.95, 0.05); }

Eigen::MatrixXd MeanSystem::dense() const {
  const int kb = static_cast<int>(A11.rows());
  const int L = static_cast<int>(A22.rows());
  Eigen::MatrixXd M(kb + L, kb + L);
  M.topLeftCorner(kb, kb) = A11;
  M.topRightCorner(kb, L) = A12;
  M.bottomLeftCorner(L, kb) = A12.transpose();
  M.bottomRightCorner(L, L) = Eigen::MatrixXd(A22);
  return M;
}

MeanSystem build_mean_system(const MeanDerivatives& der, const Coefficients& th, const PenaltyConfig& pen, double c) {
  const int kb = static_cast<int>(der.H11.rows());
  const int L = static_cast<int>(der.H22.size());
  const bool ridge = is_ridge(pen);
  MeanSystem s;
  s.A11 = c * der.H11;
  if (ridge) s.A11.diagonal().array() += pen.lambda1;
  s.A12 = c * der.H12;
  SpMat diag(L, L);
  diag.reserve(Eigen::VectorXi::Constant(L, 1));
  for (int v = 0; v < L; ++v) diag.insert(v, v) = pen.lambda1 + c * der.H22[v];
  s.A22 = pen.lambda2 != 0.0 ? SpMat(diag + pen.lambda2 * pen.W) : diag;
  Eigen::VectorXd pen_grad(kb + L);
  pen_grad.head(kb) = ridge ? Eigen::VectorXd(pen.lambda1 * th.beta) : Eigen::VectorXd::Zero(kb);
  Eigen::VectorXd pa = pen.lambda1 * th.alpha;
  if (pen.lambda2 != 0.0) pa += pen.lambda2 * (pen.W * th.alpha);
  pen_grad.tail(L) = pa;
  s.rhs = -(der.grad + pen_grad);
  s.blocks = pen.blocks;
  if (s.blocks.empty()) {
    s.blocks.emplace_back(L);
    for (int v = 0; v < L; ++v) s.blocks[0][v] = v;
  }
  return s;
}

Eigen::VectorXd solve_dense(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs, bool allow_rank_deficient,
                            SolveStatus& status) {
  status = SolveStatus::Ok;
  if (!allow_rank_deficient) {
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() != Eigen::Success) {
      status = SolveStatus::NotPositiveDefinite;
      return Eigen::VectorXd();
    }
    return llt.solve(rhs);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double scale = ev.cwiseAbs().maxCoeff();
  if (!(scale > 0.0) || ev.minCoeff() < -1e-8 * scale) {
    status = SolveStatus::NotPositiveDefinite;
    return Eigen::VectorXd();
  }
  const Eigen::VectorXd qr = es.eigenvectors().transpose() * rhs;
  Eigen::VectorXd z = Eigen::VectorXd::Zero(ev.size());
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > 1e-10 * scale) z[i] = qr[i] / ev[i];
  return es.eigenvectors() * z;
}

Eigen::VectorXd solve_block(const MeanSystem& sys, SolveStatus& status) {
  status = SolveStatus::Ok;
  const int kb = static_cast<int>(sys.A11.rows());
  const int L = static_cast<int>(sys.A22.rows());
  const Eigen::VectorXd rb = sys.rhs.head(kb);
  const Eigen::VectorXd ra = sys.rhs.tail(L);
  Eigen::MatrixXd SinvA21(L, kb);
  Eigen::VectorXd Sinvr(L);
  std::vector<int> pos(L, -1);
  for (const auto& blk : sys.blocks) {
    const int m = static_cast<int>(blk.size());
    for (int i = 0; i < m; ++i) pos[blk[i]] = i;
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j)
      for (SpMat::InnerIterator it(sys.A22, blk[j]); it; ++it)
        if (pos[it.row()] >= 0) S(pos[it.row()], j) = it.value();
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
      status = SolveStatus::NotPositiveDefinite;
      return Eigen::VectorXd();
    }
    Eigen::MatrixXd B(m, kb);
    Eigen::VectorXd r(m);
    for (int i = 0; i < m; ++i) {
      B.row(i) = sys.A12.col(blk[i]).transpose();
      r[i] = ra[blk[i]];
    }
    const Eigen::MatrixXd SB = llt.solve(B);
    const Eigen::VectorXd Sr = llt.solve(r);
    for (int i = 0; i < m; ++i) {
      SinvA21.row(blk[i]) = SB.row(i);
      Sinvr[blk[i]] = Sr[i];
      pos[blk[i]] = -1;
    }
  }
  Eigen::VectorXd delta(kb + L);
  if (kb > 0) {
    const Eigen::MatrixXd schur = sys.A11 - sys.A12 * SinvA21;
    Eigen::LLT<Eigen::MatrixXd> llt(schur);
    if (llt.info() != Eigen::Success) {
      status = SolveStatus::NotPositiveDefinite;
      return Eigen::VectorXd();
    }
    const Eigen::VectorXd db = llt.solve(rb - sys.A12 * Sinvr);
    delta.head(kb) = db;
    delta.tail(L) = Sinvr - SinvA21 * db;
  } else {
    delta = Sinvr;
  }
  return delta;
}

Coefficients default_init(const Dataset& d, const FamilySpec& spec, const Links& links) {
  Coefficients th = Coefficients::zeros(d.k_beta(), d.L, d.k_gamma());
  if (d.rows() == 0) return th;
  const double ybar = d.w.dot(d.y) / d.w.sum();
  double mu0 = ybar;
  if (spec.member != Member::Normal || links.mean != LinkKind::Identity) mu0 = std::max(ybar, 1e-3);
  const int xi = d.x_intercept();
  if (xi >= 0) th.beta[xi] = link_apply(links.mean, mu0);
  const int zi = d.z_intercept();
  if (zi >= 0 && has_dispersion(spec.member)) {
    double v = 1.0;
    if (spec.member != Member::Normal) v = variance_function(spec, std::max(mu0, 1e-3));
    double acc = 0.0;
    for (int i = 0; i < d.rows(); ++i) acc += d.w[i] * (d.y[i] - ybar) * (d.y[i] - ybar);
    const double phi0 = std::clamp(acc / (v * d.rows()), 1e-4, 1e4);
    th.gamma[zi] = link_apply(links.disp, phi0);
  }
  return th;
}

double objective(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                 const PenaltyConfig& pen, int threads) {
  Eigen::VectorXd phi_e;
  if (!effective_dispersion(d, disp_predictor(d, th), spec, links, phi_e))
    throw Error(Code::Domain, "dispersion is not positive for some row");
  const double C = normalizer_sum(d, phi_e, spec, threads);
  const double A = mean_term(d, mean_predictor(d, th), phi_e, spec, links, threads);
  if (!std::isfinite(A)) throw Error(Code::Domain, "mean leaves the member's range for some row");
  return pen.value(th.beta, th.alpha, th.gamma) - (A + C);
}

Eigen::VectorXd solve_mean_step(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                                const FitConfig& cfg, double c1) {
  Eigen::VectorXd phi_e;
  if (!effective_dispersion(d, disp_predictor(d, th), spec, links, phi_e))
    throw Error(Code::Domain, "dispersion is not positive for some row");
  const MeanDerivatives der = mean_derivatives(d, th, phi_e, spec, links, Curvature::Observed, cfg.threads);
  const MeanSystem sys = build_mean_system(der, th, cfg.penalty, c1);
  SolveStatus st;
  Eigen::VectorXd delta = cfg.use_block_solve && !cfg.allow_rank_deficient
                              ? solve_block(sys, st)
                              : solve_dense(sys.dense(), sys.rhs, cfg.allow_rank_deficient, st);
  if (st != SolveStatus::Ok) {
    Eigen::LDLT<Eigen::MatrixXd> ldlt(sys.dense());
    throw Error(Code::Singular, "mean-step system is not positive definite (smallest pivot " +
                                    fmt_double(ldlt.vectorD().cwiseAbs().minCoeff()) + ")");
  }
  return th.eta() + delta;
}

Eigen::VectorXd solve_disp_step(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                                const FitConfig& cfg, double c2) {
  const DispDerivatives der = disp_derivatives(d, [&] {
    Eigen::VectorXd D, phi_e;
    if (!effective_dispersion(d, disp_predictor(d, th), spec, links, phi_e))
      throw Error(Code::Domain, "dispersion is not positive for some row");
    mean_term(d, mean_predictor(d, th), phi_e, spec, links, cfg.threads, &D);
    return D;
  }(), th, spec, links, cfg.threads);
  Eigen::MatrixXd M = c2 * der.hess;
  Eigen::VectorXd rhs = -der.grad;
  if (is_ridge(cfg.penalty)) {
    M.diagonal().array() += cfg.penalty.lambda1;
    rhs -= cfg.penalty.lambda1 * th.gamma;
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().cwiseAbs().minCoeff() == 0.0)
    throw Error(Code::Singular, "dispersion-step system is singular");
  return th.gamma + ldlt.solve(rhs);
}

ScalingOutcome choose_scaling(StepKind kind, const Dataset& d, const Coefficients& th, const FamilySpec& spec,
                              const Links& links, const FitConfig& cfg) {
  Engine e(d, spec, links, cfg, th);
  return kind == StepKind::Mean ? e.mean_step() : e.disp_step();
}

double update_index(const Dataset& d, const Coefficients& th, const FamilySpec& spec, const Links& links,
                    const std::vector<double>& p_grid, int threads) {
  if (!is_cpg(spec.member) || p_grid.empty()) return spec.p;
  Eigen::VectorXd phi_e;
  if (!effective_dispersion(d, disp_predictor(d, th), spec, links, phi_e))
    throw Error(Code::Domain, "dispersion is not positive for some row");
  const Eigen::VectorXd t = mean_predictor(d, th);
  double best_p = p_grid.front(), best = kInf;
  for (double p : p_grid) {
    FamilySpec sp = spec;
    sp.p = p;
    const double A = mean_term(d, t, phi_e, sp, links, threads);
    double v = kInf;
    if (std::isfinite(A)) {
      const double C = normalizer_or_inf(d, phi_e, sp, threads);
      if (std::isfinite(C)) v = -(A + C);
    }
    if (v < best) {
      best = v;
      best_p = p;
    }
  }
  return best_p;
}

FitResult fit(const Dataset& d, const FamilySpec& spec_in, const Links& links, const FitConfig& cfg,
              const std::optional<Coefficients>& init) {
  spec_in.validate();
  validate_links(spec_in, links);
  cfg.validate(spec_in);
  if (d.rows() == 0) throw Error(Code::InvalidArgument, "dataset is empty");
  d.validate(spec_in);
  if (cfg.penalty.k_beta != d.k_beta() || cfg.penalty.L != d.L || cfg.penalty.k_gamma != d.k_gamma())
    throw Error(Code::InvalidArgument, "penalty dimensions do not match the dataset");

  FamilySpec spec = spec_in;
  if (is_cpg(spec.member) && !cfg.p_grid.empty()) spec.p = snap_to_grid(spec.p, cfg.p_grid);
  Coefficients start = init ? *init : default_init(d, spec, links);
  if (start.beta.size() != d.k_beta() || start.alpha.size() != d.L || start.gamma.size() != d.k_gamma())
    throw Error(Code::InvalidArgument, "initial coefficients do not match the dataset");

  FitResult res;
  res.links = links;
  Engine e(d, spec, links, cfg, std::move(start));
  res.objective_trace.push_back(e.F());
  for (int it = 1; it <= cfg.max_iters; ++it) {
    IterationRecord rec;
    rec.iter = it;
    rec.F_start = e.F();
    const Coefficients before = e.theta();
    try {
      const ScalingOutcome ms = e.mean_step();
      rec.F_mean = e.F();
      rec.c1 = ms.c;
      rec.mean_expected = ms.expected_curvature;
      rec.dalpha_sq = (e.theta().alpha - before.alpha).squaredNorm();
      rec.deta_sq = (e.theta().eta() - before.eta()).squaredNorm();
      const ScalingOutcome ds = e.disp_step();
      rec.F_disp = e.F();
      rec.c2 = ds.c;
      rec.disp_clamped = ds.clamped;
      e.index_step();
    } catch (const Error& err) {
      throw Error(err.code(), std::string(err.what()) + " at iteration " + std::to_string(it));
    }
    rec.F_end = e.F();
    rec.p = e.spec().p;
    rec.dtheta_sq = (e.theta().theta() - before.theta()).squaredNorm();
    res.history.push_back(rec);
    res.objective_trace.push_back(e.F());
    res.iters = it;
    res.c1_final = rec.c1;
    res.c2_final = rec.c2;
    if (rec.F_start - rec.F_end < cfg.eps_converge) {
      res.converged = true;
      break;
    }
  }
  res.theta = e.theta();
  res.spec = e.spec();
  res.p_hat = e.spec().p;
  res.objective = e.F();
  res.neg_log_lik = -(e.A() + e.C());
  return res;
}

FitResult fit_unpenalized(const Dataset& d, const FamilySpec& spec, const Links& links, const FitConfig& base,
                          const std::optional<Coefficients>& init) {
  FitConfig cfg = base;
  cfg.penalty = with_multipliers(base.penalty, 0.0, 0.0, PenaltyMode::SpatialOnly);
  cfg.allow_rank_deficient = true;
  return fit(d, spec, links, cfg, init);
}

FitResult fit_ridge(const Dataset& d, const FamilySpec& spec, const Links& links, const FitConfig& base,
                    double lambda1, const std::optional<Coefficients>& init) {
  if (!(lambda1 >= 0.0)) throw Error(Code::Config, "ridge multiplier must be non-negative");
  FitConfig cfg = base;
  cfg.penalty = with_multipliers(base.penalty, lambda1, 0.0, PenaltyMode::SpatialOnly);
  cfg.allow_rank_deficient = true;
  return fit(d, spec, links, cfg, init);
}

}  // namespace twdglm
