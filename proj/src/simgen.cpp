#include "twdglm/simgen.hpp"

#include <algorithm>
#include <cmath>

#include "twdglm/error.hpp"

namespace twdglm {

namespace {

std::string lattice_label(int r, int c) { return "r" + std::to_string(r) + "c" + std::to_string(c); }

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  // splitmix64 finalizer
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (k + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

PatternKind parse_pattern(const std::string& s) {
  if (s == "block") return PatternKind::Block;
  if (s == "smooth") return PatternKind::Smooth;
  if (s == "hotspot") return PatternKind::Hotspot;
  if (s == "gp" || s == "structured") return PatternKind::StructuredGP;
  throw Error(Code::Config, "unknown pattern '" + s + "' (use block, smooth, hotspot or gp)");
}

std::string pattern_name(PatternKind k) {
  switch (k) {
    case PatternKind::Block: return "block";
    case PatternKind::Smooth: return "smooth";
    case PatternKind::Hotspot: return "hotspot";
    case PatternKind::StructuredGP: return "gp";
  }
  return "?";
}

void PatternSpec::validate() const {
  if (rows < 1 || cols < 1 || size() < 4) throw Error(Code::Config, "lattice needs at least 4 vertices");
  if (!std::isfinite(amplitude)) throw Error(Code::Config, "pattern amplitude must be finite");
  if (!(gp_sigma2 > 0.0) || !(gp_phi > 0.0)) throw Error(Code::Config, "GP variance and decay must be positive");
}

ArealGraph make_lattice(int rows, int cols) {
  ArealGraph g;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) g.add_vertex(lattice_label(r, c));
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) g.add_edge(v, v + 1);
      if (r + 1 < rows) g.add_edge(v, v + cols);
    }
  return g;
}

Eigen::MatrixXd lattice_coords(int rows, int cols) {
  Eigen::MatrixXd xy(rows * cols, 2);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      xy(r * cols + c, 0) = cols > 1 ? static_cast<double>(c) / (cols - 1) : 0.5;
      xy(r * cols + c, 1) = rows > 1 ? static_cast<double>(r) / (rows - 1) : 0.5;
    }
  return xy;
}

Eigen::VectorXd draw_gp(const PatternSpec& spec, std::mt19937_64& rng) {
  const Eigen::MatrixXd xy = lattice_coords(spec.rows, spec.cols);
  const int L = spec.size();
  Eigen::MatrixXd K(L, L);
  for (int i = 0; i < L; ++i)
    for (int j = 0; j < L; ++j) K(i, j) = spec.gp_sigma2 * std::exp(-spec.gp_phi * (xy.row(i) - xy.row(j)).squaredNorm());
  // Near-singular for dense lattices; factor through the eigenbasis.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K);
  const Eigen::MatrixXd F = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::normal_distribution<double> nd;
  Eigen::VectorXd z(L);
  for (int i = 0; i < L; ++i) z[i] = nd(rng);
  return F * z;
}

Eigen::VectorXd make_pattern(const PatternSpec& spec) {
  spec.validate();
  const int L = spec.size();
  const double a = spec.amplitude;
  const Eigen::MatrixXd xy = lattice_coords(spec.rows, spec.cols);
  Eigen::VectorXd v(L);
  switch (spec.kind) {
    case PatternKind::Block:
      for (int i = 0; i < L; ++i) v[i] = (i / spec.cols) < (spec.rows + 1) / 2 ? a : -a;
      break;
    case PatternKind::Smooth:
      for (int i = 0; i < L; ++i) v[i] = -a + 2.0 * a * xy(i, 1);
      break;
    case PatternKind::Hotspot: {
      const double centres[2][2] = {{0.25, 0.25}, {0.75, 0.75}};
      const double radius = 0.25 + 1e-9;
      for (int i = 0; i < L; ++i) {
        v[i] = -0.5 * a;
        for (auto& c : centres)
          if (std::hypot(xy(i, 0) - c[0], xy(i, 1) - c[1]) <= radius) v[i] = a;
      }
      break;
    }
    case PatternKind::StructuredGP: {
      std::mt19937_64 rng(spec.seed);
      v = draw_gp(spec, rng);
      break;
    }
  }
  v.array() -= v.mean();
  return v;
}

Covariates gen_covariates(int n, std::uint64_t seed) {
  if (n < 1) throw Error(Code::InvalidArgument, "n must be at least 1");
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b1(0.5);
  std::binomial_distribution<int> b4(4, 0.5);
  std::normal_distribution<double> nd(0.0, std::sqrt(0.1));
  auto draw = [&] {
    RowMatrix M(n, 4);
    for (int i = 0; i < n; ++i) {
      M(i, 0) = b1(rng) ? 1.0 : 0.0;
      M(i, 1) = b4(rng);
      M(i, 2) = nd(rng);
      M(i, 3) = nd(rng);
    }
    return M;
  };
  Covariates c;
  c.X = draw();
  c.Z = draw();
  return c;
}

double sample_cpg(double mu, double phi, double p, std::mt19937_64& rng) {
  if (!(mu > 0.0) || !(phi > 0.0) || !(p > 1.0 && p < 2.0))
    throw Error(Code::Domain, "sample_cpg needs mu > 0, phi > 0 and 1 < p < 2");
  const double lambda = std::pow(mu, 2.0 - p) / (phi * (2.0 - p));
  std::poisson_distribution<long> pois(lambda);
  const long N = pois(rng);
  if (N == 0) return 0.0;
  const double shape = (2.0 - p) / (p - 1.0);
  const double scale = phi * (p - 1.0) * std::pow(mu, p - 1.0);
  // A sum of N iid Gamma(shape, scale) is Gamma(N shape, scale).
  std::gamma_distribution<double> gd(static_cast<double>(N) * shape, scale);
  return gd(rng);
}

double sample_cpg(double mu, double phi, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_cpg(mu, phi, p, rng);
}

SimResult make_dataset(const SimConfig& cfg) {
  cfg.pattern.validate();
  if (cfg.n < 1) throw Error(Code::Config, "n must be at least 1");
  if (!(cfg.target_zero_prop > 0.0 && cfg.target_zero_prop < 1.0))
    throw Error(Code::Config, "target zero proportion must lie in (0, 1)");
  if (!(cfg.p > 1.0 && cfg.p < 2.0)) throw Error(Code::Config, "simulation index must lie in (1, 2)");
  if (cfg.truth.beta_slopes.size() != 4 || cfg.truth.gamma.size() != 5)
    throw Error(Code::Config, "simulation truth needs 4 mean slopes and 5 dispersion coefficients");

  const int n = cfg.n;
  const int L = cfg.pattern.size();
  SimResult out;
  out.graph = make_lattice(cfg.pattern.rows, cfg.pattern.cols);

  Dataset& d = out.data;
  d.L = L;
  d.y = Eigen::VectorXd::Zero(n);
  d.w = Eigen::VectorXd::Ones(n);
  d.vertex.assign(n, 0);

  std::mt19937_64 vrng(derive_seed(cfg.seed, 1));
  std::uniform_int_distribution<int> ud(0, L - 1);
  for (int attempt = 0;; ++attempt) {
    std::vector<int> count(L, 0);
    for (int i = 0; i < n; ++i) ++count[d.vertex[i] = ud(vrng)];
    if (n < L || std::find(count.begin(), count.end(), 0) == count.end()) break;
    if (attempt == 1000) throw Error(Code::Calibration, "could not give every vertex a row");
  }

  const Covariates cov = gen_covariates(n, derive_seed(cfg.seed, 2));
  d.X.resize(n, 5);
  d.Z.resize(n, 5);
  d.X.col(0).setOnes();
  d.Z.col(0).setOnes();
  d.X.rightCols(4) = cov.X;
  d.Z.rightCols(4) = cov.Z;
  d.x_names = {"(Intercept)", "x_1", "x_2", "x_3", "x_4"};
  d.z_names = {"(Intercept)", "z_1", "z_2", "z_3", "z_4"};

  PatternSpec ps = cfg.pattern;
  ps.seed = derive_seed(cfg.seed, 3);
  Coefficients& th = out.oracle;
  th.alpha = make_pattern(ps);
  th.beta = Eigen::VectorXd::Zero(5);
  for (int k = 0; k < 4; ++k) th.beta[k + 1] = cfg.truth.beta_slopes[k];
  th.gamma = Eigen::Map<const Eigen::VectorXd>(cfg.truth.gamma.data(), 5);

  const Eigen::VectorXd rest = d.X * th.beta + [&] {
    Eigen::VectorXd a(n);
    for (int i = 0; i < n; ++i) a[i] = th.alpha[d.vertex[i]];
    return a;
  }();
  const Eigen::VectorXd phi = (d.Z * th.gamma).array().exp();
  const double p = cfg.p;
  auto zero_prop = [&](double b0) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) {
      const double lambda = std::exp((2.0 - p) * (b0 + rest[i])) / (phi[i] * (2.0 - p));
      acc += std::exp(-lambda);
    }
    return acc / n;
  };
  double lo = -20.0, hi = 20.0;
  const double target = cfg.target_zero_prop;
  if (zero_prop(lo) < target || zero_prop(hi) > target)
    throw Error(Code::Calibration, "zero proportion " + std::to_string(target) + " is unreachable with intercept in [-20, 20]");
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    (zero_prop(mid) > target ? lo : hi) = mid;
  }
  const double b0 = 0.5 * (lo + hi);
  out.expected_zero_prop = zero_prop(b0);
  if (std::fabs(out.expected_zero_prop - target) > 0.005)
    throw Error(Code::Calibration, "intercept calibration missed the zero proportion target");
  th.beta[0] = b0;
  out.intercept = b0;

  std::mt19937_64 yrng(derive_seed(cfg.seed, 4));
  int zeros = 0;
  for (int i = 0; i < n; ++i) {
    d.y[i] = sample_cpg(std::exp(b0 + rest[i]), phi[i], p, yrng);
    zeros += d.y[i] == 0.0;
  }
  out.realized_zero_prop = static_cast<double>(zeros) / n;
  return out;
}

SSE sse(const Coefficients& oracle, const Coefficients& hat) {
  if (oracle.beta.size() != hat.beta.size() || oracle.alpha.size() != hat.alpha.size() ||
      oracle.gamma.size() != hat.gamma.size())
    throw Error(Code::InvalidArgument, "coefficient dimensions differ");
  SSE s;
  s.mean_part = (oracle.beta - hat.beta).squaredNorm();
  s.spatial_part = (oracle.alpha - hat.alpha).squaredNorm();
  s.disp_part = (oracle.gamma - hat.gamma).squaredNorm();
  s.total = s.mean_part + s.spatial_part + s.disp_part;
  return s;
}

}  // namespace twdglm
