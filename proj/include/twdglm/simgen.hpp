#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "twdglm/graph.hpp"
#include "twdglm/likelihood.hpp"

namespace twdglm {

enum class PatternKind { Block, Smooth, Hotspot, StructuredGP };

PatternKind parse_pattern(const std::string& s);
std::string pattern_name(PatternKind k);

struct PatternSpec {
  PatternKind kind = PatternKind::Block;
  int rows = 5;
  int cols = 5;
  double amplitude = 1.0;
  double gp_sigma2 = 1.5;
  double gp_phi = 3.0;
  std::uint64_t seed = 1;

  int size() const { return rows * cols; }
  void validate() const;
};

// Rook adjacency; vertex r * cols + c is labelled "r<r>c<c>".
ArealGraph make_lattice(int rows, int cols);
// Unit-square coordinates per vertex.
Eigen::MatrixXd lattice_coords(int rows, int cols);

// Centred to mean zero.
Eigen::VectorXd make_pattern(const PatternSpec& spec);
// One zero-mean draw of the squared-exponential field, not centred.
Eigen::VectorXd draw_gp(const PatternSpec& spec, std::mt19937_64& rng);

struct Covariates {
  RowMatrix X;  // n x 4, no intercept
  RowMatrix Z;
};

// Columns: Bin(1, .5), Bin(4, .5), N(0, .1), N(0, .1) (variance), X then Z.
Covariates gen_covariates(int n, std::uint64_t seed);

double sample_cpg(double mu, double phi, double p, std::mt19937_64& rng);
double sample_cpg(double mu, double phi, double p, std::uint64_t seed);

struct SimTruth {
  std::vector<double> beta_slopes{0.5, -0.3, 1.0, -1.0};
  std::vector<double> gamma{0.0, 0.2, -0.1, 0.3, -0.3};  // intercept first
};

struct SimConfig {
  int n = 10000;
  PatternSpec pattern;
  SimTruth truth;
  double p = 1.5;
  double target_zero_prop = 0.15;
  std::uint64_t seed = 1;
};

struct SimResult {
  Dataset data;
  Coefficients oracle;
  ArealGraph graph;
  double intercept = 0.0;
  double expected_zero_prop = 0.0;
  double realized_zero_prop = 0.0;
};

SimResult make_dataset(const SimConfig& cfg);

struct SSE {
  double total = 0.0;
  double mean_part = 0.0;
  double spatial_part = 0.0;
  double disp_part = 0.0;
};

SSE sse(const Coefficients& oracle, const Coefficients& hat);

// Independent stream `k` derived from `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k);

}  // namespace twdglm
