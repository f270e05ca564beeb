#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace twdglm {

class ArealGraph {
 public:
  ArealGraph() = default;
  explicit ArealGraph(int n_vertices);
  ArealGraph(std::vector<std::string> labels, const std::vector<std::pair<int, int>>& edges);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& neighbours() const { return adj_; }
  int degree(int v) const { return static_cast<int>(adj_[v].size()); }

  // -1 when the label is unknown.
  int index_of(const std::string& label) const;
  int add_vertex(const std::string& label);
  // Duplicates and self-loops are rejected.
  void add_edge(int a, int b);

  // Component id per vertex, numbered in order of first vertex.
  std::vector<int> components(int* count = nullptr) const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
  std::unordered_map<std::string, int> index_;
};

using SpMat = Eigen::SparseMatrix<double>;

SpMat build_laplacian(const ArealGraph& g);

struct ApproxLaplacian {
  SpMat laplacian;               // Laplacian of the pruned graph, original vertex order
  std::vector<int> permutation;  // permutation[i] = original vertex at position i
  std::vector<std::vector<int>> blocks;
  int edges_cut = 0;
};

ApproxLaplacian approximate_laplacian(const ArealGraph& g, int max_block);

enum class PenaltyMode { SpatialOnly, SpatialPlusRidge };

PenaltyMode parse_penalty_mode(const std::string& s);
std::string penalty_mode_name(PenaltyMode m);

struct PenaltyConfig {
  PenaltyMode mode = PenaltyMode::SpatialOnly;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int k_beta = 0;
  int L = 0;
  int k_gamma = 0;
  SpMat W;                          // Laplacian used in the alpha block
  std::vector<std::vector<int>> blocks;  // vertex groups with no W coupling between groups
  std::vector<unsigned char> A;     // mask over Theta = (beta, alpha, gamma)

  int dim() const { return k_beta + L + k_gamma; }
  Eigen::MatrixXd I0() const;
  Eigen::MatrixXd W0() const;
  // 1/2 (A Theta)' (l1 I0 + l2 W0) (A Theta)
  double value(const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha, const Eigen::VectorXd& gamma) const;
  double value(const Eigen::VectorXd& theta) const;
};

// Same structure with new multipliers, optionally switching the mode.
PenaltyConfig with_multipliers(const PenaltyConfig& base, double lambda1, double lambda2);
PenaltyConfig with_multipliers(const PenaltyConfig& base, double lambda1, double lambda2, PenaltyMode mode);

// max_block <= 0 or >= L keeps the exact Laplacian.
PenaltyConfig assemble_penalty(PenaltyMode mode, double lambda1, double lambda2, int k_beta, const ArealGraph& g,
                               int k_gamma, int max_block = 0);

}  // namespace twdglm
