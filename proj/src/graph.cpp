#include "twdglm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "twdglm/error.hpp"

namespace twdglm {

ArealGraph::ArealGraph(int n_vertices) {
  for (int i = 0; i < n_vertices; ++i) add_vertex(std::to_string(i));
}

ArealGraph::ArealGraph(std::vector<std::string> labels, const std::vector<std::pair<int, int>>& edges) {
  for (auto& l : labels) add_vertex(l);
  for (auto [a, b] : edges) add_edge(a, b);
}

int ArealGraph::index_of(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

int ArealGraph::add_vertex(const std::string& label) {
  auto it = index_.find(label);
  if (it != index_.end()) return it->second;
  const int id = size();
  labels_.push_back(label);
  adj_.emplace_back();
  index_.emplace(label, id);
  return id;
}

void ArealGraph::add_edge(int a, int b) {
  if (a < 0 || b < 0 || a >= size() || b >= size())
    throw Error(Code::InvalidArgument, "edge endpoint out of range");
  if (a == b) throw Error(Code::Schema, "self-loop on vertex '" + labels_[a] + "'");
  if (std::find(adj_[a].begin(), adj_[a].end(), b) != adj_[a].end())
    throw Error(Code::Schema, "duplicate edge " + labels_[a] + " - " + labels_[b]);
  edges_.emplace_back(std::min(a, b), std::max(a, b));
  adj_[a].push_back(b);
  adj_[b].push_back(a);
}

std::vector<int> ArealGraph::components(int* count) const {
  std::vector<int> comp(size(), -1);
  int next = 0;
  for (int s = 0; s < size(); ++s) {
    if (comp[s] >= 0) continue;
    std::deque<int> q{s};
    comp[s] = next;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int u : adj_[v])
        if (comp[u] < 0) {
          comp[u] = next;
          q.push_back(u);
        }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

namespace {

SpMat laplacian_from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> deg(n, 0.0);
  for (auto [a, b] : edges) {
    trip.emplace_back(a, b, -1.0);
    trip.emplace_back(b, a, -1.0);
    deg[a] += 1.0;
    deg[b] += 1.0;
  }
  for (int i = 0; i < n; ++i) trip.emplace_back(i, i, deg[i]);
  SpMat m(n, n);
  m.setFromTriplets(trip.begin(), trip.end());
  return m;
}

// BFS distances inside the vertex subset `alive`.
std::vector<int> bfs_within(const ArealGraph& g, int src, const std::vector<char>& alive) {
  std::vector<int> dist(g.size(), -1);
  std::deque<int> q{src};
  dist[src] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int u : g.neighbours()[v])
      if (alive[u] && dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push_back(u);
      }
  }
  return dist;
}

}  // namespace

SpMat build_laplacian(const ArealGraph& g) { return laplacian_from_edges(g.size(), g.edges()); }

ApproxLaplacian approximate_laplacian(const ArealGraph& g, int max_block) {
  if (max_block < 1) throw Error(Code::InvalidArgument, "max_block must be at least 1");
  const int n = g.size();
  ApproxLaplacian out;
  std::vector<int> block_of(n, -1);
  std::vector<char> alive(n, 1);

  // Peel blocks off each remaining piece: start from a pseudo-peripheral
  // vertex and grow breadth-first until the block is full.
  for (int s = 0; s < n; ++s) {
    while (alive[s]) {
      std::vector<int> d = bfs_within(g, s, alive);
      int far = s;
      for (int v = 0; v < n; ++v)
        if (d[v] > d[far] || (d[v] == d[far] && v < far)) far = v;
      std::vector<int> piece;
      for (int v = 0; v < n; ++v)
        if (d[v] >= 0) piece.push_back(v);
      std::vector<int> block;
      if (static_cast<int>(piece.size()) <= max_block) {
        block = piece;
      } else {
        std::vector<int> dd = bfs_within(g, far, alive);
        std::vector<int> order(piece);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dd[a] < dd[b]; });
        block.assign(order.begin(), order.begin() + max_block);
      }
      std::sort(block.begin(), block.end());
      const int id = static_cast<int>(out.blocks.size());
      for (int v : block) {
        block_of[v] = id;
        alive[v] = 0;
      }
      out.blocks.push_back(std::move(block));
    }
  }

  std::vector<std::pair<int, int>> kept;
  for (auto [a, b] : g.edges()) {
    if (block_of[a] == block_of[b])
      kept.emplace_back(a, b);
    else
      ++out.edges_cut;
  }
  out.laplacian = laplacian_from_edges(n, kept);
  for (auto& b : out.blocks) out.permutation.insert(out.permutation.end(), b.begin(), b.end());
  return out;
}

PenaltyMode parse_penalty_mode(const std::string& s) {
  if (s == "spatial") return PenaltyMode::SpatialOnly;
  if (s == "spatial+ridge") return PenaltyMode::SpatialPlusRidge;
  throw Error(Code::Config, "unknown penalty '" + s + "' (use spatial or spatial+ridge)");
}

std::string penalty_mode_name(PenaltyMode m) { return m == PenaltyMode::SpatialOnly ? "spatial" : "spatial+ridge"; }

Eigen::MatrixXd PenaltyConfig::I0() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i)
    if (A[i]) m(i, i) = 1.0;
  return m;
}

Eigen::MatrixXd PenaltyConfig::W0() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim(), dim());
  m.block(k_beta, k_beta, L, L) = Eigen::MatrixXd(W);
  return m;
}

double PenaltyConfig::value(const Eigen::VectorXd& beta, const Eigen::VectorXd& alpha,
                            const Eigen::VectorXd& gamma) const {
  double q = lambda1 * alpha.squaredNorm();
  if (lambda2 != 0.0) q += lambda2 * alpha.dot(W * alpha);
  if (mode == PenaltyMode::SpatialPlusRidge) q += lambda1 * (beta.squaredNorm() + gamma.squaredNorm());
  return 0.5 * q;
}

double PenaltyConfig::value(const Eigen::VectorXd& theta) const {
  return value(theta.head(k_beta), theta.segment(k_beta, L), theta.tail(k_gamma));
}

PenaltyConfig with_multipliers(const PenaltyConfig& base, double lambda1, double lambda2) {
  return with_multipliers(base, lambda1, lambda2, base.mode);
}

PenaltyConfig with_multipliers(const PenaltyConfig& base, double lambda1, double lambda2, PenaltyMode mode) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2))
    throw Error(Code::Config, "penalty multipliers must be finite and non-negative");
  PenaltyConfig p = base;
  p.mode = mode;
  p.lambda1 = lambda1;
  p.lambda2 = lambda2;
  p.A.assign(p.dim(), mode == PenaltyMode::SpatialPlusRidge ? 1 : 0);
  for (int i = 0; i < p.L; ++i) p.A[p.k_beta + i] = 1;
  return p;
}

PenaltyConfig assemble_penalty(PenaltyMode mode, double lambda1, double lambda2, int k_beta, const ArealGraph& g,
                               int k_gamma, int max_block) {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2))
    throw Error(Code::Config, "penalty multipliers must be finite and non-negative");
  if (k_beta < 0 || k_gamma < 0 || g.size() < 1) throw Error(Code::InvalidArgument, "penalty dimensions must be positive");
  PenaltyConfig pc;
  pc.mode = mode;
  pc.lambda1 = lambda1;
  pc.lambda2 = lambda2;
  pc.k_beta = k_beta;
  pc.L = g.size();
  pc.k_gamma = k_gamma;
  if (max_block > 0 && max_block < g.size()) {
    ApproxLaplacian ap = approximate_laplacian(g, max_block);
    pc.W = std::move(ap.laplacian);
    pc.blocks = std::move(ap.blocks);
  } else {
    pc.W = build_laplacian(g);
    int nc = 0;
    std::vector<int> comp = g.components(&nc);
    pc.blocks.assign(nc, {});
    for (int v = 0; v < g.size(); ++v) pc.blocks[comp[v]].push_back(v);
  }
  pc.A.assign(pc.dim(), mode == PenaltyMode::SpatialPlusRidge ? 1 : 0);
  for (int i = 0; i < pc.L; ++i) pc.A[k_beta + i] = 1;
  return pc;
}

}  // namespace twdglm
