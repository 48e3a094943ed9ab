#include "robonet/netgraph.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <string>

#include "robonet/error.hpp"
#include "robonet/random.hpp"

namespace robonet {

CommGraph::CommGraph(int n) : n_(n) {
  if (n < 0) throw InvalidParameterError("graph size must be non-negative");
  adj_.assign(static_cast<std::size_t>(n) * n, 0);
}

CommGraph CommGraph::from_matrix(const std::vector<std::vector<int>>& rows) {
  CommGraph g(static_cast<int>(rows.size()));
  for (int i = 0; i < g.n_; ++i) {
    if (static_cast<int>(rows[i].size()) != g.n_)
      throw InvalidParameterError("adjacency matrix must be square");
    for (int j = 0; j < g.n_; ++j) {
      int v = rows[i][j];
      if (v != 0 && v != 1) throw InvalidParameterError("adjacency entries must be 0 or 1");
      if (v == 1) g.add_edge(i, j);
    }
  }
  return g;
}

CommGraph CommGraph::from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                                bool undirected) {
  CommGraph g(n);
  for (auto [a, b] : edges) {
    if (undirected)
      g.add_undirected_edge(a, b);
    else
      g.add_edge(a, b);
  }
  return g;
}

CommGraph CommGraph::complete(int n) {
  CommGraph g(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) g.add_edge(i, j);
  return g;
}

CommGraph CommGraph::cycle(int n, bool undirected) {
  CommGraph g(n);
  if (n < 2) return g;
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    if (undirected)
      g.add_undirected_edge(i, j);
    else
      g.add_edge(i, j);
  }
  return g;
}

void CommGraph::check_index(AgentId i) const {
  if (i < 0 || i >= n_)
    throw InvalidAgentError("agent " + std::to_string(i) + " outside graph of size " +
                            std::to_string(n_));
}

bool CommGraph::has_edge(AgentId from, AgentId to) const {
  check_index(from);
  check_index(to);
  return adj_[static_cast<std::size_t>(from) * n_ + to] != 0;
}

void CommGraph::add_edge(AgentId from, AgentId to) {
  check_index(from);
  check_index(to);
  if (from == to) throw InvalidParameterError("self-loops are not allowed");
  adj_[static_cast<std::size_t>(from) * n_ + to] = 1;
}

void CommGraph::add_undirected_edge(AgentId a, AgentId b) {
  add_edge(a, b);
  add_edge(b, a);
}

bool CommGraph::is_symmetric() const {
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      if (adj_[i * n_ + j] != adj_[j * n_ + i]) return false;
  return true;
}

std::size_t CommGraph::edge_count() const {
  return static_cast<std::size_t>(std::count(adj_.begin(), adj_.end(), 1));
}

bool CommGraph::is_subgraph_of(const CommGraph& other) const {
  if (n_ != other.n_) return false;
  for (std::size_t k = 0; k < adj_.size(); ++k)
    if (adj_[k] && !other.adj_[k]) return false;
  return true;
}

std::vector<std::vector<int>> CommGraph::matrix() const {
  std::vector<std::vector<int>> m(n_, std::vector<int>(n_, 0));
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j) m[i][j] = adj_[i * n_ + j];
  return m;
}

NeighborSets neighbor_sets(const CommGraph& g, AgentId agent) {
  if (agent < 0 || agent >= g.size())
    throw InvalidAgentError("agent " + std::to_string(agent) + " outside graph");
  NeighborSets out;
  for (int j = 0; j < g.size(); ++j) {
    if (g.has_edge(j, agent)) out.in.push_back(j);
    if (g.has_edge(agent, j)) out.out.push_back(j);
  }
  return out;
}

CommGraph erdos_renyi(int n, double p, std::uint64_t seed, bool require_connected) {
  if (n < 1) throw InvalidParameterError("erdos_renyi needs n >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidParameterError("edge probability must lie in [0,1]");
  std::mt19937_64 rng(seed);
  constexpr int kMaxAttempts = 1000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    CommGraph g(n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (unit_from_bits(rng()) < p) g.add_undirected_edge(i, j);
    if (!require_connected || is_connected(g)) return g;
  }
  throw InvalidParameterError("no connected Erdos-Renyi graph after 1000 attempts (n=" +
                              std::to_string(n) + ", p=" + std::to_string(p) + ")");
}

namespace {

std::vector<int> bfs_distances(const CommGraph& g, int source, bool reverse) {
  std::vector<int> dist(g.size(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v = 0; v < g.size(); ++v) {
      bool edge = reverse ? g.has_edge(v, u) : g.has_edge(u, v);
      if (edge && dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

}  // namespace

bool is_connected(const CommGraph& g) {
  if (g.size() <= 1) return true;
  auto fwd = bfs_distances(g, 0, false);
  auto bwd = bfs_distances(g, 0, true);
  return std::none_of(fwd.begin(), fwd.end(), [](int d) { return d < 0; }) &&
         std::none_of(bwd.begin(), bwd.end(), [](int d) { return d < 0; });
}

int diameter(const CommGraph& g) {
  int best = 0;
  for (int s = 0; s < g.size(); ++s) {
    for (int d : bfs_distances(g, s, false)) {
      if (d < 0) return -1;
      best = std::max(best, d);
    }
  }
  return best;
}

EdgeSchedule::EdgeSchedule(CommGraph base, double activation_prob, std::uint64_t seed)
    : base_(std::move(base)), activation_prob_(activation_prob), seed_(seed) {
  if (!(activation_prob >= 0.0 && activation_prob <= 1.0))
    throw InvalidParameterError("activation probability must lie in [0,1]");
}

EdgeSchedule::EdgeSchedule(CommGraph base, Generator generator)
    : base_(std::move(base)), generator_(std::move(generator)) {}

CommGraph EdgeSchedule::sample(std::uint64_t round) const {
  if (generator_) {
    CommGraph g = generator_(round);
    if (!g.is_subgraph_of(base_))
      throw TopologyError("scheduled graph at round " + std::to_string(round) +
                          " is not a subgraph of the base graph");
    return g;
  }
  if (activation_prob_ >= 1.0) return base_;
  const int n = base_.size();
  CommGraph g(n);
  if (activation_prob_ <= 0.0) return g;

  const bool joint = base_.is_symmetric();
  const std::uint64_t round_key = mix_seed(seed_, round);
  auto draw = [&](int i, int j) {
    auto key = mix_seed(round_key, static_cast<std::uint64_t>(i) * n + j);
    return unit_from_bits(key) < activation_prob_;
  };
  for (int i = 0; i < n; ++i) {
    for (int j = joint ? i + 1 : 0; j < n; ++j) {
      if (!base_.has_edge(i, j)) continue;
      if (!draw(i, j)) continue;
      if (joint)
        g.add_undirected_edge(i, j);
      else
        g.add_edge(i, j);
    }
  }
  return g;
}

CommGraph sample_active(const EdgeSchedule& schedule, std::uint64_t round) {
  return schedule.sample(round);
}

}  // namespace robonet
