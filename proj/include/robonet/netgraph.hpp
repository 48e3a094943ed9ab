#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace robonet {

using AgentId = int;

/// Directed communication graph over agents {0..n-1} stored as a dense 0/1
/// matrix. Entry (i, j) set means i sends to j. Self-loops are rejected.
class CommGraph {
 public:
  CommGraph() = default;
  explicit CommGraph(int n);

  static CommGraph from_matrix(const std::vector<std::vector<int>>& rows);
  static CommGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges,
                              bool undirected);
  static CommGraph complete(int n);
  static CommGraph cycle(int n, bool undirected);

  int size() const { return n_; }
  bool has_edge(AgentId from, AgentId to) const;
  void add_edge(AgentId from, AgentId to);
  void add_undirected_edge(AgentId a, AgentId b);

  bool is_symmetric() const;
  std::size_t edge_count() const;
  /// True if every edge of this graph is also an edge of `other`.
  bool is_subgraph_of(const CommGraph& other) const;
  std::vector<std::vector<int>> matrix() const;

  bool operator==(const CommGraph&) const = default;

 private:
  void check_index(AgentId i) const;

  int n_ = 0;
  std::vector<std::uint8_t> adj_;
};

struct NeighborSets {
  std::vector<AgentId> in;
  std::vector<AgentId> out;
};

/// In- and out-neighbors of `agent`, each sorted ascending.
NeighborSets neighbor_sets(const CommGraph& g, AgentId agent);

/// Undirected G(n, p). With `require_connected` the draw is repeated (up to
/// 1000 attempts) until the graph is connected.
CommGraph erdos_renyi(int n, double p, std::uint64_t seed, bool require_connected = false);

/// Strong connectivity (plain connectivity for symmetric graphs).
bool is_connected(const CommGraph& g);

/// Longest shortest directed path; -1 if not strongly connected.
int diameter(const CommGraph& g);

/// Per-round edge activation over a fixed base graph. Either i.i.d.
/// Bernoulli activation (undirected edges toggled jointly) or an explicit
/// round -> graph function whose output must stay inside the base graph.
class EdgeSchedule {
 public:
  using Generator = std::function<CommGraph(std::uint64_t round)>;

  EdgeSchedule() = default;
  EdgeSchedule(CommGraph base, double activation_prob, std::uint64_t seed);
  EdgeSchedule(CommGraph base, Generator generator);

  static EdgeSchedule always(CommGraph base) { return {std::move(base), 1.0, 0}; }

  const CommGraph& base() const { return base_; }
  double activation_prob() const { return activation_prob_; }
  std::uint64_t seed() const { return seed_; }

  CommGraph sample(std::uint64_t round) const;

 private:
  CommGraph base_;
  double activation_prob_ = 1.0;
  std::uint64_t seed_ = 0;
  Generator generator_;
};

CommGraph sample_active(const EdgeSchedule& schedule, std::uint64_t round);

}  // namespace robonet
