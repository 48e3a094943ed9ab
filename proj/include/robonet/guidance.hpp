#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <utility>

#include "robonet/communicator.hpp"
#include "robonet/dynamics.hpp"
#include "robonet/netgraph.hpp"

namespace robonet {

using NeighborPositions = std::map<AgentId, Vec>;

struct GuidanceConfig {
  AgentId agent = 0;
  bool is_leader = false;
  double period = 0.01;  // seconds per guidance round
  double gain = 1.0;     // containment gain
};

/// Desired inter-robot distances. Stored symmetrically: declaring (i, j, d)
/// also declares (j, i, d).
class FormationSpec {
 public:
  void add_pair(AgentId i, AgentId j, double distance);
  std::optional<double> distance(AgentId i, AgentId j) const;
  const std::map<std::pair<AgentId, AgentId>, double>& pairs() const { return pairs_; }

  /// Undirected graph whose edges are exactly the declared pairs.
  CommGraph graph(int n) const;
  /// Throws SpecError unless every declared pair is an edge of `g`.
  void check_against(const CommGraph& g) const;

  /// Regular hexagon with the given side: the six cycle pairs at `side`
  /// plus the six next-nearest pairs at sqrt(3) * side.
  static FormationSpec hexagon(double side = 1.0);
  /// Vertex k of that hexagon, centred on the origin.
  static Eigen::Vector2d hexagon_vertex(int k, double side = 1.0);

 private:
  std::map<std::pair<AgentId, AgentId>, double> pairs_;
};

Vec rendezvous_velocity(const Vec& own, const NeighborPositions& neigh);
Vec containment_velocity(const Vec& own, const NeighborPositions& neigh, bool is_leader,
                         double gain);
Vec formation_velocity(const Vec& own, const NeighborPositions& neigh, const FormationSpec& spec,
                       AgentId self);

/// sum over declared unordered pairs of (|x_i - x_j| - d_ij)^2.
double formation_error(const std::vector<Vec>& positions, const FormationSpec& spec);
/// 1/4 sum over declared unordered pairs of (|x_i - x_j|^2 - d_ij^2)^2.
double formation_potential(const std::vector<Vec>& positions, const FormationSpec& spec);

using VelocityLaw = std::function<Vec(const Vec& own, const NeighborPositions& neigh)>;

VelocityLaw make_rendezvous_law();
VelocityLaw make_containment_law(bool is_leader, double gain);
VelocityLaw make_formation_law(FormationSpec spec, AgentId self);

/// Position message as carried on the bus.
Value position_payload(const Vec& p);
Vec position_from_payload(const Value& v);

/// Send half of a guidance round: broadcast own position to out-neighbors.
void guidance_publish(Communicator& comm, const Vec& pose, std::uint64_t round);
/// Receive half: collect neighbor positions (absent ones are skipped) and
/// evaluate the law.
Vec guidance_evaluate(Communicator& comm, const Vec& pose, const VelocityLaw& law,
                      std::uint64_t round, double timeout_s = 5.0);

/// One full exchange -> evaluate round.
Vec guidance_step(Communicator& comm, const Vec& pose, const VelocityLaw& law,
                  std::uint64_t round, double timeout_s = 5.0);

}  // namespace robonet
