#include "robonet/guidance.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "robonet/error.hpp"

namespace robonet {

void FormationSpec::add_pair(AgentId i, AgentId j, double distance) {
  if (i == j) throw SpecError("formation pair needs two distinct agents");
  if (!(distance >= 0.0) || !std::isfinite(distance))
    throw SpecError("formation distance must be finite and non-negative");
  pairs_[{i, j}] = distance;
  pairs_[{j, i}] = distance;
}

std::optional<double> FormationSpec::distance(AgentId i, AgentId j) const {
  auto it = pairs_.find({i, j});
  if (it == pairs_.end()) return std::nullopt;
  return it->second;
}

CommGraph FormationSpec::graph(int n) const {
  CommGraph g(n);
  for (const auto& [key, d] : pairs_) g.add_edge(key.first, key.second);
  return g;
}

void FormationSpec::check_against(const CommGraph& g) const {
  for (const auto& [key, d] : pairs_) {
    auto [i, j] = key;
    if (i < 0 || j < 0 || i >= g.size() || j >= g.size() || !g.has_edge(i, j))
      throw SpecError("formation pair (" + std::to_string(i) + "," + std::to_string(j) +
                      ") is not a communication edge");
  }
}

Eigen::Vector2d FormationSpec::hexagon_vertex(int k, double side) {
  const double a = std::numbers::pi / 3.0 * k;
  return {side * std::cos(a), side * std::sin(a)};
}

FormationSpec FormationSpec::hexagon(double side) {
  FormationSpec spec;
  for (int k = 0; k < 6; ++k) {
    spec.add_pair(k, (k + 1) % 6, side);
    spec.add_pair(k, (k + 2) % 6, std::sqrt(3.0) * side);
  }
  return spec;
}

Vec rendezvous_velocity(const Vec& own, const NeighborPositions& neigh) {
  Vec u = Vec::Zero(own.size());
  for (const auto& [j, x] : neigh) u += x - own;
  return u;
}

Vec containment_velocity(const Vec& own, const NeighborPositions& neigh, bool is_leader,
                         double gain) {
  if (!(gain > 0.0)) throw InvalidParameterError("containment gain must be positive");
  if (is_leader) return Vec::Zero(own.size());
  return gain * rendezvous_velocity(own, neigh);
}

Vec formation_velocity(const Vec& own, const NeighborPositions& neigh, const FormationSpec& spec,
                       AgentId self) {
  Vec u = Vec::Zero(own.size());
  for (const auto& [j, x] : neigh) {
    auto d = spec.distance(self, j);
    if (!d)
      throw SpecError("no desired distance between " + std::to_string(self) + " and " +
                      std::to_string(j));
    const Vec diff = x - own;
    u += (diff.squaredNorm() - *d * *d) * diff;
  }
  return u;
}

double formation_error(const std::vector<Vec>& positions, const FormationSpec& spec) {
  double err = 0.0;
  for (const auto& [key, d] : spec.pairs()) {
    auto [i, j] = key;
    if (i >= j) continue;
    const double e = (positions.at(i) - positions.at(j)).norm() - d;
    err += e * e;
  }
  return err;
}

double formation_potential(const std::vector<Vec>& positions, const FormationSpec& spec) {
  double phi = 0.0;
  for (const auto& [key, d] : spec.pairs()) {
    auto [i, j] = key;
    if (i >= j) continue;
    const double e = (positions.at(i) - positions.at(j)).squaredNorm() - d * d;
    phi += 0.25 * e * e;
  }
  return phi;
}

VelocityLaw make_rendezvous_law() { return rendezvous_velocity; }

VelocityLaw make_containment_law(bool is_leader, double gain) {
  if (!(gain > 0.0)) throw InvalidParameterError("containment gain must be positive");
  return [is_leader, gain](const Vec& own, const NeighborPositions& neigh) {
    return containment_velocity(own, neigh, is_leader, gain);
  };
}

VelocityLaw make_formation_law(FormationSpec spec, AgentId self) {
  return [spec = std::move(spec), self](const Vec& own, const NeighborPositions& neigh) {
    return formation_velocity(own, neigh, spec, self);
  };
}

Value position_payload(const Vec& p) { return Value(std::vector<double>(p.data(), p.data() + p.size())); }

Vec position_from_payload(const Value& v) {
  const auto& d = v.as<std::vector<double>>();
  return Eigen::Map<const Vec>(d.data(), static_cast<Eigen::Index>(d.size()));
}

void guidance_publish(Communicator& comm, const Vec& pose, std::uint64_t round) {
  auto nb = comm.base_neighbors();
  comm.send(position_payload(pose), nb.out, round);
}

Vec guidance_evaluate(Communicator& comm, const Vec& pose, const VelocityLaw& law,
                      std::uint64_t round, double timeout_s) {
  auto nb = comm.base_neighbors();
  NeighborPositions neigh;
  for (auto& [j, v] : comm.gather(nb.in, round, timeout_s)) neigh.emplace(j, position_from_payload(v));
  return law(pose, neigh);
}

Vec guidance_step(Communicator& comm, const Vec& pose, const VelocityLaw& law,
                  std::uint64_t round, double timeout_s) {
  guidance_publish(comm, pose, round);
  return guidance_evaluate(comm, pose, law, round, timeout_s);
}

}  // namespace robonet
