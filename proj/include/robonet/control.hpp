#pragma once

#include <Eigen/Dense>
#include <limits>

#include "robonet/dynamics.hpp"

namespace robonet {

/// Near-identity map parameters: the controlled point sits `lookahead`
/// metres ahead of the wheel axis.
struct SiToUniParams {
  double lookahead = 0.1;
  double v_max = std::numeric_limits<double>::infinity();
  double omega_max = std::numeric_limits<double>::infinity();
};

/// Proportional range/bearing point tracker gains.
struct TrackerGains {
  double k_lin = 0.8;
  double k_ang = 2.0;
  double arrive_radius = 0.02;
};

/// Projects a planar velocity command onto (v, omega), then clamps.
UnicycleCmd si_to_unicycle(const Eigen::Vector2d& u, double theta, const SiToUniParams& p);

/// Offset point (x + l cos th, y + l sin th) driven by si_to_unicycle.
Eigen::Vector2d lookahead_point(const UnicycleState& s, double lookahead);

UnicycleCmd track_point(const UnicycleState& pose, const Eigen::Vector2d& target,
                        const TrackerGains& g);

}  // namespace robonet
