#pragma once

#include <Eigen/Dense>
#include <limits>
#include <variant>

namespace robonet {

using Vec = Eigen::VectorXd;

struct SingleIntState {
  Vec pos;
};
struct UnicycleState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians in (-pi, pi]
};
struct DoubleIntState {
  Vec pos;
  Vec vel;
};
using RobotState = std::variant<SingleIntState, UnicycleState, DoubleIntState>;

struct VelocityCmd {
  Vec u;  // m/s
};
struct UnicycleCmd {
  double v = 0.0;      // m/s
  double omega = 0.0;  // rad/s
};
struct AccelCmd {
  Vec a;  // m/s^2
};
using ControlInput = std::variant<VelocityCmd, UnicycleCmd, AccelCmd>;

/// Forward-Euler step settings. Bounds clamp each vector component or each
/// unicycle channel before integration.
struct IntegratorConfig {
  double dt = 0.01;
  double max_speed = std::numeric_limits<double>::infinity();
  double max_omega = std::numeric_limits<double>::infinity();
  double max_accel = std::numeric_limits<double>::infinity();
};

RobotState step(const RobotState& state, const ControlInput& input, const IntegratorConfig& cfg);

/// Maps any finite angle into (-pi, pi].
double wrap_angle(double theta);

/// Planar/spatial position of any state variant (x, y for the unicycle).
Vec position_of(const RobotState& s);

}  // namespace robonet
