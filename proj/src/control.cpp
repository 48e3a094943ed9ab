#include "robonet/control.hpp"

#include <algorithm>
#include <cmath>

#include "robonet/error.hpp"

namespace robonet {

UnicycleCmd si_to_unicycle(const Eigen::Vector2d& u, double theta, const SiToUniParams& p) {
  if (!u.allFinite() || !std::isfinite(theta)) throw NumericError("non-finite velocity command");
  if (!(p.lookahead > 0.0)) throw InvalidParameterError("lookahead must be positive");
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  double v = c * u.x() + s * u.y();
  double w = (-s * u.x() + c * u.y()) / p.lookahead;
  v = std::clamp(v, -p.v_max, p.v_max);
  w = std::clamp(w, -p.omega_max, p.omega_max);
  return {v, w};
}

Eigen::Vector2d lookahead_point(const UnicycleState& s, double lookahead) {
  return {s.x + lookahead * std::cos(s.theta), s.y + lookahead * std::sin(s.theta)};
}

UnicycleCmd track_point(const UnicycleState& pose, const Eigen::Vector2d& target,
                        const TrackerGains& g) {
  const double dx = target.x() - pose.x;
  const double dy = target.y() - pose.y;
  const double rho = std::hypot(dx, dy);
  if (rho < g.arrive_radius) return {0.0, 0.0};
  const double alpha = wrap_angle(std::atan2(dy, dx) - pose.theta);
  return {std::max(0.0, g.k_lin * rho * std::cos(alpha)), g.k_ang * alpha};
}

}  // namespace robonet
