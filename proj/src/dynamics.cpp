#include "robonet/dynamics.hpp"

#include <cmath>
#include <numbers>

#include "robonet/error.hpp"

namespace robonet {

namespace {

void require_finite(const Vec& v, const char* what) {
  if (!v.allFinite()) throw NumericError(std::string("non-finite ") + what);
}

Vec clamp(const Vec& v, double bound) {
  if (std::isinf(bound)) return v;
  return v.cwiseMax(-bound).cwiseMin(bound);
}

double clamp(double x, double bound) { return std::isinf(bound) ? x : std::clamp(x, -bound, bound); }

}  // namespace

double wrap_angle(double theta) {
  if (!std::isfinite(theta)) throw NumericError("cannot wrap a non-finite angle");
  constexpr double pi = std::numbers::pi;
  if (theta > -pi && theta <= pi) return theta;
  double r = std::fmod(theta + pi, 2.0 * pi);
  if (r <= 0.0) r += 2.0 * pi;
  return r - pi;
}

RobotState step(const RobotState& state, const ControlInput& input, const IntegratorConfig& cfg) {
  if (!(cfg.dt > 0.0)) throw InvalidParameterError("sampling time must be positive");
  const double dt = cfg.dt;

  if (auto s = std::get_if<SingleIntState>(&state)) {
    auto u = std::get_if<VelocityCmd>(&input);
    if (!u) throw ModelError("single integrator expects a velocity command");
    require_finite(u->u, "velocity command");
    if (u->u.size() != s->pos.size()) throw ModelError("velocity dimension mismatch");
    return SingleIntState{s->pos + dt * clamp(u->u, cfg.max_speed)};
  }
  if (auto s = std::get_if<UnicycleState>(&state)) {
    auto u = std::get_if<UnicycleCmd>(&input);
    if (!u) throw ModelError("unicycle expects a (v, omega) command");
    if (!std::isfinite(u->v) || !std::isfinite(u->omega))
      throw NumericError("non-finite unicycle command");
    double v = clamp(u->v, cfg.max_speed);
    double w = clamp(u->omega, cfg.max_omega);
    return UnicycleState{s->x + dt * v * std::cos(s->theta), s->y + dt * v * std::sin(s->theta),
                         wrap_angle(s->theta + dt * w)};
  }
  const auto& s = std::get<DoubleIntState>(state);
  auto u = std::get_if<AccelCmd>(&input);
  if (!u) throw ModelError("double integrator expects an acceleration command");
  require_finite(u->a, "acceleration command");
  if (u->a.size() != s.pos.size() || s.vel.size() != s.pos.size())
    throw ModelError("acceleration dimension mismatch");
  return DoubleIntState{s.pos + dt * s.vel, s.vel + dt * clamp(u->a, cfg.max_accel)};
}

Vec position_of(const RobotState& s) {
  if (auto p = std::get_if<SingleIntState>(&s)) return p->pos;
  if (auto p = std::get_if<UnicycleState>(&s)) return Eigen::Vector2d(p->x, p->y);
  return std::get<DoubleIntState>(s).pos;
}

}  // namespace robonet
