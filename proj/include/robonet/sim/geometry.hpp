#pragma once

#include <Eigen/Dense>
#include <vector>

namespace robonet::sim {

/// Counter-clockwise convex hull without collinear points (monotone chain).
std::vector<Eigen::Vector2d> convex_hull(std::vector<Eigen::Vector2d> points);

/// Euclidean distance from `p` to the convex hull of `points`; zero inside.
double hull_distance(const Eigen::Vector2d& p, const std::vector<Eigen::Vector2d>& points);

}  // namespace robonet::sim
