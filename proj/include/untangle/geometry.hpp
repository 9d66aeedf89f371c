#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <vector>

namespace untangle {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Ordered sequence of 3D points with non-degenerate segments.
///
/// A closed curve is represented by repeating the first point at the end, so
/// the closing segment is an ordinary segment for every downstream kernel.
class Polyline {
 public:
  Polyline() = default;
  /// Throws std::invalid_argument for fewer than two points, a zero-length
  /// segment or a non-finite coordinate.
  explicit Polyline(std::vector<Vec3> points);

  const std::vector<Vec3>& points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  std::size_t segment_count() const noexcept {
    return points_.empty() ? 0 : points_.size() - 1;
  }
  const Vec3& operator[](std::size_t i) const { return points_[i]; }
  const Vec3& front() const { return points_.front(); }
  const Vec3& back() const { return points_.back(); }

  Vec3 segment(std::size_t i) const { return points_[i + 1] - points_[i]; }
  Vec3 midpoint(std::size_t i) const { return 0.5 * (points_[i] + points_[i + 1]); }
  bool is_closed() const noexcept {
    return points_.size() > 2 && points_.front() == points_.back();
  }

  Polyline reversed() const;

 private:
  std::vector<Vec3> points_;
};

double arc_length(const Polyline& p);

/// Menger (circumscribed-circle) curvature at each interior node; collinear
/// triples give 0. Requires at least three points.
std::vector<double> curvature_profile(const Polyline& p);

/// Signed discrete torsion between consecutive osculating planes, one value
/// per pair of adjacent interior nodes (size() - 3 entries). Windows where
/// either node's curvature is below `curvature_floor` contribute 0.
std::vector<double> torsion_profile(const Polyline& p, double curvature_floor = 1e-9);

struct Obstacle {
  Vec3 center = Vec3::Zero();
  double radius = 0.0;
};

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& x, double tol = 0.0) const {
    return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
  }
};

struct Workspace {
  Aabb bounds;
  std::vector<Obstacle> obstacles;
  std::vector<Vec3> targets;
};

/// Kinematic state of one continuum arm: centerline, per-node linear
/// velocity and per-node orientation frame.
struct ArmState {
  Polyline centerline;
  std::vector<Vec3> velocities;
  std::vector<Mat3> orientations;

  /// Builds a state at rest with tangent-aligned frames.
  static ArmState at_rest(Polyline centerline);

  /// Throws std::invalid_argument when a per-node array is mis-sized or a
  /// frame is not a proper rotation (tolerance 1e-9).
  void validate() const;
};

/// Frames whose first column is the local unit tangent, propagated by
/// minimal rotation so consecutive frames are as close as possible.
std::vector<Mat3> tangent_frames(const Polyline& p);

inline constexpr double kNoObstacleClearance = std::numeric_limits<double>::infinity();

/// Signed clearance min over nodes and obstacles of |r - o| - r_obs - r_arm.
/// Returns kNoObstacleClearance when the workspace has no obstacles.
double min_obstacle_clearance(const ArmState& arm, const Workspace& w, double arm_radius);
double min_obstacle_clearance(const Polyline& arm, const std::vector<Obstacle>& obstacles,
                              double arm_radius);

}  // namespace untangle
