#include "untangle/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace untangle {

Polyline::Polyline(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("polyline needs at least two points");
  }
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!points_[i].allFinite()) {
      throw std::invalid_argument("polyline point " + std::to_string(i) + " is not finite");
    }
    if (i > 0 && (points_[i] - points_[i - 1]).norm() <= 0.0) {
      throw std::invalid_argument("polyline segment " + std::to_string(i - 1) +
                                  " has zero length");
    }
  }
}

Polyline Polyline::reversed() const {
  std::vector<Vec3> r(points_.rbegin(), points_.rend());
  return Polyline(std::move(r));
}

double arc_length(const Polyline& p) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) total += p.segment(i).norm();
  return total;
}

namespace {

double menger(const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 bc = c - b;
  const Vec3 ca = a - c;
  const double denom = ab.norm() * bc.norm() * ca.norm();
  if (denom <= 0.0) return 0.0;
  return 2.0 * ab.cross(-ca).norm() / denom;
}

}  // namespace

std::vector<double> curvature_profile(const Polyline& p) {
  if (p.size() < 3) throw std::invalid_argument("curvature needs at least three points");
  std::vector<double> k(p.size() - 2);
  for (std::size_t i = 1; i + 1 < p.size(); ++i) k[i - 1] = menger(p[i - 1], p[i], p[i + 1]);
  return k;
}

std::vector<double> torsion_profile(const Polyline& p, double curvature_floor) {
  if (p.size() < 4) return {};
  const auto kappa = curvature_profile(p);
  std::vector<double> tau(p.size() - 3, 0.0);
  for (std::size_t i = 1; i + 2 < p.size(); ++i) {
    if (kappa[i - 1] < curvature_floor || kappa[i] < curvature_floor) continue;
    const Vec3 b0 = p.segment(i - 1).cross(p.segment(i));
    const Vec3 b1 = p.segment(i).cross(p.segment(i + 1));
    const double n0 = b0.norm();
    const double n1 = b1.norm();
    if (n0 <= 0.0 || n1 <= 0.0) continue;
    const Vec3 t = p.segment(i).normalized();
    const double angle = std::atan2(b0.cross(b1).dot(t), b0.dot(b1));
    tau[i - 1] = angle / p.segment(i).norm();
  }
  return tau;
}

std::vector<Mat3> tangent_frames(const Polyline& p) {
  const std::size_t n = p.size();
  std::vector<Vec3> tangents(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vec3 t;
    if (i == 0) {
      t = p.segment(0);
    } else if (i + 1 == n) {
      t = p.segment(n - 2);
    } else {
      t = p.segment(i - 1).normalized() + p.segment(i).normalized();
      if (t.norm() < 1e-12) t = p.segment(i);
    }
    tangents[i] = t.normalized();
  }

  std::vector<Mat3> frames(n);
  Vec3 normal = tangents[0].unitOrthogonal();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) {
      // Rotate the previous normal by the minimal rotation taking t_{i-1} to t_i.
      const Vec3 axis = tangents[i - 1].cross(tangents[i]);
      const double s = axis.norm();
      const double c = tangents[i - 1].dot(tangents[i]);
      if (s > 1e-12) {
        normal = Eigen::AngleAxisd(std::atan2(s, c), axis / s) * normal;
      }
      normal = (normal - normal.dot(tangents[i]) * tangents[i]).normalized();
    }
    Mat3 f;
    f.col(0) = tangents[i];
    f.col(1) = normal;
    f.col(2) = tangents[i].cross(normal);
    frames[i] = f;
  }
  return frames;
}

ArmState ArmState::at_rest(Polyline centerline) {
  ArmState s;
  s.velocities.assign(centerline.size(), Vec3::Zero());
  s.orientations = tangent_frames(centerline);
  s.centerline = std::move(centerline);
  return s;
}

void ArmState::validate() const {
  const std::size_t n = centerline.size();
  if (velocities.size() != n || orientations.size() != n) {
    throw std::invalid_argument("arm state arrays must have one entry per node");
  }
  for (const auto& r : orientations) {
    if ((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-9 ||
        std::abs(r.determinant() - 1.0) > 1e-9) {
      throw std::invalid_argument("orientation is not a proper rotation");
    }
  }
}

double min_obstacle_clearance(const Polyline& arm, const std::vector<Obstacle>& obstacles,
                              double arm_radius) {
  double best = kNoObstacleClearance;
  for (const auto& o : obstacles) {
    for (const auto& r : arm.points()) {
      best = std::min(best, (r - o.center).norm() - o.radius - arm_radius);
    }
  }
  return best;
}

double min_obstacle_clearance(const ArmState& arm, const Workspace& w, double arm_radius) {
  return min_obstacle_clearance(arm.centerline, w.obstacles, arm_radius);
}

}  // namespace untangle
