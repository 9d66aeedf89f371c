#include "untangle/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace untangle {

namespace {

constexpr double kLimitMargin = 0.999;

Mat3 joint_rotation(const Eigen::VectorXd& q, std::size_t i) {
  const auto k = static_cast<Eigen::Index>(3 * i);
  const Vec3 bend(q(k), q(k + 1), 0.0);
  const double angle = bend.norm();
  Mat3 r = Eigen::AngleAxisd(q(k + 2), Vec3::UnitZ()).toRotationMatrix();
  if (angle > 0.0) r = r * Eigen::AngleAxisd(angle, bend / angle).toRotationMatrix();
  return r;
}

// Right Jacobian of the rotation exponential: d Exp(phi + d) = Exp(phi) [J_r d]x.
Mat3 right_jacobian(const Vec3& phi) {
  const double t = phi.norm();
  Mat3 k;
  k << 0.0, -phi.z(), phi.y(), phi.z(), 0.0, -phi.x(), -phi.y(), phi.x(), 0.0;
  if (t < 1e-8) return Mat3::Identity() - 0.5 * k;
  return Mat3::Identity() - (1.0 - std::cos(t)) / (t * t) * k +
         (t - std::sin(t)) / (t * t * t) * k * k;
}

double node_weight(std::size_t node, std::size_t last) {
  const double s = static_cast<double>(node) / static_cast<double>(last);
  return s * s;
}

void clamp_joints(const ArmChain& chain, const KinematicLimits& lim, Eigen::VectorXd& q) {
  for (std::size_t i = 0; i < chain.joint_count(); ++i) {
    const auto k = static_cast<Eigen::Index>(3 * i);
    const double h = chain.segment_lengths[i];
    const double bend_cap = kLimitMargin * lim.kappa_max * h;
    const double bend = std::hypot(q(k), q(k + 1));
    if (bend > bend_cap) {
      q(k) *= bend_cap / bend;
      q(k + 1) *= bend_cap / bend;
    }
    const double twist_cap = kLimitMargin * lim.torsion_max * h;
    q(k + 2) = std::clamp(q(k + 2), -twist_cap, twist_cap);
  }
}

}  // namespace

double ArmChain::length() const {
  double s = 0.0;
  for (double h : segment_lengths) s += h;
  return s;
}

std::vector<Vec3> forward_kinematics(const ArmChain& chain, const Eigen::VectorXd& q,
                                     std::vector<Mat3>* frames) {
  if (q.size() != chain.dof()) throw std::invalid_argument("joint vector has the wrong size");
  const std::size_t n = chain.joint_count();
  std::vector<Vec3> p(n + 1);
  p[0] = chain.base;
  Mat3 r = chain.base_frame;
  if (frames) frames->assign(n + 1, Mat3::Identity());
  for (std::size_t i = 0; i < n; ++i) {
    r = r * joint_rotation(q, i);
    p[i + 1] = p[i] + chain.segment_lengths[i] * r.col(2);
    if (frames) (*frames)[i] = r;
  }
  if (frames) (*frames)[n] = r;
  return p;
}

MaterialCurvature material_curvature(const ArmChain& chain, const Eigen::VectorXd& q) {
  MaterialCurvature m;
  for (std::size_t i = 0; i < chain.joint_count(); ++i) {
    const auto k = static_cast<Eigen::Index>(3 * i);
    const double h = chain.segment_lengths[i];
    m.bending = std::max(m.bending, std::hypot(q(k), q(k + 1)) / h);
    m.twist = std::max(m.twist, std::abs(q(k + 2)) / h);
  }
  return m;
}

ArmChain arm_chain(const ScenarioConfig& c, int arm) {
  ArmChain chain;
  chain.base = c.bases.at(static_cast<std::size_t>(arm));
  const Vec3 u = c.reach_direction.normalized();
  const Vec3 s = (c.sag_direction - c.sag_direction.dot(u) * u).normalized();
  chain.base_frame.col(0) = s.cross(u);
  chain.base_frame.col(1) = s;
  chain.base_frame.col(2) = u;
  chain.segment_lengths.assign(static_cast<std::size_t>(c.nodes_per_arm - 1),
                               c.arm_length / (c.nodes_per_arm - 1));
  return chain;
}

Eigen::VectorXd rest_joints(const ScenarioConfig& c) {
  const int joints = c.nodes_per_arm - 1;
  const double h = c.arm_length / joints;
  // Equal chords of a circle: the first chord turns half the chord angle
  // away from the tangent, every later node the full angle. A negative
  // rotation about d1 turns the tangent toward d2 (the sag direction).
  const double dphi = 2.0 * std::asin(h / (2.0 * c.rest_bend_radius));
  Eigen::VectorXd q = Eigen::VectorXd::Zero(3 * joints);
  for (int i = 0; i < joints; ++i) q(3 * i) = i == 0 ? -0.5 * dphi : -dphi;
  return q;
}

Eigen::MatrixXd node_jacobian(const ArmChain& chain, const Eigen::VectorXd& q) {
  std::vector<Mat3> frames;
  const std::vector<Vec3> p = forward_kinematics(chain, q, &frames);
  const std::size_t n = p.size();
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(3 * (n - 1)), chain.dof());
  Mat3 before = chain.base_frame;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto k = static_cast<Eigen::Index>(3 * i);
    const Mat3 axes = frames[i] * right_jacobian(Vec3(q(k), q(k + 1), 0.0));
    const Vec3 omega[3] = {axes.col(0), axes.col(1), before.col(2)};
    for (std::size_t m = i + 1; m < n; ++m) {
      const Vec3 lever = p[m] - p[i];
      for (int c = 0; c < 3; ++c) {
        jac.block<3, 1>(static_cast<Eigen::Index>(3 * (m - 1)), k + c) = omega[c].cross(lever);
      }
    }
    before = frames[i];
  }
  return jac;
}

ShapeCheck measure_shape(const ArmChain& chain, const Eigen::VectorXd& joints,
                         const Polyline& before, const Polyline& after,
                         const KinematicLimits& limits) {
  ShapeCheck s;
  for (std::size_t i = 0; i < after.size(); ++i) {
    s.max_speed = std::max(s.max_speed, (after[i] - before[i]).norm() / limits.dt);
  }
  const MaterialCurvature m = material_curvature(chain, joints);
  s.max_bending = m.bending;
  s.max_twist = m.twist;
  for (std::size_t i = 0; i < after.segment_count(); ++i) {
    const double h = chain.segment_lengths[i];
    s.max_length_error = std::max(s.max_length_error, std::abs(after.segment(i).norm() - h) / h);
  }
  s.arc_length = arc_length(after);
  return s;
}

bool within_limits(const ShapeCheck& s, const KinematicLimits& limits) {
  constexpr double rel = 1e-9;
  return s.max_speed <= limits.v_max * (1.0 + rel) &&
         s.max_bending <= limits.kappa_max * (1.0 + rel) &&
         s.max_twist <= limits.torsion_max * (1.0 + rel) &&
         s.max_length_error <= limits.length_tolerance;
}

AdvanceResult advance_arm(const ArmChain& chain, const Eigen::VectorXd& joints,
                          const std::vector<Vec3>& velocities, const Eigen::VectorXd& rest,
                          const KinematicLimits& limits) {
  AdvanceResult out;
  std::vector<Mat3> frames;
  const std::vector<Vec3> current = forward_kinematics(chain, joints, &frames);
  const std::size_t n = current.size();
  std::vector<Vec3> v(n, Vec3::Zero());
  for (std::size_t i = 1; i < n && i < velocities.size(); ++i) {
    v[i] = velocities[i];
    if (!v[i].allFinite()) {
      v[i].setZero();
      out.speed_clamped = true;
      continue;
    }
    const double speed = v[i].norm();
    if (speed > limits.v_max) {
      v[i] *= limits.v_max / speed;
      out.speed_clamped = true;
    }
  }

  const auto hold = [&] {
    out.joints = joints;
    out.points = current;
    out.frames = frames;
  };
  if (std::all_of(v.begin(), v.end(), [](const Vec3& x) { return x.isZero(0.0); })) {
    hold();
    return out;
  }

  const auto rows = static_cast<Eigen::Index>(3 * (n - 1));
  const Eigen::MatrixXd jac = node_jacobian(chain, joints);
  Eigen::VectorXd w(rows);
  Eigen::VectorXd goal(rows);
  for (std::size_t i = 1; i < n; ++i) {
    const auto r = static_cast<Eigen::Index>(3 * (i - 1));
    w.segment<3>(r).setConstant(node_weight(i, n - 1));
    goal.segment<3>(r) = limits.dt * v[i];
  }
  const Eigen::VectorXd relax = -limits.elastic_relaxation * (joints - rest);
  const Eigen::MatrixXd jw = w.asDiagonal() * jac;
  Eigen::MatrixXd normal = jac.transpose() * jw;
  normal.diagonal().array() += limits.damping * limits.damping;
  const Eigen::VectorXd delta =
      relax + normal.ldlt().solve(jw.transpose() * (goal - jac * relax));

  double scale = 1.0;
  for (int attempt = 0; attempt <= limits.speed_halvings; ++attempt, scale *= 0.5) {
    Eigen::VectorXd cand = joints + scale * delta;
    clamp_joints(chain, limits, cand);
    if (!cand.allFinite()) continue;
    std::vector<Mat3> cand_frames;
    std::vector<Vec3> p = forward_kinematics(chain, cand, &cand_frames);
    const Polyline after(p);
    const ShapeCheck s = measure_shape(chain, cand, Polyline(current), after, limits);
    if (!within_limits(s, limits)) continue;
    out.joints = std::move(cand);
    out.points = std::move(p);
    out.frames = std::move(cand_frames);
    out.scale = scale;
    return out;
  }
  hold();
  out.scale = 0.0;
  out.rejected = true;
  return out;
}

}  // namespace untangle
