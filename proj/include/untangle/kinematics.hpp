#pragma once

#include "untangle/geometry.hpp"
#include "untangle/scenario.hpp"

#include <Eigen/Dense>

#include <vector>

namespace untangle {

/// Discretized Cosserat-style arm. Joint i sits at node i and carries three
/// coordinates (b1, b2, t): a twist t about the incoming tangent followed by
/// a bend (b1, b2) about the first two frame axes. Segment i leaves node i
/// along the third axis of its frame, so segment lengths are exact by
/// construction and the material curvatures of joint i are
/// |(b1, b2)| / h_i (bending) and |t| / h_i (twist).
struct ArmChain {
  Vec3 base = Vec3::Zero();
  Mat3 base_frame = Mat3::Identity();  // columns d1, d2, d3; d3 is the initial tangent
  std::vector<double> segment_lengths;

  std::size_t joint_count() const { return segment_lengths.size(); }
  Eigen::Index dof() const { return static_cast<Eigen::Index>(3 * segment_lengths.size()); }
  double length() const;
};

/// Node positions for joint coordinates `q` (size dof()). When `frames` is
/// given it receives one frame per node; the last node reuses the frame of
/// the last segment.
std::vector<Vec3> forward_kinematics(const ArmChain& chain, const Eigen::VectorXd& q,
                                     std::vector<Mat3>* frames = nullptr);

/// Derivative of nodes 1..M-1 (stacked xyz) with respect to the joint
/// coordinates.
Eigen::MatrixXd node_jacobian(const ArmChain& chain, const Eigen::VectorXd& q);

/// Largest bending and twist curvature over all joints.
struct MaterialCurvature {
  double bending = 0.0;
  double twist = 0.0;
};
MaterialCurvature material_curvature(const ArmChain& chain, const Eigen::VectorXd& q);

/// Wall-mounted chain of one scenario arm: reach direction as tangent, sag
/// direction as second axis, equal segments.
ArmChain arm_chain(const ScenarioConfig& c, int arm);
/// Joint coordinates of the rest pose: a planar arc of radius
/// `rest_bend_radius` tangent to the reach direction at the base.
Eigen::VectorXd rest_joints(const ScenarioConfig& c);

struct AdvanceResult {
  Eigen::VectorXd joints;
  std::vector<Vec3> points;
  std::vector<Mat3> frames;
  double scale = 1.0;          // fraction of the solved joint motion executed
  bool speed_clamped = false;  // some commanded node speed exceeded v_max or was not finite
  bool rejected = false;       // no motion within limits found; the arm holds still
};

/// One explicit step. Node velocities are tracked in the weighted
/// least-squares sense by a damped joint update that also relaxes toward
/// `rest`; joints are clamped to the bending and twist limits. A result
/// that moves some node faster than v_max is retried with the joint update
/// halved; if every retry fails the arm holds still. All-zero velocities
/// leave the arm exactly where it is.
AdvanceResult advance_arm(const ArmChain& chain, const Eigen::VectorXd& joints,
                          const std::vector<Vec3>& velocities, const Eigen::VectorXd& rest,
                          const KinematicLimits& limits);

struct ShapeCheck {
  double max_speed = 0.0;  // max node displacement / dt
  double max_bending = 0.0;
  double max_twist = 0.0;
  double max_length_error = 0.0;  // relative, worst segment
  double arc_length = 0.0;
};

ShapeCheck measure_shape(const ArmChain& chain, const Eigen::VectorXd& joints,
                         const Polyline& before, const Polyline& after,
                         const KinematicLimits& limits);

bool within_limits(const ShapeCheck& s, const KinematicLimits& limits);

}  // namespace untangle
