#pragma once

#include "untangle/geometry.hpp"
#include "untangle/risk.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace untangle {

inline constexpr double kDefaultRegularizer = 1e-9;

/// Discrete Gauss linking sum over all segment pairs of two curves,
///   (1/4pi) sum_a sum_b (dA_a x dB_b) . (mA_a - mB_b) / (|mA_a - mB_b|^3 + eps)
/// with segment midpoints m. Symmetric in its two arguments.
double linking_number(const Polyline& a, const Polyline& b, double eps = kDefaultRegularizer);

/// The same kernel applied to one curve over distinct segment pairs.
double writhe(const Polyline& a, double eps = kDefaultRegularizer);

/// Symmetric N x N matrix of pairwise linking numbers, zero diagonal.
Eigen::MatrixXd linking_matrix(std::span<const Polyline> curves,
                               double eps = kDefaultRegularizer);

/// Closes an open arm by a return path that drops from the tip along
/// `down` by `depth`, runs under the base and rises back to it. The result
/// repeats the base point at the end.
Polyline virtually_close(const Polyline& arm, const Vec3& down, double depth);

enum class CrossingSign { under, over };

/// A crossing between projected strands i and i+1 (1-based, matching the
/// braid generator index). `sign` says whether the strand occupying
/// position i just before the crossing passes under or over.
struct CrossingEvent {
  int strand_index = 1;
  CrossingSign sign = CrossingSign::under;
  int time_step = 0;
  double braid_coordinate = 0.0;  // position of the crossing along the braid axis
};

/// Orthonormal frame for projecting along a view direction. Strands are
/// ordered along `order_axis`; crossings are sequenced along `braid_axis`.
struct ProjectionFrame {
  Vec3 view = Vec3::UnitZ();
  Vec3 order_axis = Vec3::UnitX();
  Vec3 braid_axis = Vec3::UnitY();

  /// Throws std::invalid_argument unless |direction| == 1 (within 1e-9).
  static ProjectionFrame from_direction(const Vec3& direction);
};

struct CrossingReport {
  std::vector<CrossingEvent> events;
  int degenerate_skipped = 0;
};

/// Indices that sort `bases` by their coordinate along the frame's order axis.
std::vector<int> strand_order(std::span<const Vec3> bases, const ProjectionFrame& frame);

/// Transversal crossings between the projections of strand-adjacent arms
/// (arms must already be in strand order). Events are ordered by strand
/// index, then along the braid axis. Intersections whose 2x2 determinant is
/// below 1e-12 are skipped and tallied.
CrossingReport detect_crossings(std::span<const Polyline> arms, const Vec3& direction,
                                int time_step = 0);

/// Number of transversal intersections between the projections of two
/// polylines (the raw count before pairing into strand events).
int projected_intersection_count(const Polyline& a, const Polyline& b, const Vec3& direction);

struct TopoState {
  Eigen::MatrixXd linking;
  Eigen::VectorXd writhes;
  int braid_length = 0;
  double risk = 0.0;
  bool entangled = false;

  double max_abs_linking() const;
  /// Largest |Lk| in row j (excluding the diagonal).
  double row_max_abs_linking(int j) const;
};

TopoState topo_state(std::span<const ArmState> arms, int braid_length, bool entangled,
                     const RiskCoeffs& coeffs, double eps = kDefaultRegularizer);
TopoState topo_state(std::span<const Polyline> centerlines, int braid_length, bool entangled,
                     const RiskCoeffs& coeffs, double eps = kDefaultRegularizer);

/// Hysteresis on the entanglement indicator: true once max|Lk| and the
/// simplified braid length both stay at or above their thresholds for
/// `persistence` consecutive updates.
class EntanglementMonitor {
 public:
  struct Thresholds {
    double linking = 0.8;
    int braid_length = 4;
    int persistence = 3;
  };

  EntanglementMonitor() = default;
  explicit EntanglementMonitor(Thresholds t) : thresholds_(t) {}

  bool update(double max_abs_linking, int braid_length);
  /// Indicator value the next update would produce, without committing it.
  bool peek(double max_abs_linking, int braid_length) const;
  bool entangled() const noexcept { return streak_ >= thresholds_.persistence; }
  int streak() const noexcept { return streak_; }
  void reset() noexcept { streak_ = 0; }
  const Thresholds& thresholds() const noexcept { return thresholds_; }

 private:
  bool condition(double lk, int br) const {
    return lk >= thresholds_.linking && br >= thresholds_.braid_length;
  }
  Thresholds thresholds_{};
  int streak_ = 0;
};

}  // namespace untangle
