#include "untangle/topology.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace untangle {

namespace {

constexpr double kInvFourPi = 1.0 / (4.0 * std::numbers::pi);
constexpr double kDegenerateDet = 1e-12;

inline double gauss_term(const Vec3& da, const Vec3& db, const Vec3& ma, const Vec3& mb,
                         double eps) {
  const Vec3 d = ma - mb;
  const double r = d.norm();
  return da.cross(db).dot(d) / (r * r * r + eps);
}

struct Segment2 {
  Eigen::Vector2d p;
  Eigen::Vector2d dir;
  double h0;
  double dh;
  double lo_u, hi_u, lo_w, hi_w;
};

std::vector<Segment2> project(const Polyline& c, const ProjectionFrame& f) {
  std::vector<Segment2> out;
  out.reserve(c.segment_count());
  for (std::size_t i = 0; i < c.segment_count(); ++i) {
    const Vec3& a = c[i];
    const Vec3& b = c[i + 1];
    Segment2 s;
    s.p = {a.dot(f.order_axis), a.dot(f.braid_axis)};
    const Eigen::Vector2d q{b.dot(f.order_axis), b.dot(f.braid_axis)};
    s.dir = q - s.p;
    s.h0 = a.dot(f.view);
    s.dh = b.dot(f.view) - s.h0;
    s.lo_u = std::min(s.p.x(), q.x());
    s.hi_u = std::max(s.p.x(), q.x());
    s.lo_w = std::min(s.p.y(), q.y());
    s.hi_w = std::max(s.p.y(), q.y());
    out.push_back(s);
  }
  return out;
}

inline double cross2(const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
  return a.x() * b.y() - a.y() * b.x();
}

struct RawCrossing {
  double w;         // braid-axis coordinate of the crossing
  bool first_over;  // the first curve is nearer the viewer
};

// Intersections of the projections of two curves. Parameters are half-open
// [0, 1) on both segments so shared vertices are counted once.
void intersect_projected(const std::vector<Segment2>& a, const std::vector<Segment2>& b,
                         std::vector<RawCrossing>& out, int& degenerate) {
  for (const auto& sa : a) {
    for (const auto& sb : b) {
      if (sa.hi_u < sb.lo_u || sb.hi_u < sa.lo_u || sa.hi_w < sb.lo_w || sb.hi_w < sa.lo_w) {
        continue;
      }
      const Eigen::Vector2d qp = sb.p - sa.p;
      const double det = cross2(sa.dir, sb.dir);
      if (std::abs(det) < kDegenerateDet) {
        // Parallel: only collinear overlaps are degenerate contacts.
        if (std::abs(cross2(qp, sa.dir)) < kDegenerateDet) {
          const double len2 = sa.dir.squaredNorm();
          const double t0 = qp.dot(sa.dir) / len2;
          const double t1 = (qp + sb.dir).dot(sa.dir) / len2;
          if (std::max(t0, t1) >= 0.0 && std::min(t0, t1) <= 1.0) ++degenerate;
        }
        continue;
      }
      const double s = cross2(qp, sb.dir) / det;
      const double t = cross2(qp, sa.dir) / det;
      if (s < 0.0 || s >= 1.0 || t < 0.0 || t >= 1.0) continue;
      const double ha = sa.h0 + s * sa.dh;
      const double hb = sb.h0 + t * sb.dh;
      if (std::abs(ha - hb) < kDegenerateDet) {
        ++degenerate;  // the curves actually touch in 3D
        continue;
      }
      out.push_back({sa.p.y() + s * sa.dir.y(), ha > hb});
    }
  }
}

}  // namespace

double linking_number(const Polyline& a, const Polyline& b, double eps) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.segment_count(); ++i) {
    const Vec3 da = a.segment(i);
    const Vec3 ma = a.midpoint(i);
    for (std::size_t j = 0; j < b.segment_count(); ++j) {
      sum += gauss_term(da, b.segment(j), ma, b.midpoint(j), eps);
    }
  }
  return sum * kInvFourPi;
}

double writhe(const Polyline& a, double eps) {
  double sum = 0.0;
  const std::size_t n = a.segment_count();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 da = a.segment(i);
    const Vec3 ma = a.midpoint(i);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sum += gauss_term(da, a.segment(j), ma, a.midpoint(j), eps);
    }
  }
  return sum * kInvFourPi;
}

Eigen::MatrixXd linking_matrix(std::span<const Polyline> curves, double eps) {
  const auto n = static_cast<Eigen::Index>(curves.size());
  Eigen::MatrixXd lk = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = j + 1; k < n; ++k) {
      lk(j, k) = lk(k, j) = linking_number(curves[j], curves[k], eps);
    }
  }
  return lk;
}

Polyline virtually_close(const Polyline& arm, const Vec3& down, double depth) {
  std::vector<Vec3> pts = arm.points();
  const Vec3 drop = depth * down.normalized();
  pts.push_back(arm.back() + drop);
  pts.push_back(arm.front() + drop);
  pts.push_back(arm.front());
  return Polyline(std::move(pts));
}

ProjectionFrame ProjectionFrame::from_direction(const Vec3& direction) {
  if (!direction.allFinite() || std::abs(direction.norm() - 1.0) > 1e-9) {
    throw std::invalid_argument("projection direction must be a unit vector");
  }
  ProjectionFrame f;
  f.view = direction;
  Vec3 order = Vec3::UnitX() - direction.x() * direction;
  if (order.norm() < 1e-6) order = Vec3::UnitY() - direction.y() * direction;
  f.order_axis = order.normalized();
  f.braid_axis = f.view.cross(f.order_axis);
  return f;
}

std::vector<int> strand_order(std::span<const Vec3> bases, const ProjectionFrame& frame) {
  std::vector<int> idx(bases.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
    return bases[a].dot(frame.order_axis) < bases[b].dot(frame.order_axis);
  });
  return idx;
}

CrossingReport detect_crossings(std::span<const Polyline> arms, const Vec3& direction,
                                int time_step) {
  const ProjectionFrame frame = ProjectionFrame::from_direction(direction);
  CrossingReport report;
  if (arms.size() < 2) return report;

  std::vector<std::vector<Segment2>> projected;
  projected.reserve(arms.size());
  for (const auto& a : arms) projected.push_back(project(a, frame));

  std::vector<RawCrossing> raw;
  for (std::size_t j = 0; j + 1 < arms.size(); ++j) {
    raw.clear();
    intersect_projected(projected[j], projected[j + 1], raw, report.degenerate_skipped);
    std::sort(raw.begin(), raw.end(),
              [](const RawCrossing& x, const RawCrossing& y) { return x.w < y.w; });
    // Walking along the braid axis the two strands swap positions at every
    // crossing, so the strand on the left alternates between j and j + 1.
    for (std::size_t k = 0; k < raw.size(); ++k) {
      const bool left_is_first = (k % 2 == 0);
      const bool left_over = left_is_first ? raw[k].first_over : !raw[k].first_over;
      report.events.push_back({static_cast<int>(j) + 1,
                               left_over ? CrossingSign::over : CrossingSign::under,
                               time_step, raw[k].w});
    }
  }
  return report;
}

int projected_intersection_count(const Polyline& a, const Polyline& b, const Vec3& direction) {
  const ProjectionFrame frame = ProjectionFrame::from_direction(direction);
  std::vector<RawCrossing> raw;
  int degenerate = 0;
  intersect_projected(project(a, frame), project(b, frame), raw, degenerate);
  return static_cast<int>(raw.size());
}

double TopoState::max_abs_linking() const {
  return linking.size() == 0 ? 0.0 : linking.cwiseAbs().maxCoeff();
}

double TopoState::row_max_abs_linking(int j) const {
  if (linking.rows() <= 1) return 0.0;
  return linking.row(j).cwiseAbs().maxCoeff();
}

TopoState topo_state(std::span<const Polyline> centerlines, int braid_length, bool entangled,
                     const RiskCoeffs& coeffs, double eps) {
  TopoState s;
  s.linking = linking_matrix(centerlines, eps);
  s.writhes.resize(static_cast<Eigen::Index>(centerlines.size()));
  for (std::size_t j = 0; j < centerlines.size(); ++j) {
    s.writhes(static_cast<Eigen::Index>(j)) =
        centerlines[j].segment_count() >= 3 ? writhe(centerlines[j], eps) : 0.0;
  }
  s.braid_length = braid_length;
  s.entangled = entangled;
  s.risk = topo_risk_score(s.max_abs_linking(), braid_length, entangled, coeffs);
  return s;
}

TopoState topo_state(std::span<const ArmState> arms, int braid_length, bool entangled,
                     const RiskCoeffs& coeffs, double eps) {
  std::vector<Polyline> lines;
  lines.reserve(arms.size());
  for (const auto& a : arms) lines.push_back(a.centerline);
  return topo_state(std::span<const Polyline>(lines), braid_length, entangled, coeffs, eps);
}

bool EntanglementMonitor::update(double max_abs_linking, int braid_length) {
  streak_ = condition(max_abs_linking, braid_length) ? streak_ + 1 : 0;
  return entangled();
}

bool EntanglementMonitor::peek(double max_abs_linking, int braid_length) const {
  const int s = condition(max_abs_linking, braid_length) ? streak_ + 1 : 0;
  return s >= thresholds_.persistence;
}

}  // namespace untangle
