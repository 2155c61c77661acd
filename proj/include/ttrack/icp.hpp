// Point-cloud registration: nearest-point correspondence against a surface
// model, Horn's closed-form alignment, and the alternating refinement loop.
#pragma once

#include <memory>
#include <vector>

#include "ttrack/quat.hpp"
#include "ttrack/types.hpp"

namespace ttrack {

struct PointCloud {
  std::vector<Vec3> points;

  PointCloud() = default;
  explicit PointCloud(std::vector<Vec3> pts) : points(std::move(pts)) {}
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
};

// Rigid transform of the target's point-of-reference frame in the sensor
// frame: x_sensor = A(rotation) x_model + translation.
struct Pose {
  UnitQuaternion rotation;
  Vec3 translation{0, 0, 0};

  Vec3 apply(const Vec3& p) const { return rotate_vec(rotation, p) + translation; }
  Vec3 apply_inverse(const Vec3& p) const {
    return rotate_vec(conjugate(rotation), p - translation);
  }
  Pose inverse() const {
    const UnitQuaternion qc = conjugate(rotation);
    return Pose{qc, -rotate_vec(qc, translation)};
  }
};

namespace detail {

// Exact nearest-neighbour k-d tree over a fixed point set. Ties on distance
// resolve to the lowest point index.
class KdTree {
 public:
  explicit KdTree(const std::vector<Vec3>& points);

  struct Hit {
    std::size_t index;
    double dist2;
  };
  Hit nearest(const Vec3& query) const;

 private:
  struct Node {
    int axis = -1;           // -1 marks a leaf
    double split = 0.0;
    int left = -1, right = -1;
    std::uint32_t begin = 0, end = 0;  // leaf range into order_
  };

  void build(int node, std::uint32_t begin, std::uint32_t end);
  void search(int node, const Vec3& query, Hit& best) const;

  const std::vector<Vec3>* points_;
  std::vector<std::uint32_t> order_;
  std::vector<Node> nodes_;
};

}  // namespace detail

// Immutable model point set with a spatial index and a characteristic
// radius (max distance of any model point from the centroid).
class SurfaceModel {
 public:
  explicit SurfaceModel(std::vector<Vec3> points);

  const std::vector<Vec3>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  const Vec3& centroid() const { return centroid_; }
  double characteristic_radius() const { return radius_; }

  detail::KdTree::Hit nearest(const Vec3& query) const { return tree_->nearest(query); }

 private:
  std::vector<Vec3> points_;
  Vec3 centroid_;
  double radius_;
  std::shared_ptr<const detail::KdTree> tree_;
};

// For each scan point, the model point closest to it once the scan is
// carried into the model frame by `pose`.
PointCloud nearest_correspondences(const PointCloud& scan, const SurfaceModel& model,
                                   const Pose& pose);

struct CrossCovariance {
  Mat3 s;
  Vec3 v_bar;
  Vec3 u_bar;
};

// S = (1/m) sum v_i u_i^T - v_bar u_bar^T. Requires |u| == |v| >= 3.
CrossCovariance cross_covariance(const PointCloud& v, const PointCloud& u);

struct HornResult {
  UnitQuaternion q;  // v ~ A(q) u + r
  Vec3 r;
  double d;          // attained mean squared distance
};

// Closed-form least-squares alignment of corresponded sets. Throws
// AlignmentAmbiguous when the top eigenvalue is (near-)repeated.
HornResult horn_align(const PointCloud& u, const PointCloud& v);

struct IcpOptions {
  double d_min = 1e-4;  // m^2; residual threshold for convergence
  int max_iter = 50;
};

struct IcpResult {
  Pose pose;
  double residual = 0.0;  // mean squared distance, m^2
  int iterations = 0;
  bool converged = false;
  double fit_normalized = 0.0;  // sqrt(residual) / model characteristic radius
  std::vector<double> residual_history;
};

// Besl-McKay iteration: correspondence then alignment, starting from
// pose0, until residual <= d_min or max_iter.
IcpResult icp_register(const PointCloud& scan, const SurfaceModel& model, const Pose& pose0,
                       const IcpOptions& opts);

}  // namespace ttrack
