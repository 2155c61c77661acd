#include "ttrack/icp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ttrack/linalg.hpp"

namespace ttrack {

namespace detail {

KdTree::KdTree(const std::vector<Vec3>& points) : points_(&points) {
  if (points.empty()) throw Error("KdTree: empty point set");
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  nodes_.reserve(2 * points.size() / 8 + 16);
  nodes_.emplace_back();
  build(0, 0, static_cast<std::uint32_t>(points.size()));
}

void KdTree::build(int node, std::uint32_t begin, std::uint32_t end) {
  constexpr std::uint32_t kLeafSize = 8;
  if (end - begin <= kLeafSize) {
    nodes_[node].begin = begin;
    nodes_[node].end = end;
    // keep leaf entries in index order so ties scan lowest-first
    std::sort(order_.begin() + begin, order_.begin() + end);
    return;
  }
  const auto& pts = *points_;
  Vec3 lo = pts[order_[begin]], hi = lo;
  for (std::uint32_t i = begin + 1; i < end; ++i) {
    lo = lo.cwiseMin(pts[order_[i]]);
    hi = hi.cwiseMax(pts[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);

  const std::uint32_t mid = (begin + end) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&pts, axis](std::uint32_t a, std::uint32_t b) {
                     return pts[a](axis) < pts[b](axis);
                   });
  nodes_[node].axis = axis;
  nodes_[node].split = pts[order_[mid]](axis);

  const int left = static_cast<int>(nodes_.size());
  nodes_.emplace_back();
  nodes_.emplace_back();
  nodes_[node].left = left;
  nodes_[node].right = left + 1;
  build(left, begin, mid);
  build(left + 1, mid, end);
}

void KdTree::search(int node, const Vec3& query, Hit& best) const {
  const Node& nd = nodes_[node];
  if (nd.axis < 0) {
    const auto& pts = *points_;
    for (std::uint32_t i = nd.begin; i < nd.end; ++i) {
      const std::uint32_t idx = order_[i];
      const double d2 = (pts[idx] - query).squaredNorm();
      if (d2 < best.dist2 || (d2 == best.dist2 && idx < best.index)) {
        best.dist2 = d2;
        best.index = idx;
      }
    }
    return;
  }
  const double delta = query(nd.axis) - nd.split;
  const int near = delta < 0.0 ? nd.left : nd.right;
  const int far = delta < 0.0 ? nd.right : nd.left;
  search(near, query, best);
  // descend on equality as well: an equally distant, lower-index point may
  // live on the far side
  if (delta * delta <= best.dist2) search(far, query, best);
}

KdTree::Hit KdTree::nearest(const Vec3& query) const {
  Hit best{std::numeric_limits<std::size_t>::max(), std::numeric_limits<double>::infinity()};
  search(0, query, best);
  return best;
}

}  // namespace detail

SurfaceModel::SurfaceModel(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.empty()) throw Error("SurfaceModel: empty point set");
  centroid_ = Vec3::Zero();
  for (const auto& p : points_) centroid_ += p;
  centroid_ /= static_cast<double>(points_.size());
  radius_ = 0.0;
  for (const auto& p : points_) radius_ = std::max(radius_, (p - centroid_).norm());
  tree_ = std::make_shared<const detail::KdTree>(points_);
}

PointCloud nearest_correspondences(const PointCloud& scan, const SurfaceModel& model,
                                   const Pose& pose) {
  if (scan.empty()) throw Error("nearest_correspondences: empty scan");
  PointCloud out;
  out.points.reserve(scan.size());
  for (const auto& u : scan.points) {
    const auto hit = model.nearest(pose.apply_inverse(u));
    out.points.push_back(model.points()[hit.index]);
  }
  return out;
}

CrossCovariance cross_covariance(const PointCloud& v, const PointCloud& u) {
  if (u.size() != v.size()) throw Error("cross_covariance: size mismatch");
  if (u.size() < 3) throw Error("cross_covariance: degenerate correspondence set");
  const double m = static_cast<double>(u.size());
  Vec3 v_bar = Vec3::Zero(), u_bar = Vec3::Zero();
  Mat3 acc = Mat3::Zero();
  for (std::size_t i = 0; i < u.size(); ++i) {
    acc += v.points[i] * u.points[i].transpose();
    v_bar += v.points[i];
    u_bar += u.points[i];
  }
  v_bar /= m;
  u_bar /= m;
  return CrossCovariance{acc / m - v_bar * u_bar.transpose(), v_bar, u_bar};
}

HornResult horn_align(const PointCloud& u, const PointCloud& v) {
  const CrossCovariance cc = cross_covariance(v, u);
  const Mat3& s = cc.s;

  Mat4 w;
  w(0, 0) = s(0, 0) + s(1, 1) + s(2, 2);
  w(1, 0) = s(1, 2) - s(2, 1);
  w(2, 0) = s(2, 0) - s(0, 2);
  w(3, 0) = s(0, 1) - s(1, 0);
  w(1, 1) = s(0, 0) - s(1, 1) - s(2, 2);
  w(2, 1) = s(1, 0) + s(0, 1);
  w(3, 1) = s(2, 0) + s(0, 2);
  w(2, 2) = -s(0, 0) + s(1, 1) - s(2, 2);
  w(3, 2) = s(1, 2) + s(2, 1);
  w(3, 3) = -s(0, 0) - s(1, 1) + s(2, 2);
  w(0, 1) = w(1, 0);
  w(0, 2) = w(2, 0);
  w(0, 3) = w(3, 0);
  w(1, 2) = w(2, 1);
  w(1, 3) = w(3, 1);
  w(2, 3) = w(3, 2);

  const Sym4Eigen eig = jacobi_eigen_sym4(w);
  const double gap = eig.eigenvalues(0) - eig.eigenvalues(1);
  if (gap < 1e-9 * std::max(1.0, std::abs(eig.eigenvalues(0))))
    throw AlignmentAmbiguous("alignment ambiguous: repeated maximum eigenvalue");

  // The eigenvector is scalar-first and describes v -> u; conjugating gives
  // the u -> v rotation in [vector; scalar] storage.
  const Vec4 xi = eig.eigenvectors.col(0);
  UnitQuaternion q(Vec3(-xi(1), -xi(2), -xi(3)), xi(0));
  if (q.scalar() < 0.0 || (q.scalar() == 0.0 && q.vec().sum() < 0.0)) q = -q;

  const Mat3 a = to_rotation(q);
  const Vec3 r = cc.v_bar - a * cc.u_bar;

  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    d += (a * u.points[i] + r - v.points[i]).squaredNorm();
  d /= static_cast<double>(u.size());

  return HornResult{q, r, d};
}

IcpResult icp_register(const PointCloud& scan, const SurfaceModel& model, const Pose& pose0,
                       const IcpOptions& opts) {
  if (scan.empty()) throw Error("icp_register: empty scan");
  if (opts.max_iter < 1) throw Error("icp_register: max_iter must be >= 1");

  IcpResult result;
  result.pose = pose0;
  Pose pose = pose0;
  for (int it = 0; it < opts.max_iter; ++it) {
    const PointCloud v = nearest_correspondences(scan, model, pose);
    const HornResult h = horn_align(scan, v);
    // Horn aligns scan -> model; the tracked pose is the inverse map.
    pose = Pose{h.q, h.r}.inverse();

    result.iterations = it + 1;
    result.residual = h.d;
    result.residual_history.push_back(h.d);
    if (h.d <= opts.d_min) {
      result.converged = true;
      break;
    }
  }
  result.pose = pose;
  result.fit_normalized = std::sqrt(result.residual) / model.characteristic_radius();
  return result;
}

}  // namespace ttrack
