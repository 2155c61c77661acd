#include "ttrack/sensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ttrack/rng.hpp"

namespace ttrack {

FaultSchedule::FaultSchedule(std::vector<std::pair<double, double>> windows)
    : windows_(std::move(windows)) {
  std::sort(windows_.begin(), windows_.end());
  for (std::size_t i = 0; i < windows_.size(); ++i) {
    if (windows_[i].second <= windows_[i].first)
      throw Error("FaultSchedule: window end must exceed start");
    if (i > 0 && windows_[i].first < windows_[i - 1].second)
      throw Error("FaultSchedule: overlapping windows");
  }
}

bool FaultSchedule::blacked_out(double t) const {
  for (const auto& [start, end] : windows_)
    if (t >= start && t < end) return true;
  return false;
}

ScanFrame sample_scan(const SurfaceModel& model, const Pose& true_pose, std::size_t m,
                      double sigma_scan, std::uint64_t seed, const Vec3& view_dir) {
  if (m < 3) throw Error("sample_scan: need at least 3 points");
  if (model.size() < 3) throw Error("sample_scan: model smaller than 3 points");

  const Mat3 a = to_rotation(true_pose.rotation);
  const Vec3 look = view_dir.norm() > 0.0 ? view_dir.normalized() : Vec3(1, 0, 0);

  // visibility: outward normal proxy is the centroid-to-point direction
  std::vector<std::uint32_t> candidates;
  candidates.reserve(model.size());
  for (std::uint32_t i = 0; i < model.size(); ++i) {
    const Vec3 normal_a = a * (model.points()[i] - model.centroid());
    if (normal_a.dot(look) < 0.0) candidates.push_back(i);
  }
  if (candidates.size() < m) {
    candidates.resize(model.size());
    std::iota(candidates.begin(), candidates.end(), 0u);
  }

  RngStream rng(seed, "scan-sample");
  ScanFrame frame;
  frame.cloud.points.reserve(m);
  if (candidates.size() >= m) {
    // partial Fisher-Yates: first m entries become the sample
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + rng.uniform_below(candidates.size() - i);
      std::swap(candidates[i], candidates[j]);
    }
    candidates.resize(m);
  } else {
    std::vector<std::uint32_t> picks(m);
    for (auto& idx : picks) idx = candidates[rng.uniform_below(candidates.size())];
    candidates = std::move(picks);
  }

  for (const auto idx : candidates) {
    Vec3 u = true_pose.apply(model.points()[idx]);
    if (sigma_scan > 0.0) u += rng.normal3(sigma_scan);
    frame.cloud.points.push_back(u);
  }
  return frame;
}

ScanFrame apply_faults(double t, ScanFrame frame, const FaultSchedule& sched) {
  if (sched.blacked_out(t)) {
    frame.valid = false;
    frame.cloud.points.clear();
  }
  return frame;
}

}  // namespace ttrack
