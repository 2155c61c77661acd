// Synthetic scan generation standing in for the laser camera: seeded
// subsampling of the visible side of the model, Gaussian range noise, and
// blackout fault injection.
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ttrack/icp.hpp"
#include "ttrack/types.hpp"

namespace ttrack {

struct ScanFrame {
  PointCloud cloud;  // sensor frame {A}
  double t = 0.0;
  bool valid = true;
};

// Sorted, non-overlapping blackout windows [start, end).
class FaultSchedule {
 public:
  FaultSchedule() = default;
  explicit FaultSchedule(std::vector<std::pair<double, double>> windows);

  bool blacked_out(double t) const;
  const std::vector<std::pair<double, double>>& windows() const { return windows_; }

 private:
  std::vector<std::pair<double, double>> windows_;
};

// Draws m model points facing the sensor (outward-normal proxy from the
// centroid direction; falls back to the full set when fewer than m face),
// transforms them by the true pose and adds isotropic Gaussian noise.
ScanFrame sample_scan(const SurfaceModel& model, const Pose& true_pose, std::size_t m,
                      double sigma_scan, std::uint64_t seed, const Vec3& view_dir);

// Clears the frame when t falls inside a blackout window.
ScanFrame apply_faults(double t, ScanFrame frame, const FaultSchedule& sched);

}  // namespace ttrack
