#include "ttrack/model.hpp"

#include <cmath>
#include <cstdint>

namespace ttrack {

namespace {

// Deterministic per-point jitter, applied tangentially so surface grids do
// not form perfect lattices (regular grids create aliased ICP minima).
class Jitter {
 public:
  explicit Jitter(double amplitude) : amp_(amplitude) {}

  double next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return amp_ * (2.0 * (static_cast<double>(z >> 11) * 0x1.0p-53) - 1.0);
  }

 private:
  double amp_;
  std::uint64_t state_ = 0x51ab5e11aa0ddefULL;
};

// Axis-aligned box surface grid centered at `center` with half extents `h`.
void add_box(std::vector<Vec3>& pts, const Vec3& center, const Vec3& h, double step,
             Jitter& jit) {
  const int nx = std::max(2, static_cast<int>(std::round(2 * h.x() / step)) + 1);
  const int ny = std::max(2, static_cast<int>(std::round(2 * h.y() / step)) + 1);
  const int nz = std::max(2, static_cast<int>(std::round(2 * h.z() / step)) + 1);
  auto lin = [](double lo, double hi, int n, int i) {
    return lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  };
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      const double x = lin(-h.x(), h.x(), nx, i), y = lin(-h.y(), h.y(), ny, j);
      pts.push_back(center + Vec3(x + jit.next(), y + jit.next(), -h.z()));
      pts.push_back(center + Vec3(x + jit.next(), y + jit.next(), h.z()));
    }
  for (int i = 0; i < nx; ++i)
    for (int k = 1; k + 1 < nz; ++k) {
      const double x = lin(-h.x(), h.x(), nx, i), z = lin(-h.z(), h.z(), nz, k);
      pts.push_back(center + Vec3(x + jit.next(), -h.y(), z + jit.next()));
      pts.push_back(center + Vec3(x + jit.next(), h.y(), z + jit.next()));
    }
  for (int j = 1; j + 1 < ny; ++j)
    for (int k = 1; k + 1 < nz; ++k) {
      const double y = lin(-h.y(), h.y(), ny, j), z = lin(-h.z(), h.z(), nz, k);
      pts.push_back(center + Vec3(-h.x(), y + jit.next(), z + jit.next()));
      pts.push_back(center + Vec3(h.x(), y + jit.next(), z + jit.next()));
    }
}

// Cylinder along +z from `base`, lateral surface plus end cap.
void add_cylinder(std::vector<Vec3>& pts, const Vec3& base, double radius, double length,
                  double step, Jitter& jit) {
  const int n_around = std::max(6, static_cast<int>(std::round(2 * M_PI * radius / step)));
  const int n_along = std::max(2, static_cast<int>(std::round(length / step)) + 1);
  for (int k = 0; k < n_along; ++k) {
    const double z = length * static_cast<double>(k) / static_cast<double>(n_along - 1);
    for (int i = 0; i < n_around; ++i) {
      const double th = 2 * M_PI * i / n_around + jit.next() / radius;
      pts.push_back(base +
                    Vec3(radius * std::cos(th), radius * std::sin(th), z + jit.next()));
    }
  }
  const int n_cap = std::max(1, static_cast<int>(std::round(radius / step)));
  for (int r = 0; r < n_cap; ++r) {
    const double rr = radius * (r + 0.5) / n_cap;
    const int n = std::max(4, static_cast<int>(std::round(2 * M_PI * rr / step)));
    for (int i = 0; i < n; ++i) {
      const double th = 2 * M_PI * i / n + jit.next() / std::max(rr, 1e-3);
      pts.push_back(base + Vec3(rr * std::cos(th), rr * std::sin(th), length));
    }
  }
}

// Spherical cap (dish): sphere of radius R centered at `center`, keeping the
// surface with outward direction within `half_angle` of `axis`.
void add_dish(std::vector<Vec3>& pts, const Vec3& center, double radius, const Vec3& axis,
              double half_angle, double step, Jitter& jit) {
  const Vec3 az = axis.normalized();
  const Vec3 ref = std::abs(az.z()) < 0.9 ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  const Vec3 ax = az.cross(ref).normalized();
  const Vec3 ay = az.cross(ax);
  const int n_rings = std::max(2, static_cast<int>(std::round(radius * half_angle / step)));
  pts.push_back(center + radius * az);
  for (int r = 1; r <= n_rings; ++r) {
    const double phi = half_angle * r / n_rings + jit.next() / radius;
    const double ring_r = radius * std::sin(phi);
    const int n = std::max(6, static_cast<int>(std::round(2 * M_PI * ring_r / step)));
    for (int i = 0; i < n; ++i) {
      const double th = 2 * M_PI * i / n + jit.next() / std::max(ring_r, 1e-3);
      pts.push_back(center + radius * std::cos(phi) * az +
                    ring_r * (std::cos(th) * ax + std::sin(th) * ay));
    }
  }
}

}  // namespace

std::vector<Vec3> generate_model_points(const ModelSpec& spec) {
  const double s = spec.scale;
  const double step = spec.spacing * s;
  if (s <= 0.0 || spec.spacing <= 0.0) throw Error("generate_model_points: bad spec");

  Jitter jit(0.35 * step);
  std::vector<Vec3> pts;
  if (spec.shape == "box") {
    add_box(pts, Vec3::Zero(), s * Vec3(0.5, 0.35, 0.25), step, jit);
  } else if (spec.shape == "asymm_composite") {
    add_box(pts, Vec3::Zero(), s * Vec3(0.5, 0.35, 0.25), step, jit);
    add_cylinder(pts, s * Vec3(0.27, -0.16, 0.25), 0.06 * s, 0.5 * s, step, jit);
    add_dish(pts, s * Vec3(-0.28, 0.22, -0.42), 0.3 * s, Vec3(-0.35, 0.5, 1.0), 0.9, step,
             jit);
  } else {
    throw Error("generate_model_points: unknown shape '" + spec.shape + "'");
  }
  return pts;
}

}  // namespace ttrack
