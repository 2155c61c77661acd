// Procedural target geometry. The default shape is an asymmetric composite
// (box body, offset cylinder antenna, offset dish) with no rotational
// symmetry, sampled as a deterministic surface point grid.
#pragma once

#include <string>
#include <vector>

#include "ttrack/types.hpp"

namespace ttrack {

struct ModelSpec {
  std::string shape = "asymm_composite";  // or "box"
  double scale = 1.0;                     // overall size multiplier, ~1 m
  double spacing = 0.025;                 // surface grid pitch, m (at scale 1)
};

std::vector<Vec3> generate_model_points(const ModelSpec& spec);

}  // namespace ttrack
