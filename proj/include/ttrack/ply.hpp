// Minimal ASCII PLY I/O (vertex x y z, float64). Values are written with
// 17 significant digits so a write/read round trip is bit exact.
#pragma once

#include <string>
#include <vector>

#include "ttrack/types.hpp"

namespace ttrack {

void write_ply(const std::string& path, const std::vector<Vec3>& points);
std::vector<Vec3> read_ply(const std::string& path);

}  // namespace ttrack
