#include "ttrack/ply.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace ttrack {

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

void write_ply(const std::string& path, const std::vector<Vec3>& points) {
  std::ofstream out(path);
  if (!out) throw Error("write_ply: cannot open " + path);
  out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
      << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
  for (const auto& p : points)
    out << fmt17(p.x()) << ' ' << fmt17(p.y()) << ' ' << fmt17(p.z()) << '\n';
  if (!out) throw Error("write_ply: write failed for " + path);
}

std::vector<Vec3> read_ply(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("read_ply: cannot open " + path);
  std::string line;
  if (!std::getline(in, line) || line != "ply") throw Error("read_ply: missing ply magic");
  std::size_t count = 0;
  bool ascii = false;
  while (std::getline(in, line)) {
    if (line.rfind("format ascii", 0) == 0) ascii = true;
    else if (line.rfind("element vertex ", 0) == 0) count = std::stoul(line.substr(15));
    else if (line == "end_header") break;
  }
  if (!ascii) throw Error("read_ply: only ascii format supported");
  std::vector<Vec3> points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw Error("read_ply: truncated vertex list");
    std::istringstream ss(line);
    Vec3 p;
    if (!(ss >> p.x() >> p.y() >> p.z())) throw Error("read_ply: malformed vertex line");
    points.push_back(p);
  }
  return points;
}

}  // namespace ttrack
