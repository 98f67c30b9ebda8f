#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace lgr {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// N x 3 matrix, one point (or unit normal) per row.
using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

using IndexList = std::vector<int>;

/// Raw point set with optional per-point unit normals.
struct PointCloud {
  Points points;
  std::optional<Points> normals;

  int size() const { return static_cast<int>(points.rows()); }
  bool has_normals() const { return normals.has_value(); }
};

/// Mean of the rows.
Vec3 centroid(const Points& points);

/// Subtracts the centroid and scales so the farthest point sits on the unit
/// sphere. Normals pass through untouched. Throws DegenerateCloud when all
/// points coincide (zero radius).
PointCloud center_and_normalize(const PointCloud& cloud);

}  // namespace lgr
