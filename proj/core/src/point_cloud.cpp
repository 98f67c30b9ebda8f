#include "lgr/point_cloud.hpp"

#include "lgr/errors.hpp"

namespace lgr {

Vec3 centroid(const Points& points) { return points.colwise().mean().transpose(); }

PointCloud center_and_normalize(const PointCloud& cloud) {
  if (cloud.size() < 1) throw DegenerateCloud("empty cloud");

  Points shifted = cloud.points.rowwise() - centroid(cloud.points).transpose();
  const double radius = shifted.rowwise().norm().maxCoeff();
  const double scale = cloud.points.cwiseAbs().maxCoeff();
  if (radius <= 1e-12 * std::max(1.0, scale)) {
    throw DegenerateCloud("all points coincide, zero radius");
  }
  shifted /= radius;

  // One residual pass so the output meets the centroid/radius contract even
  // when the input is badly off-center relative to its extent.
  shifted.rowwise() -= centroid(shifted).transpose();
  shifted /= shifted.rowwise().norm().maxCoeff();

  return {std::move(shifted), cloud.normals};
}

}  // namespace lgr
