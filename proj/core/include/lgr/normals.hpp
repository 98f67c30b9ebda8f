#pragma once

#include "lgr/point_cloud.hpp"

namespace lgr {

/// Plane-fit normal estimation: for each point, the normal is the least
/// significant right singular vector of its centered k-neighborhood (the
/// point plus its k nearest neighbors). Signs are resolved against the
/// outward direction (point minus cloud centroid); when that dot product is
/// zero within 1e-9 the sign is chosen so the largest-magnitude component is
/// positive. Requires k >= 3 (else the plane fit is underdetermined).
PointCloud estimate_normals(const PointCloud& cloud, int k);

}  // namespace lgr
