#pragma once

#include "lgr/point_cloud.hpp"

namespace lgr {

/// Indices of the k nearest neighbors of points.row(query), the query itself
/// excluded, sorted ascending by distance with ties broken toward the lower
/// index. Brute force; throws BadK unless 1 <= k <= N-1.
IndexList knn(const Points& points, int query, int k);
IndexList knn(const PointCloud& cloud, int query, int k);

/// Greedy farthest point sampling. The seed point is the one farthest from
/// the centroid; every further pick maximizes the minimum distance to the
/// points already chosen. All ties break toward the lower index. Throws
/// BadCount unless 1 <= m <= N.
IndexList farthest_point_sample(const Points& points, int m);
IndexList farthest_point_sample(const PointCloud& cloud, int m);

}  // namespace lgr
