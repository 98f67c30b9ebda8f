#include "lgr/sampling.hpp"

#include <algorithm>
#include <limits>

#include "lgr/errors.hpp"

namespace lgr {

IndexList knn(const Points& points, int query, int k) {
  const int n = static_cast<int>(points.rows());
  if (k < 1 || k >= n) {
    throw BadK("k must be in [1, N-1], got k=" + std::to_string(k) +
               " with N=" + std::to_string(n));
  }

  std::vector<std::pair<double, int>> by_distance;
  by_distance.reserve(n - 1);
  const Vec3 q = points.row(query).transpose();
  for (int i = 0; i < n; ++i) {
    if (i == query) continue;
    by_distance.emplace_back((points.row(i).transpose() - q).squaredNorm(), i);
  }
  std::sort(by_distance.begin(), by_distance.end());

  IndexList out(k);
  for (int j = 0; j < k; ++j) out[j] = by_distance[j].second;
  return out;
}

IndexList knn(const PointCloud& cloud, int query, int k) {
  return knn(cloud.points, query, k);
}

IndexList farthest_point_sample(const Points& points, int m) {
  const int n = static_cast<int>(points.rows());
  if (m < 1 || m > n) {
    throw BadCount("m must be in [1, N], got m=" + std::to_string(m) +
                   " with N=" + std::to_string(n));
  }

  const Vec3 c = centroid(points);
  int seed = 0;
  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    const double d = (points.row(i).transpose() - c).squaredNorm();
    if (d > best) {
      best = d;
      seed = i;
    }
  }

  IndexList selected;
  selected.reserve(m);
  selected.push_back(seed);

  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  std::vector<char> taken(n, 0);
  taken[seed] = 1;
  while (static_cast<int>(selected.size()) < m) {
    const Vec3 last = points.row(selected.back()).transpose();
    int next = -1;
    double far = -1.0;
    for (int i = 0; i < n; ++i) {
      const double d = (points.row(i).transpose() - last).squaredNorm();
      if (d < min_dist[i]) min_dist[i] = d;
      if (!taken[i] && min_dist[i] > far) {
        far = min_dist[i];
        next = i;
      }
    }
    taken[next] = 1;
    selected.push_back(next);
  }
  return selected;
}

IndexList farthest_point_sample(const PointCloud& cloud, int m) {
  return farthest_point_sample(cloud.points, m);
}

}  // namespace lgr
