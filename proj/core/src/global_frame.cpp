#include "lgr/global_frame.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <numeric>

#include "lgr/errors.hpp"
#include "lgr/sampling.hpp"

namespace lgr {

Mat3 disambiguate_signs(const Mat3& V, const Vec3& anchor_vec) {
  const double norm = anchor_vec.norm();
  if (norm <= 1e-12) throw ZeroVector("null anchor");

  Mat3 out = V;
  for (int c = 0; c < 3; ++c) {
    const double dot = V.col(c).dot(anchor_vec);
    if (std::abs(dot) < 1e-6 * norm) {
      throw AmbiguousAnchor("anchor nearly orthogonal to axis " + std::to_string(c));
    }
    if (dot < 0.0) out.col(c) = -out.col(c);
  }
  return out;
}

GlobalFrame canonical_frame_from_indices(const PointCloud& cloud,
                                         const IndexList& skeleton) {
  const Vec3 c = centroid(cloud.points);
  if (c.norm() >= 1e-9) {
    throw std::invalid_argument("canonical_frame requires a centered cloud");
  }
  if (skeleton.size() < 3) throw BadCount("skeleton needs at least 3 points");

  Eigen::MatrixXd down(skeleton.size(), 3);
  for (size_t i = 0; i < skeleton.size(); ++i) down.row(i) = cloud.points.row(skeleton[i]);

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(down, Eigen::ComputeThinV);

  GlobalFrame frame;
  frame.singular_values = svd.singularValues();
  const double s1 = frame.singular_values[0];
  frame.rank_deficient =
      frame.singular_values[1] < 1e-6 * s1 ||
      frame.singular_values[1] - frame.singular_values[2] < 1e-6 * s1;

  // Anchor candidates ordered farthest-from-centroid first, index on ties.
  const int n = cloud.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> dist(n);
  for (int i = 0; i < n; ++i) dist[i] = (cloud.points.row(i).transpose() - c).squaredNorm();
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (dist[a] != dist[b]) return dist[a] > dist[b];
    return a < b;
  });

  for (int candidate : order) {
    const Vec3 anchor_vec = cloud.points.row(candidate).transpose() - c;
    if (anchor_vec.norm() <= 1e-12) continue;
    try {
      frame.V = disambiguate_signs(svd.matrixV(), anchor_vec);
      frame.anchor = candidate;
      return frame;
    } catch (const AmbiguousAnchor&) {
      continue;  // next-farthest point
    }
  }
  throw AmbiguousAnchor("every candidate anchor is orthogonal to some axis");
}

GlobalFrame canonical_frame(const PointCloud& cloud, int m) {
  if (m < 3) throw BadCount("frame needs m >= 3, got " + std::to_string(m));
  return canonical_frame_from_indices(cloud, farthest_point_sample(cloud, m));
}

ProjectedCloud project(const PointCloud& cloud, const GlobalFrame& frame) {
  ProjectedCloud out;
  out.points = cloud.points * frame.V;
  if (cloud.normals) out.normals = *cloud.normals * frame.V;
  return out;
}

FeatureRows edge_features(const ProjectedCloud& projected, int k) {
  const int n = projected.size();
  FeatureRows out;
  out.n = n;
  out.k = k;
  out.rows.resize(static_cast<Eigen::Index>(n) * k, 6);
  for (int i = 0; i < n; ++i) {
    const IndexList neighbors = knn(projected.points, i, k);
    const auto p_i = projected.points.row(i);
    for (int j = 0; j < k; ++j) {
      out.rows.block<1, 3>(i * k + j, 0) = p_i;
      out.rows.block<1, 3>(i * k + j, 3) = projected.points.row(neighbors[j]) - p_i;
    }
  }
  return out;
}

}  // namespace lgr
