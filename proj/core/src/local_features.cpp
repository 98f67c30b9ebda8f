#include "lgr/local_features.hpp"

#include <algorithm>
#include <cmath>

#include "lgr/errors.hpp"
#include "lgr/sampling.hpp"

namespace lgr {

namespace {

double cosine(const Vec3& a, const Vec3& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace

LocalFrame local_frame(const Vec3& d, const Vec3& n) {
  if (d.norm() <= 1e-12) throw ZeroVector("zero displacement in local_frame");

  Vec3 cross = d.cross(n);
  if (cross.norm() < 1e-9) {
    // d parallel to n: swap in the basis vector least aligned with n.
    int axis = 0;
    n.cwiseAbs().minCoeff(&axis);
    cross = Vec3::Unit(axis).cross(n);
  }
  const Vec3 u = cross.normalized();
  const Vec3 v = u.cross(n).normalized();
  return {n, u, v};
}

FeatureVec8 pair_feature(const Vec3& p_q, const Vec3& n_q, const Vec3& p_k,
                         const Vec3& n_k) {
  const Vec3 d = p_k - p_q;
  const double dist = d.norm();
  if (dist <= 1e-12) throw ZeroVector("coincident points in pair_feature");

  const LocalFrame fq = local_frame(d, n_q);
  const LocalFrame fk = local_frame(d, n_k);

  FeatureVec8 row;
  row << dist, cosine(d, n_q), cosine(d, n_k), cosine(n_q, n_k),
      cosine(fq.u, fk.u), cosine(fq.v, fk.v), cosine(fq.u, fk.v),
      cosine(fq.v, fk.u);
  return row;
}

std::vector<LocalFeature> local_representation(const PointCloud& cloud, int k) {
  if (!cloud.has_normals()) {
    throw MissingNormals("local_representation requires normals");
  }
  const int n = cloud.size();
  const Points& normals = *cloud.normals;

  std::vector<LocalFeature> features;
  features.reserve(n);
  for (int q = 0; q < n; ++q) {
    const IndexList neighbors = knn(cloud, q, k);
    LocalFeature block(k, 8);
    const Vec3 p_q = cloud.points.row(q).transpose();
    const Vec3 n_q = normals.row(q).transpose();
    for (int j = 0; j < k; ++j) {
      const int idx = neighbors[j];
      try {
        block.row(j) = pair_feature(p_q, n_q, cloud.points.row(idx).transpose(),
                                    normals.row(idx).transpose());
      } catch (const ZeroVector&) {
        block.row(j).setZero();  // duplicate point, degenerate pair
      }
    }
    features.push_back(std::move(block));
  }
  return features;
}

FeatureRows local_representation_rows(const PointCloud& cloud, int k) {
  const std::vector<LocalFeature> blocks = local_representation(cloud, k);
  FeatureRows out;
  out.n = static_cast<int>(blocks.size());
  out.k = k;
  out.rows.resize(static_cast<Eigen::Index>(out.n) * k, 8);
  for (int i = 0; i < out.n; ++i) out.rows.middleRows(i * k, k) = blocks[i];
  return out;
}

}  // namespace lgr
