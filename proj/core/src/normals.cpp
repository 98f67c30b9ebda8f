#include "lgr/normals.hpp"

#include <Eigen/SVD>

#include "lgr/errors.hpp"
#include "lgr/sampling.hpp"

namespace lgr {

PointCloud estimate_normals(const PointCloud& cloud, int k) {
  if (k < 3) throw BadK("plane fit needs k >= 3, got " + std::to_string(k));
  const int n = cloud.size();
  const Vec3 c = centroid(cloud.points);

  Points normals(n, 3);
  Eigen::MatrixXd neighborhood(k + 1, 3);
  for (int i = 0; i < n; ++i) {
    const IndexList idx = knn(cloud, i, k);
    neighborhood.row(0) = cloud.points.row(i);
    for (int j = 0; j < k; ++j) neighborhood.row(j + 1) = cloud.points.row(idx[j]);
    neighborhood.rowwise() -= neighborhood.colwise().mean();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(neighborhood, Eigen::ComputeThinV);
    Vec3 normal = svd.matrixV().col(2);

    const double outward = normal.dot(cloud.points.row(i).transpose() - c);
    if (std::abs(outward) <= 1e-9) {
      int axis = 0;
      normal.cwiseAbs().maxCoeff(&axis);
      if (normal[axis] < 0.0) normal = -normal;
    } else if (outward < 0.0) {
      normal = -normal;
    }
    normals.row(i) = normal.transpose();
  }

  PointCloud out = cloud;
  out.normals = std::move(normals);
  return out;
}

}  // namespace lgr
