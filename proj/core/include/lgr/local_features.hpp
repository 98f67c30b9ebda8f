#pragma once

#include <vector>

#include "lgr/feature_rows.hpp"
#include "lgr/point_cloud.hpp"

namespace lgr {

/// Orthonormal frame attached to one end of a point pair: the surface normal
/// n plus two tangent axes derived from the displacement direction.
struct LocalFrame {
  Vec3 n;
  Vec3 u;
  Vec3 v;
};

/// k x 8 per-point feature block: row j = [ ||d||, cos t1 .. cos t7 ] for the
/// j-th neighbor, in kNN order. An all-zero row marks a degenerate
/// (coincident) neighbor pair.
using LocalFeature = Eigen::Matrix<double, Eigen::Dynamic, 8>;

using FeatureVec8 = Eigen::Matrix<double, 1, 8>;

/// Builds the frame for displacement d and unit normal n:
///   u = normalize(d x n), v = normalize(u x n).
/// When d is parallel to n (||d x n|| < 1e-9) the cross falls back to the
/// standard basis vector with the smallest |component| along n, lowest axis
/// index on ties. Throws ZeroVector when ||d|| <= 1e-12.
LocalFrame local_frame(const Vec3& d, const Vec3& n);

/// The pair descriptor of Darboux type: distance plus the cosines of the
/// seven angle pairs (d,n_q), (d,n_k), (n_q,n_k), (u_q,u_k), (v_q,v_k),
/// (u_q,v_k), (v_q,u_k), in that fixed order. Cosines are clamped to [-1,1].
/// Throws ZeroVector on coincident points.
FeatureVec8 pair_feature(const Vec3& p_q, const Vec3& n_q, const Vec3& p_k,
                         const Vec3& n_k);

/// Per-point k x 8 blocks over the kNN graph. Coincident-point neighbor rows
/// become zero rows instead of failing. Throws MissingNormals when the cloud
/// has no normals; BadK as knn.
std::vector<LocalFeature> local_representation(const PointCloud& cloud, int k);

/// Same features flattened to the (N*k) x 8 layout the network consumes.
FeatureRows local_representation_rows(const PointCloud& cloud, int k);

}  // namespace lgr
