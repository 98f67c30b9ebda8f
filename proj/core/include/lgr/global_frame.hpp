#pragma once

#include "lgr/feature_rows.hpp"
#include "lgr/point_cloud.hpp"

namespace lgr {

/// Canonical basis estimated from the down-sampled skeleton. Columns of V are
/// the three axes, ordered by descending singular value and sign-resolved
/// against the anchor point.
struct GlobalFrame {
  Mat3 V;
  int anchor = -1;
  Vec3 singular_values = Vec3::Zero();
  /// Set when sigma2/sigma1 < 1e-6 or sigma2 - sigma3 < 1e-6 * sigma1; the
  /// frame is still returned but axis directions are unstable.
  bool rank_deficient = false;
};

/// Cloud coordinates expressed in a canonical frame.
struct ProjectedCloud {
  Points points;
  std::optional<Points> normals;

  int size() const { return static_cast<int>(points.rows()); }
};

/// Flips every column of V whose dot product with anchor_vec is negative, so
/// all axes point within 90 degrees of the anchor. Throws AmbiguousAnchor
/// when any |column . anchor| < 1e-6 * ||anchor|| (caller retries with the
/// next-farthest anchor), ZeroVector on a null anchor.
Mat3 disambiguate_signs(const Mat3& V, const Vec3& anchor_vec);

/// SVD of the m-point farthest-point-sampled skeleton of a centered cloud,
/// sign-resolved with the farthest-from-centroid anchor (falling back to the
/// next-farthest whenever the anchor is ambiguous). Requires a centered cloud
/// and 3 <= m <= N.
GlobalFrame canonical_frame(const PointCloud& cloud, int m);

/// Same, but the skeleton row indices are supplied by the caller (used to
/// compare sampling strategies).
GlobalFrame canonical_frame_from_indices(const PointCloud& cloud,
                                         const IndexList& skeleton);

/// P_hat = P * V; normals transform with the same V.
ProjectedCloud project(const PointCloud& cloud, const GlobalFrame& frame);

/// Asymmetric edge rows over the kNN graph of the projected coordinates:
/// neighbor j of point i contributes [p_i, p_j - p_i] (6 values).
FeatureRows edge_features(const ProjectedCloud& projected, int k);

}  // namespace lgr
