#pragma once

#include "lgr/point_cloud.hpp"
#include "lgr/rng.hpp"

namespace lgr {

/// Element of SO(3). Points are row vectors, so a cloud transforms as P * m.
struct RotationMatrix {
  Mat3 m;

  static RotationMatrix identity() { return {Mat3::Identity()}; }
  static RotationMatrix about_z(double angle);

  /// True iff m^T m = I and det(m) = 1 within tol per entry.
  bool is_valid(double tol = 1e-12) const;
};

enum class RotationMode { Z, SO3 };

/// Z: rotation about the z axis, angle uniform in [0, 2pi).
/// SO3: Haar-uniform rotation (Shoemake's subgroup quaternion method).
RotationMatrix random_rotation(Rng& rng, RotationMode mode);

/// points' = points * R; normals, when present, transform the same way and
/// are re-normalized row-wise.
PointCloud apply_rotation(const PointCloud& cloud, const RotationMatrix& rotation);

}  // namespace lgr
