#pragma once

#include <cstdint>
#include <string>

#include "lgr/point_cloud.hpp"

namespace lgr {

/// Five anisotropic surface families. Aspect ratios are fixed per kind and
/// chosen so the singular values of any reasonable skeleton stay well
/// separated (no rotationally symmetric shapes).
enum class ShapeKind { Box, Cylinder, Cone, Ellipsoid, LBracket };

inline constexpr int kShapeClassCount = 5;

std::string shape_name(ShapeKind kind);
ShapeKind shape_from_label(int label);

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Box;
  int n_points = 256;   // >= 64
  double jitter = 0.0;  // sigma of Gaussian coordinate noise
  std::uint64_t seed = 0;
};

/// Area-weighted surface sample with exact positions and analytic normals,
/// before any noise or normalization. Deterministic per spec.
PointCloud sample_surface(const ShapeSpec& spec);

/// sample_surface + coordinate jitter, then centered and scaled to the unit
/// sphere. Normals stay the analytic ones of the noise-free surface.
PointCloud make_shape(const ShapeSpec& spec);

}  // namespace lgr
