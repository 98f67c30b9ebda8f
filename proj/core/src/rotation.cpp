#include "lgr/rotation.hpp"

#include <cmath>

namespace lgr {

RotationMatrix RotationMatrix::about_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 m;
  m << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return {m};
}

bool RotationMatrix::is_valid(double tol) const {
  const Mat3 gram = m.transpose() * m;
  if (((gram - Mat3::Identity()).cwiseAbs().maxCoeff()) > tol) return false;
  return std::abs(m.determinant() - 1.0) <= tol;
}

RotationMatrix random_rotation(Rng& rng, RotationMode mode) {
  if (mode == RotationMode::Z) {
    return RotationMatrix::about_z(rng.uniform(0.0, 2.0 * M_PI));
  }

  // Shoemake: three uniforms -> Haar-uniform unit quaternion.
  const double u1 = rng.uniform();
  const double u2 = rng.uniform();
  const double u3 = rng.uniform();
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  double x = a * std::sin(2.0 * M_PI * u2);
  double y = a * std::cos(2.0 * M_PI * u2);
  double z = b * std::sin(2.0 * M_PI * u3);
  double w = b * std::cos(2.0 * M_PI * u3);
  const double norm = std::sqrt(x * x + y * y + z * z + w * w);
  x /= norm;
  y /= norm;
  z /= norm;
  w /= norm;

  Mat3 m;
  m << 1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w),
      2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w),
      2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y);
  return {m};
}

PointCloud apply_rotation(const PointCloud& cloud, const RotationMatrix& rotation) {
  PointCloud out;
  out.points = cloud.points * rotation.m;
  if (cloud.normals) {
    Points n = *cloud.normals * rotation.m;
    n.array().colwise() /= n.rowwise().norm().array();
    out.normals = std::move(n);
  }
  return out;
}

}  // namespace lgr
