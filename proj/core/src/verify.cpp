#include "lgr/verify.hpp"

#include <cmath>
#include <vector>

#include "lgr/errors.hpp"
#include "lgr/global_frame.hpp"
#include "lgr/local_features.hpp"
#include "lgr/rng.hpp"
#include "lgr/rotation.hpp"

namespace lgr {

namespace {

/// Stacked [distances; cosines] over all point pairs, in a fixed order.
std::vector<double> pair_geometry(const Points& points) {
  const int n = static_cast<int>(points.rows());
  std::vector<double> values;
  values.reserve(static_cast<size_t>(n) * (n - 1));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      values.push_back((points.row(i) - points.row(j)).norm());
    }
  }
  for (int i = 0; i < n; ++i) {
    const double ni = points.row(i).norm();
    if (ni <= 1e-12) continue;
    for (int j = i + 1; j < n; ++j) {
      const double nj = points.row(j).norm();
      if (nj <= 1e-12) continue;
      values.push_back(points.row(i).dot(points.row(j)) / (ni * nj));
    }
  }
  return values;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace

InvarianceReport verify_pairwise_invariance(const PointCloud& cloud, int trials,
                                            double tol, std::uint64_t seed) {
  const std::vector<double> base = pair_geometry(cloud.points);
  Rng rng(Rng::derive(seed, 0x70616972));

  InvarianceReport report{"pairwise_distance_angle", trials, tol, 0.0, false};
  for (int t = 0; t < trials; ++t) {
    const PointCloud rotated = apply_rotation(cloud, random_rotation(rng, RotationMode::SO3));
    report.max_diff = std::max(report.max_diff,
                               max_abs_diff(base, pair_geometry(rotated.points)));
  }
  report.pass = report.max_diff < tol;
  return report;
}

InvarianceReport verify_svd_invariance(const PointCloud& cloud, int trials, int m,
                                       double tol, std::uint64_t seed) {
  const PointCloud centered = center_and_normalize(cloud);
  const GlobalFrame base_frame = canonical_frame(centered, m);

  const Vec3& sv = base_frame.singular_values;
  const double gap = std::min(sv[0] - sv[1], sv[1] - sv[2]);
  if (gap < 5e-3 * sv[0]) {
    throw DegenerateSpectrum("singular values too close: " + std::to_string(sv[0]) +
                             ", " + std::to_string(sv[1]) + ", " + std::to_string(sv[2]));
  }

  const ProjectedCloud base = project(centered, base_frame);
  Rng rng(Rng::derive(seed, 0x737664));

  InvarianceReport report{"svd_projection", trials, tol, 0.0, false};
  for (int t = 0; t < trials; ++t) {
    const PointCloud rotated =
        apply_rotation(centered, random_rotation(rng, RotationMode::SO3));
    const ProjectedCloud projected = project(rotated, canonical_frame(rotated, m));
    report.max_diff = std::max(report.max_diff,
                               (projected.points - base.points).cwiseAbs().maxCoeff());
  }
  report.pass = report.max_diff < tol;
  return report;
}

InvarianceReport verify_feature_invariance(const PointCloud& cloud, int trials,
                                           double tol, std::uint64_t seed, int k, int m) {
  if (!cloud.has_normals()) {
    throw MissingNormals("feature invariance needs normals");
  }
  const PointCloud centered = center_and_normalize(cloud);

  auto features = [&](const PointCloud& c) {
    FeatureRows local = local_representation_rows(c, k);
    FeatureRows edges = edge_features(project(c, canonical_frame(c, m)), k);
    return std::make_pair(std::move(local.rows), std::move(edges.rows));
  };
  const auto [base_local, base_edges] = features(centered);

  Rng rng(Rng::derive(seed, 0x66656174));
  InvarianceReport report{"local_and_edge_features", trials, tol, 0.0, false};
  for (int t = 0; t < trials; ++t) {
    const PointCloud rotated =
        apply_rotation(centered, random_rotation(rng, RotationMode::SO3));
    const auto [local, edges] = features(rotated);
    report.max_diff = std::max(report.max_diff,
                               (local - base_local).cwiseAbs().maxCoeff());
    report.max_diff = std::max(report.max_diff,
                               (edges - base_edges).cwiseAbs().maxCoeff());
  }
  report.pass = report.max_diff < tol;
  return report;
}

}  // namespace lgr
