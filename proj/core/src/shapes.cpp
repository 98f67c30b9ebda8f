#include "lgr/shapes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "lgr/errors.hpp"
#include "lgr/rng.hpp"

namespace lgr {

namespace {

constexpr double kTau = 2.0 * 3.14159265358979323846;
constexpr int kGrid = 128;  // cells per parameter axis

/// Parametric surface patch over (u,v) in [0,1]^2 with analytic normals.
struct Patch {
  std::function<Vec3(double, double)> pos;
  std::function<Vec3(double, double)> normal;
};

/// Cell weights approximating the area element, for inverse-CDF sampling.
std::vector<double> cell_weights(const Patch& patch) {
  std::vector<double> w(kGrid * kGrid);
  const double step = 1.0 / kGrid;
  for (int iu = 0; iu < kGrid; ++iu) {
    for (int iv = 0; iv < kGrid; ++iv) {
      const double u = iu * step;
      const double v = iv * step;
      const Vec3 p00 = patch.pos(u, v);
      const Vec3 du = patch.pos(u + step, v) - p00;
      const Vec3 dv = patch.pos(u, v + step) - p00;
      w[iu * kGrid + iv] = du.cross(dv).norm();
    }
  }
  return w;
}

/// floor(total * w_i / W) plus largest-remainder rounding; deterministic,
/// ties toward the lower index.
std::vector<int> proportional_allocation(const std::vector<double>& weights, int total) {
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  const int n = static_cast<int>(weights.size());
  std::vector<int> counts(n);
  std::vector<std::pair<double, int>> remainders(n);
  int assigned = 0;
  for (int i = 0; i < n; ++i) {
    const double exact = total * weights[i] / sum;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders[i] = {-(exact - counts[i]), i};  // most-deserving first
  }
  std::sort(remainders.begin(), remainders.end());
  for (int i = 0; i < total - assigned; ++i) ++counts[remainders[i].second];
  return counts;
}

PointCloud sample_patches(const std::vector<Patch>& patches, int n_points, Rng& rng) {
  std::vector<std::vector<double>> weights;
  std::vector<double> patch_area;
  for (const Patch& p : patches) {
    weights.push_back(cell_weights(p));
    patch_area.push_back(
        std::accumulate(weights.back().begin(), weights.back().end(), 0.0));
  }
  const std::vector<int> counts = proportional_allocation(patch_area, n_points);

  PointCloud cloud;
  cloud.points.resize(n_points, 3);
  Points normals(n_points, 3);
  int at = 0;
  const double step = 1.0 / kGrid;
  for (size_t pi = 0; pi < patches.size(); ++pi) {
    std::vector<double> cdf(weights[pi].size());
    std::partial_sum(weights[pi].begin(), weights[pi].end(), cdf.begin());
    for (int s = 0; s < counts[pi]; ++s) {
      const double r = rng.uniform() * cdf.back();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), r);
      const int cell = static_cast<int>(std::min<std::ptrdiff_t>(
          it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
      const double u = (cell / kGrid + rng.uniform()) * step;
      const double v = (cell % kGrid + rng.uniform()) * step;
      cloud.points.row(at) = patches[pi].pos(u, v).transpose();
      normals.row(at) = patches[pi].normal(u, v).normalized().transpose();
      ++at;
    }
  }
  cloud.normals = std::move(normals);
  return cloud;
}

Patch rectangle(const Vec3& corner, const Vec3& edge_u, const Vec3& edge_v,
                const Vec3& normal) {
  return {[=](double u, double v) { return Vec3(corner + u * edge_u + v * edge_v); },
          [=](double, double) { return normal; }};
}

std::vector<Patch> box_patches() {
  const double hx = 1.0, hy = 0.6, hz = 0.35;
  std::vector<Patch> faces;
  faces.push_back(rectangle({hx, -hy, -hz}, {0, 2 * hy, 0}, {0, 0, 2 * hz}, {1, 0, 0}));
  faces.push_back(rectangle({-hx, -hy, -hz}, {0, 2 * hy, 0}, {0, 0, 2 * hz}, {-1, 0, 0}));
  faces.push_back(rectangle({-hx, hy, -hz}, {2 * hx, 0, 0}, {0, 0, 2 * hz}, {0, 1, 0}));
  faces.push_back(rectangle({-hx, -hy, -hz}, {2 * hx, 0, 0}, {0, 0, 2 * hz}, {0, -1, 0}));
  faces.push_back(rectangle({-hx, -hy, hz}, {2 * hx, 0, 0}, {0, 2 * hy, 0}, {0, 0, 1}));
  faces.push_back(rectangle({-hx, -hy, -hz}, {2 * hx, 0, 0}, {0, 2 * hy, 0}, {0, 0, -1}));
  return faces;
}

std::vector<Patch> cylinder_patches() {
  const double a = 0.5, b = 0.3, h = 1.0;
  std::vector<Patch> patches;
  patches.push_back({[=](double u, double v) {
                       const double phi = kTau * u;
                       return Vec3(a * std::cos(phi), b * std::sin(phi), -h + 2 * h * v);
                     },
                     [=](double u, double) {
                       const double phi = kTau * u;
                       return Vec3(std::cos(phi) / a, std::sin(phi) / b, 0.0);
                     }});
  for (const double side : {1.0, -1.0}) {
    patches.push_back({[=](double u, double v) {
                         const double phi = kTau * v;
                         return Vec3(a * u * std::cos(phi), b * u * std::sin(phi), side * h);
                       },
                       [=](double, double) { return Vec3(0.0, 0.0, side); }});
  }
  return patches;
}

std::vector<Patch> cone_patches() {
  const double a = 0.6, b = 0.35, h = 1.4;
  std::vector<Patch> patches;
  patches.push_back({[=](double u, double v) {
                       const double phi = kTau * v;
                       return Vec3((1 - u) * a * std::cos(phi), (1 - u) * b * std::sin(phi),
                                   h * u);
                     },
                     [=](double, double v) {
                       const double phi = kTau * v;
                       return Vec3(b * h * std::cos(phi), a * h * std::sin(phi), a * b);
                     }});
  patches.push_back({[=](double u, double v) {
                       const double phi = kTau * v;
                       return Vec3(a * u * std::cos(phi), b * u * std::sin(phi), 0.0);
                     },
                     [](double, double) { return Vec3(0.0, 0.0, -1.0); }});
  return patches;
}

std::vector<Patch> ellipsoid_patches() {
  const double a = 1.0, b = 0.6, c = 0.3;
  return {{[=](double u, double v) {
             const double theta = 3.14159265358979323846 * u;
             const double phi = kTau * v;
             return Vec3(a * std::sin(theta) * std::cos(phi),
                         b * std::sin(theta) * std::sin(phi), c * std::cos(theta));
           },
           [=](double u, double v) {
             const double theta = 3.14159265358979323846 * u;
             const double phi = kTau * v;
             return Vec3(std::sin(theta) * std::cos(phi) / a,
                         std::sin(theta) * std::sin(phi) / b, std::cos(theta) / c);
           }}};
}

std::vector<Patch> bracket_patches() {
  // Horizontal plate plus a taller vertical plate sharing the y = -0.35 edge.
  std::vector<Patch> plates;
  plates.push_back(
      rectangle({-0.6, -0.35, 0.0}, {1.2, 0, 0}, {0, 0.7, 0}, {0, 0, 1}));
  plates.push_back(
      rectangle({-0.6, -0.35, 0.0}, {1.2, 0, 0}, {0, 0, 0.8}, {0, -1, 0}));
  return plates;
}

}  // namespace

std::string shape_name(ShapeKind kind) {
  switch (kind) {
    case ShapeKind::Box: return "box";
    case ShapeKind::Cylinder: return "cylinder";
    case ShapeKind::Cone: return "cone";
    case ShapeKind::Ellipsoid: return "ellipsoid";
    case ShapeKind::LBracket: return "l_bracket";
  }
  return "box";
}

ShapeKind shape_from_label(int label) {
  switch (label) {
    case 0: return ShapeKind::Box;
    case 1: return ShapeKind::Cylinder;
    case 2: return ShapeKind::Cone;
    case 3: return ShapeKind::Ellipsoid;
    case 4: return ShapeKind::LBracket;
  }
  throw BadLabel("no shape for label " + std::to_string(label));
}

PointCloud sample_surface(const ShapeSpec& spec) {
  if (spec.n_points < 64) {
    throw std::invalid_argument("shape needs n_points >= 64");
  }
  if (spec.jitter < 0.0) throw std::invalid_argument("negative jitter");

  std::vector<Patch> patches;
  switch (spec.kind) {
    case ShapeKind::Box: patches = box_patches(); break;
    case ShapeKind::Cylinder: patches = cylinder_patches(); break;
    case ShapeKind::Cone: patches = cone_patches(); break;
    case ShapeKind::Ellipsoid: patches = ellipsoid_patches(); break;
    case ShapeKind::LBracket: patches = bracket_patches(); break;
  }
  Rng rng(Rng::derive(spec.seed, static_cast<std::uint64_t>(spec.kind) * 2 + 1));
  return sample_patches(patches, spec.n_points, rng);
}

PointCloud make_shape(const ShapeSpec& spec) {
  PointCloud cloud = sample_surface(spec);
  if (spec.jitter > 0.0) {
    Rng rng(Rng::derive(spec.seed, static_cast<std::uint64_t>(spec.kind) * 2 + 1000003));
    for (int i = 0; i < cloud.size(); ++i) {
      for (int c = 0; c < 3; ++c) cloud.points(i, c) += spec.jitter * rng.gaussian();
    }
  }
  return center_and_normalize(cloud);
}

}  // namespace lgr
