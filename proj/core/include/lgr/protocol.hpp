#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lgr/model.hpp"
#include "lgr/rotation.hpp"
#include "lgr/shapes.hpp"

namespace lgr {

/// Train/test rotation pairing: first component is the training rotation
/// mode (redrawn per epoch), second the test mode (one fixed rotation per
/// object per seed).
enum class Condition { ZZ, ZSO3, SO3SO3 };

std::string condition_name(Condition condition);
Condition condition_from_name(const std::string& name);

struct DatasetSpec {
  int train_per_class = 80;
  int test_per_class = 20;
  int n_points = 256;
  double jitter = 0.01;
  std::uint64_t seed = 1;
};

struct LabeledCloud {
  PointCloud cloud;  // prepared: centered, unit sphere, analytic normals
  int label = -1;
};

struct Dataset {
  std::vector<LabeledCloud> train, test;
};

/// Disjoint synthetic splits over the five shape classes, deterministic per
/// spec. Every object gets its own sampling seed.
Dataset build_dataset(const DatasetSpec& spec);

struct ProtocolReport {
  std::string condition;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  std::vector<double> per_class;
  std::vector<std::vector<int>> confusion;  // rows true class, cols predicted
  double invariance_max_diff = 0.0;
  double runtime_s = 0.0;
};

/// Trains a model under the given training rotation mode. Invariant inputs
/// (local features, canonical global features) are extracted once from the
/// unrotated clouds; raw global inputs are re-extracted with fresh rotations
/// every epoch.
Model train_condition_model(const ModelConfig& config, const Dataset& dataset,
                            RotationMode train_mode, std::uint64_t seed,
                            TrainHistory* history = nullptr);

/// Accuracy/confusion under the condition's fixed per-object test rotations,
/// plus a spot-check of logit invariance on a handful of test objects.
ProtocolReport evaluate_model(const Model& model, const Dataset& dataset,
                              Condition condition, std::uint64_t seed);

/// Full single-condition run: build data, train, evaluate.
ProtocolReport run_protocol(const ModelConfig& config, const DatasetSpec& data_spec,
                            Condition condition, std::uint64_t seed);

/// All three conditions, reusing the z-trained model for z/z and z/SO3 (the
/// training loop is bit-deterministic, so results equal three separate runs).
std::vector<ProtocolReport> run_protocol_all(const ModelConfig& config,
                                             const DatasetSpec& data_spec,
                                             std::uint64_t seed);

enum class AblationSuite { Branches, Fusion, Sampling };

AblationSuite suite_from_name(const std::string& name);

struct AblationCell {
  std::string name;
  ProtocolReport report;
};

/// Branches: global-only / local-only / avg-pool / cat-conv / attention.
/// Fusion: avg-pool / cat-conv / attention. Sampling: m in {8,16,32} x
/// {fps, random}. All cells run under z/z.
std::vector<AblationCell> run_ablation(AblationSuite suite, const ModelConfig& base,
                                       const DatasetSpec& data_spec, std::uint64_t seed);

// Stable-order JSON serializations (strings so public headers stay free of
// the json dependency).
std::string report_json(const ProtocolReport& report);
std::string ablation_json(const std::string& suite, const std::vector<AblationCell>& cells,
                          std::uint64_t seed, double runtime_s);

}  // namespace lgr
