#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lgr/feature_rows.hpp"
#include "lgr/layers.hpp"
#include "lgr/point_cloud.hpp"

namespace lgr {

enum class FusionKind { Attention, AvgPool, CatConv };
enum class BranchMode { Both, GlobalOnly, LocalOnly };
enum class GlobalInput { Canonical, Raw };
enum class SkeletonSampling { Fps, Random };

struct ModelConfig {
  int k = 32;         // neighbors per point
  int m = 32;         // skeleton size for the canonical frame
  int n_classes = 5;
  int normal_k = 16;  // plane-fit neighborhood when normals must be estimated
  std::vector<int> branch_dims{32, 64, 128};
  std::vector<int> classifier_dims{64, 32};
  bool batch_norm = true;
  FusionKind fusion = FusionKind::Attention;
  BranchMode branches = BranchMode::Both;
  GlobalInput global_input = GlobalInput::Canonical;
  SkeletonSampling sampling = SkeletonSampling::Fps;
  double lr = 0.001;
  int epochs = 30;
  int batch = 32;
  std::uint64_t seed = 1;

  int feature_width() const { return branch_dims.back(); }
  bool uses_local() const { return branches != BranchMode::GlobalOnly; }
  bool uses_global() const { return branches != BranchMode::LocalOnly; }
};

struct Model {
  ModelConfig config;
  DenseStack local_mlp;
  DenseStack global_mlp;
  DenseStack fusion_head;  // attention: 2C -> C -> 2
  DenseStack cat_conv;     // cat-conv: 2C -> C
  DenseStack classifier;   // C -> ... -> n_classes
};

/// Fresh model with all weights drawn uniformly from
/// [-1/sqrt(fan_in), +1/sqrt(fan_in)] using config.seed.
Model make_model(const ModelConfig& config);

/// Feature tensors of one object, ready for the branch MLPs. Either side may
/// be empty depending on config.branches.
struct FeatureSample {
  FeatureRows local;   // (N*k) x 8
  FeatureRows global;  // (N*k) x 6
  int label = -1;
};

using Batch = std::vector<const FeatureSample*>;

/// center_and_normalize plus normal estimation when the cloud has none.
PointCloud prepare_cloud(const PointCloud& cloud, const ModelConfig& config);

/// Runs the geometric pipeline on a prepared cloud. sampling_seed feeds the
/// random-skeleton strategy and is ignored for FPS.
FeatureSample extract_features(const PointCloud& prepared, const ModelConfig& config,
                               std::uint64_t sampling_seed = 0);

// ---- forward / backward ----

struct BranchCache {
  StackCache stack;
  Eigen::MatrixXi argmax;  // n x C, winning neighbor row per channel
};

struct SampleCache {
  BranchCache local, global;
  Eigen::MatrixXd feat_local, feat_global;  // n x C maps after pooling
  StackCache fusion_stack;
  Eigen::MatrixXd fusion_weights;           // n x 2 (attention only)
  Eigen::MatrixXd fused;                    // n x C
  Eigen::VectorXi pool_argmax;              // C, winning point per channel
};

struct BatchCache {
  std::vector<SampleCache> samples;
  Eigen::MatrixXd pooled;  // B x C
  StackCache classifier;
  Eigen::MatrixXd logits;  // B x n_classes
};

/// Pure batch forward; returns B x n_classes logits. Never mutates the model.
Eigen::MatrixXd forward_batch(const Model& model, const Batch& batch, Mode mode,
                              BatchCache* cache = nullptr);

/// Training forward that also commits batch-norm running statistics.
Eigen::MatrixXd forward_batch_train(Model& model, const Batch& batch, BatchCache& cache);

/// Full pipeline on one cloud (prepare, extract, inference forward).
Eigen::VectorXd classify_forward(const Model& model, const PointCloud& cloud);

/// Inference logits for an already-extracted sample.
Eigen::VectorXd infer_sample(const Model& model, const FeatureSample& sample);

/// Column-wise max over the points of a feature map.
Eigen::VectorXd global_max_pool(const Eigen::MatrixXd& features);

/// Per-point softmax fusion of two equally shaped maps. Returns the fused map
/// and the n x 2 weight matrix (rows sum to 1).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> attention_fuse(
    const Eigen::MatrixXd& feat_global, const Eigen::MatrixXd& feat_local,
    const DenseStack& head, Mode mode);

/// Shared-MLP-over-rows branch: applies the stack to every neighbor row, then
/// max-pools over each point's k rows.
Eigen::MatrixXd branch_forward(const DenseStack& mlp, const FeatureRows& rows, Mode mode);

/// Numerically stable softmax cross entropy. Throws BadLabel.
double cross_entropy_loss(const Eigen::VectorXd& logits, int label);

/// Mean cross entropy over batch logits.
double mean_loss(const Eigen::MatrixXd& logits, const std::vector<int>& labels);

int predicted_class(const Eigen::VectorXd& logits);

struct ModelGrads {
  std::vector<DenseGrads> local, global, fusion, cat_conv, classifier;
};

ModelGrads zero_grads(const Model& model);

/// Mean-reduced gradients of the batch loss for every trainable parameter.
/// Pure: runs its own training-mode forward without stat commits.
ModelGrads backward(const Model& model, const Batch& batch);

/// Backward pass reusing an existing training-mode forward cache.
ModelGrads backward_from_cache(const Model& model, const Batch& batch,
                               const BatchCache& cache);

/// theta <- theta - lr * g, over every trainable parameter.
void sgd_step(Model& model, const ModelGrads& grads, double lr);

// ---- parameter traversal (fixed order shared by SGD, checkpointing and the
// gradient checker) ----

std::vector<double*> parameter_pointers(Model& model);
int parameter_count(const Model& model);
Eigen::VectorXd flatten_grads(const Model& model, const ModelGrads& grads);

/// Routing decisions (leaky-relu signs, pooling argmaxes) of a cached
/// forward; probes whose routing changes between +/-eps straddle a kink and
/// are skipped by the gradient checker.
std::vector<int> routing_signature(const Model& model, const BatchCache& cache);

struct GradCheckReport {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;
};

/// Central-difference check of backward() on >= n_probes randomly sampled
/// parameters. Relative error uses denominator max(1, |a|, |b|).
GradCheckReport finite_diff_check(const Model& model, const Batch& batch, double eps,
                                  int n_probes = 200, std::uint64_t seed = 0);

// ---- training ----

struct EpochStats {
  double loss = 0.0;
  double accuracy = 0.0;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
};

/// Feature tensors for epoch `e`; reuse one vector when the inputs are static.
using DatasetProvider = std::function<const std::vector<FeatureSample>&(int epoch)>;

/// Deterministic SGD loop driven by model.config (lr, batch, epochs, seed).
TrainHistory train(Model& model, const DatasetProvider& provider);
TrainHistory train(Model& model, const std::vector<FeatureSample>& dataset);

}  // namespace lgr
