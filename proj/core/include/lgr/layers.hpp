#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace lgr {

enum class Activation { LeakyRelu, Identity };
enum class Mode { Training, Inference };

inline constexpr double kLeakySlope = 0.01;

struct BatchNorm {
  Eigen::VectorXd gamma, beta, running_mean, running_var;
  double momentum = 0.9;
  double eps = 1e-5;
};

/// y = act(bn(x W^T + b)). Batch norm is optional; the final layer of a stack
/// is usually Identity without it.
struct DenseLayer {
  Eigen::MatrixXd weight;  // out x in
  Eigen::VectorXd bias;    // out
  Activation activation = Activation::LeakyRelu;
  std::optional<BatchNorm> bn;

  int in_width() const { return static_cast<int>(weight.cols()); }
  int out_width() const { return static_cast<int>(weight.rows()); }
};

/// Batch statistics observed by one training-mode forward; committed to the
/// running statistics separately so that pure evaluations never mutate.
struct BnBatchStats {
  Eigen::VectorXd mean, var;
  bool valid = false;
};

struct DenseCache {
  Eigen::MatrixXd input;       // B x in
  Eigen::MatrixXd normalized;  // x_hat, bn only
  Eigen::VectorXd inv_std;     // 1/sqrt(var + eps), bn only
  Eigen::MatrixXd pre_act;     // post-bn, pre-activation
  Mode mode = Mode::Training;
};

struct DenseGrads {
  Eigen::MatrixXd d_weight;
  Eigen::VectorXd d_bias, d_gamma, d_beta;
};

/// Pure forward; never touches the layer. Training mode normalizes by the
/// batch statistics (reported through stats when given), inference mode by
/// the running statistics.
Eigen::MatrixXd dense_apply(const DenseLayer& layer, const Eigen::MatrixXd& input,
                            Mode mode, DenseCache* cache = nullptr,
                            BnBatchStats* stats = nullptr);

/// Forward that additionally commits the running-statistic update in
/// training mode. Throws ShapeMismatch when input width does not match.
Eigen::MatrixXd dense_forward(DenseLayer& layer, const Eigen::MatrixXd& input, Mode mode);

void commit_bn_stats(DenseLayer& layer, const BnBatchStats& stats);

DenseGrads zero_grads(const DenseLayer& layer);

/// Backward through activation, batch norm, and the affine map; accumulates
/// parameter gradients into grads and returns d_input.
Eigen::MatrixXd dense_backward(const DenseLayer& layer, const DenseCache& cache,
                               const Eigen::MatrixXd& d_output, DenseGrads& grads);

using DenseStack = std::vector<DenseLayer>;

struct StackCache {
  std::vector<DenseCache> layers;
};

Eigen::MatrixXd stack_apply(const DenseStack& stack, Eigen::MatrixXd x, Mode mode,
                            StackCache* cache = nullptr,
                            std::vector<BnBatchStats>* stats = nullptr);
Eigen::MatrixXd stack_backward(const DenseStack& stack, const StackCache& cache,
                               Eigen::MatrixXd d_out, std::vector<DenseGrads>& grads);

}  // namespace lgr
