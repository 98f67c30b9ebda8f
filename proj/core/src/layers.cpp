#include "lgr/layers.hpp"

#include "lgr/errors.hpp"

namespace lgr {

namespace {

Eigen::MatrixXd activate(const Eigen::MatrixXd& h, Activation act) {
  if (act == Activation::Identity) return h;
  return h.cwiseMax(h * kLeakySlope);
}

}  // namespace

Eigen::MatrixXd dense_apply(const DenseLayer& layer, const Eigen::MatrixXd& input,
                            Mode mode, DenseCache* cache, BnBatchStats* stats) {
  if (input.cols() != layer.in_width()) {
    throw ShapeMismatch("dense layer expects width " + std::to_string(layer.in_width()) +
                        ", got " + std::to_string(input.cols()));
  }

  Eigen::MatrixXd z = input * layer.weight.transpose();
  z.rowwise() += layer.bias.transpose();

  if (cache) {
    cache->input = input;
    cache->mode = mode;
  }

  if (layer.bn) {
    const BatchNorm& bn = *layer.bn;
    const auto rows = static_cast<double>(z.rows());
    Eigen::VectorXd mean, var;
    if (mode == Mode::Training) {
      mean = z.colwise().mean();
      var = (z.rowwise() - mean.transpose()).array().square().colwise().sum() / rows;
      if (stats) {
        stats->mean = mean;
        stats->var = var;
        stats->valid = true;
      }
    } else {
      mean = bn.running_mean;
      var = bn.running_var;
    }
    const Eigen::VectorXd inv_std = (var.array() + bn.eps).rsqrt();
    Eigen::MatrixXd x_hat =
        (z.rowwise() - mean.transpose()).array().rowwise() * inv_std.transpose().array();
    z = (x_hat.array().rowwise() * bn.gamma.transpose().array()).matrix();
    z.rowwise() += bn.beta.transpose();
    if (cache) {
      cache->normalized = std::move(x_hat);
      cache->inv_std = inv_std;
    }
  }

  if (cache) cache->pre_act = z;
  return activate(z, layer.activation);
}

Eigen::MatrixXd dense_forward(DenseLayer& layer, const Eigen::MatrixXd& input, Mode mode) {
  BnBatchStats stats;
  Eigen::MatrixXd out = dense_apply(layer, input, mode, nullptr, &stats);
  if (stats.valid) commit_bn_stats(layer, stats);
  return out;
}

void commit_bn_stats(DenseLayer& layer, const BnBatchStats& stats) {
  if (!layer.bn || !stats.valid) return;
  BatchNorm& bn = *layer.bn;
  bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * stats.mean;
  bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * stats.var;
}

DenseGrads zero_grads(const DenseLayer& layer) {
  DenseGrads g;
  g.d_weight = Eigen::MatrixXd::Zero(layer.weight.rows(), layer.weight.cols());
  g.d_bias = Eigen::VectorXd::Zero(layer.bias.size());
  if (layer.bn) {
    g.d_gamma = Eigen::VectorXd::Zero(layer.bn->gamma.size());
    g.d_beta = Eigen::VectorXd::Zero(layer.bn->beta.size());
  }
  return g;
}

Eigen::MatrixXd dense_backward(const DenseLayer& layer, const DenseCache& cache,
                               const Eigen::MatrixXd& d_output, DenseGrads& grads) {
  // Activation.
  Eigen::MatrixXd d_h = d_output;
  if (layer.activation == Activation::LeakyRelu) {
    d_h.array() *= (cache.pre_act.array() > 0.0).select(1.0, kLeakySlope);
  }

  // Batch norm.
  Eigen::MatrixXd d_z;
  if (layer.bn) {
    const BatchNorm& bn = *layer.bn;
    grads.d_gamma += (d_h.array() * cache.normalized.array()).colwise().sum().matrix();
    grads.d_beta += d_h.colwise().sum();

    Eigen::MatrixXd d_xhat = d_h.array().rowwise() * bn.gamma.transpose().array();
    if (cache.mode == Mode::Training) {
      const auto rows = static_cast<double>(d_h.rows());
      const Eigen::RowVectorXd sum_dxhat = d_xhat.colwise().sum();
      const Eigen::RowVectorXd sum_dxhat_xhat =
          (d_xhat.array() * cache.normalized.array()).colwise().sum();
      d_z = (rows * d_xhat.array() -
             (Eigen::MatrixXd::Ones(d_h.rows(), 1) * sum_dxhat).array() -
             cache.normalized.array().rowwise() * sum_dxhat_xhat.array())
                .rowwise() *
            (cache.inv_std.transpose().array() / rows);
    } else {
      d_z = d_xhat.array().rowwise() * cache.inv_std.transpose().array();
    }
  } else {
    d_z = std::move(d_h);
  }

  grads.d_weight += d_z.transpose() * cache.input;
  grads.d_bias += d_z.colwise().sum();
  return d_z * layer.weight;
}

Eigen::MatrixXd stack_apply(const DenseStack& stack, Eigen::MatrixXd x, Mode mode,
                            StackCache* cache, std::vector<BnBatchStats>* stats) {
  if (cache) cache->layers.resize(stack.size());
  if (stats) stats->resize(stack.size());
  for (size_t i = 0; i < stack.size(); ++i) {
    x = dense_apply(stack[i], x, mode, cache ? &cache->layers[i] : nullptr,
                    stats ? &(*stats)[i] : nullptr);
  }
  return x;
}

Eigen::MatrixXd stack_backward(const DenseStack& stack, const StackCache& cache,
                               Eigen::MatrixXd d_out, std::vector<DenseGrads>& grads) {
  for (int i = static_cast<int>(stack.size()) - 1; i >= 0; --i) {
    d_out = dense_backward(stack[i], cache.layers[i], d_out, grads[i]);
  }
  return d_out;
}

}  // namespace lgr
