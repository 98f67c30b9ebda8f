#include "lgr/model.hpp"

#include <cmath>

#include "lgr/errors.hpp"
#include "lgr/global_frame.hpp"
#include "lgr/local_features.hpp"
#include "lgr/normals.hpp"
#include "lgr/rng.hpp"

namespace lgr {

namespace {

DenseLayer make_layer(Rng& rng, int in, int out, Activation act, bool with_bn) {
  DenseLayer layer;
  layer.weight.resize(out, in);
  layer.bias.resize(out);
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  for (int r = 0; r < out; ++r) {
    for (int c = 0; c < in; ++c) layer.weight(r, c) = rng.uniform(-bound, bound);
  }
  for (int r = 0; r < out; ++r) layer.bias[r] = rng.uniform(-bound, bound);
  layer.activation = act;
  if (with_bn) {
    BatchNorm bn;
    bn.gamma = Eigen::VectorXd::Ones(out);
    bn.beta = Eigen::VectorXd::Zero(out);
    bn.running_mean = Eigen::VectorXd::Zero(out);
    bn.running_var = Eigen::VectorXd::Ones(out);
    layer.bn = std::move(bn);
  }
  return layer;
}

DenseStack make_branch_stack(Rng& rng, int in, const std::vector<int>& dims, bool bn) {
  DenseStack stack;
  int width = in;
  for (int out : dims) {
    stack.push_back(make_layer(rng, width, out, Activation::LeakyRelu, bn));
    width = out;
  }
  return stack;
}

IndexList random_skeleton(int n, int m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.uniform_index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(m);
  return pool;
}

/// Max over each point's k rows, channel-wise; first row wins ties.
Eigen::MatrixXd pool_over_neighbors(const Eigen::MatrixXd& rows, int n, int k,
                                    Eigen::MatrixXi* argmax) {
  const int channels = static_cast<int>(rows.cols());
  Eigen::MatrixXd pooled(n, channels);
  if (argmax) argmax->resize(n, channels);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < channels; ++c) {
      double best = rows(i * k, c);
      int best_j = 0;
      for (int j = 1; j < k; ++j) {
        const double v = rows(i * k + j, c);
        if (v > best) {
          best = v;
          best_j = j;
        }
      }
      pooled(i, c) = best;
      if (argmax) (*argmax)(i, c) = best_j;
    }
  }
  return pooled;
}

Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(r).array() - m).exp();
    out.row(r) = e / e.sum();
  }
  return out;
}

/// Runs a stack; when commit is non-null (training step) batch-norm running
/// stats are committed to the corresponding layers of *commit.
Eigen::MatrixXd run_stack(const DenseStack& stack, DenseStack* commit,
                          Eigen::MatrixXd x, Mode mode, StackCache* cache) {
  if (mode == Mode::Training && commit) {
    std::vector<BnBatchStats> stats;
    x = stack_apply(stack, std::move(x), mode, cache, &stats);
    for (size_t i = 0; i < stack.size(); ++i) commit_bn_stats((*commit)[i], stats[i]);
    return x;
  }
  return stack_apply(stack, std::move(x), mode, cache);
}

struct MutableStacks {
  DenseStack* local = nullptr;
  DenseStack* global = nullptr;
  DenseStack* fusion = nullptr;
  DenseStack* cat_conv = nullptr;
  DenseStack* classifier = nullptr;
};

Eigen::MatrixXd forward_impl(const Model& model, const Batch& batch, Mode mode,
                             BatchCache* cache, const MutableStacks& mut) {
  const ModelConfig& cfg = model.config;
  const int b = static_cast<int>(batch.size());
  const int channels = cfg.feature_width();
  Eigen::MatrixXd pooled(b, channels);
  if (cache) cache->samples.resize(b);

  for (int s = 0; s < b; ++s) {
    const FeatureSample& fs = *batch[s];
    SampleCache* sc = cache ? &cache->samples[s] : nullptr;

    Eigen::MatrixXd feat_local, feat_global;
    int n = 0;
    if (cfg.uses_local()) {
      if (fs.local.empty()) throw ShapeMismatch("sample lacks local features");
      n = fs.local.n;
      Eigen::MatrixXd rows = run_stack(model.local_mlp, mut.local, fs.local.rows, mode,
                                       sc ? &sc->local.stack : nullptr);
      feat_local = pool_over_neighbors(rows, fs.local.n, fs.local.k,
                                       sc ? &sc->local.argmax : nullptr);
    }
    if (cfg.uses_global()) {
      if (fs.global.empty()) throw ShapeMismatch("sample lacks global features");
      n = fs.global.n;
      Eigen::MatrixXd rows = run_stack(model.global_mlp, mut.global, fs.global.rows, mode,
                                       sc ? &sc->global.stack : nullptr);
      feat_global = pool_over_neighbors(rows, fs.global.n, fs.global.k,
                                        sc ? &sc->global.argmax : nullptr);
    }

    Eigen::MatrixXd fused;
    if (cfg.branches == BranchMode::GlobalOnly) {
      fused = feat_global;
    } else if (cfg.branches == BranchMode::LocalOnly) {
      fused = feat_local;
    } else {
      switch (cfg.fusion) {
        case FusionKind::AvgPool:
          fused = 0.5 * (feat_global + feat_local);
          break;
        case FusionKind::CatConv: {
          Eigen::MatrixXd z(n, 2 * channels);
          z << feat_global, feat_local;
          fused = run_stack(model.cat_conv, mut.cat_conv, std::move(z), mode,
                            sc ? &sc->fusion_stack : nullptr);
          break;
        }
        case FusionKind::Attention: {
          Eigen::MatrixXd z(n, 2 * channels);
          z << feat_global, feat_local;
          Eigen::MatrixXd logits = run_stack(model.fusion_head, mut.fusion, std::move(z), mode,
                                             sc ? &sc->fusion_stack : nullptr);
          Eigen::MatrixXd weights = softmax_rows(logits);
          fused = (feat_global.array().colwise() * weights.col(0).array()) +
                  (feat_local.array().colwise() * weights.col(1).array());
          if (sc) sc->fusion_weights = std::move(weights);
          break;
        }
      }
    }

    // Global max pool over points.
    Eigen::VectorXi* arg = nullptr;
    if (sc) {
      sc->pool_argmax.resize(channels);
      arg = &sc->pool_argmax;
    }
    for (int c = 0; c < channels; ++c) {
      double best = fused(0, c);
      int best_i = 0;
      for (int i = 1; i < fused.rows(); ++i) {
        if (fused(i, c) > best) {
          best = fused(i, c);
          best_i = i;
        }
      }
      pooled(s, c) = best;
      if (arg) (*arg)[c] = best_i;
    }

    if (sc) {
      sc->feat_local = std::move(feat_local);
      sc->feat_global = std::move(feat_global);
      sc->fused = std::move(fused);
    }
  }

  Eigen::MatrixXd logits = run_stack(model.classifier, mut.classifier, pooled, mode,
                                     cache ? &cache->classifier : nullptr);
  if (cache) {
    cache->pooled = std::move(pooled);
    cache->logits = logits;
  }
  return logits;
}

}  // namespace

Model make_model(const ModelConfig& config) {
  Rng rng(config.seed);
  Model model;
  model.config = config;
  const int channels = config.feature_width();
  const bool bn = config.batch_norm;

  if (config.uses_local()) {
    model.local_mlp = make_branch_stack(rng, 8, config.branch_dims, bn);
  }
  if (config.uses_global()) {
    model.global_mlp = make_branch_stack(rng, 6, config.branch_dims, bn);
  }
  if (config.branches == BranchMode::Both) {
    if (config.fusion == FusionKind::Attention) {
      model.fusion_head.push_back(
          make_layer(rng, 2 * channels, channels, Activation::LeakyRelu, bn));
      model.fusion_head.push_back(make_layer(rng, channels, 2, Activation::Identity, false));
    } else if (config.fusion == FusionKind::CatConv) {
      model.cat_conv.push_back(
          make_layer(rng, 2 * channels, channels, Activation::LeakyRelu, bn));
    }
  }

  int width = channels;
  for (int out : config.classifier_dims) {
    model.classifier.push_back(make_layer(rng, width, out, Activation::LeakyRelu, bn));
    width = out;
  }
  model.classifier.push_back(
      make_layer(rng, width, config.n_classes, Activation::Identity, false));
  return model;
}

PointCloud prepare_cloud(const PointCloud& cloud, const ModelConfig& config) {
  PointCloud prepared = center_and_normalize(cloud);
  if (!prepared.has_normals()) prepared = estimate_normals(prepared, config.normal_k);
  return prepared;
}

FeatureSample extract_features(const PointCloud& prepared, const ModelConfig& config,
                               std::uint64_t sampling_seed) {
  FeatureSample fs;
  if (config.uses_local()) {
    fs.local = local_representation_rows(prepared, config.k);
  }
  if (config.uses_global()) {
    ProjectedCloud projected;
    if (config.global_input == GlobalInput::Canonical) {
      const GlobalFrame frame =
          config.sampling == SkeletonSampling::Fps
              ? canonical_frame(prepared, config.m)
              : canonical_frame_from_indices(
                    prepared, random_skeleton(prepared.size(), config.m, sampling_seed));
      projected = project(prepared, frame);
    } else {
      projected.points = prepared.points;
    }
    fs.global = edge_features(projected, config.k);
  }
  return fs;
}

Eigen::MatrixXd forward_batch(const Model& model, const Batch& batch, Mode mode,
                              BatchCache* cache) {
  return forward_impl(model, batch, mode, cache, {});
}

Eigen::MatrixXd forward_batch_train(Model& model, const Batch& batch, BatchCache& cache) {
  MutableStacks mut{&model.local_mlp, &model.global_mlp, &model.fusion_head,
                    &model.cat_conv, &model.classifier};
  return forward_impl(model, batch, Mode::Training, &cache, mut);
}

Eigen::VectorXd infer_sample(const Model& model, const FeatureSample& sample) {
  const Batch batch{&sample};
  return forward_batch(model, batch, Mode::Inference).row(0).transpose();
}

Eigen::VectorXd classify_forward(const Model& model, const PointCloud& cloud) {
  const PointCloud prepared = prepare_cloud(cloud, model.config);
  const FeatureSample sample = extract_features(prepared, model.config);
  return infer_sample(model, sample);
}

Eigen::VectorXd global_max_pool(const Eigen::MatrixXd& features) {
  Eigen::VectorXd out(features.cols());
  for (int c = 0; c < features.cols(); ++c) {
    double best = features(0, c);
    for (int i = 1; i < features.rows(); ++i) best = std::max(best, features(i, c));
    out[c] = best;
  }
  return out;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> attention_fuse(
    const Eigen::MatrixXd& feat_global, const Eigen::MatrixXd& feat_local,
    const DenseStack& head, Mode mode) {
  if (feat_global.rows() != feat_local.rows() || feat_global.cols() != feat_local.cols()) {
    throw ShapeMismatch("fusion inputs must have identical shapes");
  }
  Eigen::MatrixXd z(feat_global.rows(), feat_global.cols() + feat_local.cols());
  z << feat_global, feat_local;
  const Eigen::MatrixXd weights = softmax_rows(stack_apply(head, std::move(z), mode));
  Eigen::MatrixXd fused = (feat_global.array().colwise() * weights.col(0).array()) +
                          (feat_local.array().colwise() * weights.col(1).array());
  return {std::move(fused), weights};
}

Eigen::MatrixXd branch_forward(const DenseStack& mlp, const FeatureRows& rows, Mode mode) {
  const Eigen::MatrixXd mapped = stack_apply(mlp, rows.rows, mode);
  return pool_over_neighbors(mapped, rows.n, rows.k, nullptr);
}

double cross_entropy_loss(const Eigen::VectorXd& logits, int label) {
  if (label < 0 || label >= logits.size()) {
    throw BadLabel("label " + std::to_string(label) + " outside [0, " +
                   std::to_string(logits.size()) + ")");
  }
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return lse - logits[label];
}

double mean_loss(const Eigen::MatrixXd& logits, const std::vector<int>& labels) {
  double sum = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    sum += cross_entropy_loss(logits.row(r).transpose(), labels[r]);
  }
  return sum / static_cast<double>(logits.rows());
}

int predicted_class(const Eigen::VectorXd& logits) {
  int best = 0;
  for (int i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = i;
  }
  return best;
}

ModelGrads zero_grads(const Model& model) {
  ModelGrads g;
  auto fill = [](const DenseStack& stack, std::vector<DenseGrads>& out) {
    out.reserve(stack.size());
    for (const DenseLayer& layer : stack) out.push_back(lgr::zero_grads(layer));
  };
  fill(model.local_mlp, g.local);
  fill(model.global_mlp, g.global);
  fill(model.fusion_head, g.fusion);
  fill(model.cat_conv, g.cat_conv);
  fill(model.classifier, g.classifier);
  return g;
}

ModelGrads backward_from_cache(const Model& model, const Batch& batch,
                               const BatchCache& cache) {
  const ModelConfig& cfg = model.config;
  const int b = static_cast<int>(batch.size());
  const int channels = cfg.feature_width();
  ModelGrads grads = zero_grads(model);

  // d(mean loss)/d(logits) = (softmax - onehot) / B.
  Eigen::MatrixXd d_logits = softmax_rows(cache.logits);
  for (int s = 0; s < b; ++s) d_logits(s, batch[s]->label) -= 1.0;
  d_logits /= static_cast<double>(b);

  const Eigen::MatrixXd d_pooled =
      stack_backward(model.classifier, cache.classifier, std::move(d_logits),
                     grads.classifier);

  for (int s = 0; s < b; ++s) {
    const FeatureSample& fs = *batch[s];
    const SampleCache& sc = cache.samples[s];
    const int n = static_cast<int>(sc.fused.rows());

    // Undo the global max pool: route each channel to its winning point.
    Eigen::MatrixXd d_fused = Eigen::MatrixXd::Zero(n, channels);
    for (int c = 0; c < channels; ++c) d_fused(sc.pool_argmax[c], c) += d_pooled(s, c);

    Eigen::MatrixXd d_local, d_global;
    if (cfg.branches == BranchMode::GlobalOnly) {
      d_global = std::move(d_fused);
    } else if (cfg.branches == BranchMode::LocalOnly) {
      d_local = std::move(d_fused);
    } else {
      switch (cfg.fusion) {
        case FusionKind::AvgPool:
          d_global = 0.5 * d_fused;
          d_local = 0.5 * d_fused;
          break;
        case FusionKind::CatConv: {
          const Eigen::MatrixXd d_z =
              stack_backward(model.cat_conv, sc.fusion_stack, std::move(d_fused),
                             grads.cat_conv);
          d_global = d_z.leftCols(channels);
          d_local = d_z.rightCols(channels);
          break;
        }
        case FusionKind::Attention: {
          const Eigen::VectorXd w_g = sc.fusion_weights.col(0);
          const Eigen::VectorXd w_l = sc.fusion_weights.col(1);
          const Eigen::VectorXd d_wg =
              (d_fused.array() * sc.feat_global.array()).rowwise().sum();
          const Eigen::VectorXd d_wl =
              (d_fused.array() * sc.feat_local.array()).rowwise().sum();
          d_global = d_fused.array().colwise() * w_g.array();
          d_local = d_fused.array().colwise() * w_l.array();

          // Softmax over the two per-point logits.
          const Eigen::VectorXd dot =
              w_g.array() * d_wg.array() + w_l.array() * d_wl.array();
          Eigen::MatrixXd d_head(n, 2);
          d_head.col(0) = w_g.array() * (d_wg - dot).array();
          d_head.col(1) = w_l.array() * (d_wl - dot).array();
          const Eigen::MatrixXd d_z =
              stack_backward(model.fusion_head, sc.fusion_stack, std::move(d_head),
                             grads.fusion);
          d_global += d_z.leftCols(channels);
          d_local += d_z.rightCols(channels);
          break;
        }
      }
    }

    auto branch_backward = [&](const DenseStack& mlp, const BranchCache& bc,
                               const FeatureRows& rows, const Eigen::MatrixXd& d_feat,
                               std::vector<DenseGrads>& out) {
      Eigen::MatrixXd d_rows =
          Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.n) * rows.k, channels);
      for (int i = 0; i < rows.n; ++i) {
        for (int c = 0; c < channels; ++c) {
          d_rows(static_cast<Eigen::Index>(i) * rows.k + bc.argmax(i, c), c) +=
              d_feat(i, c);
        }
      }
      stack_backward(mlp, bc.stack, std::move(d_rows), out);
    };

    if (cfg.uses_local()) branch_backward(model.local_mlp, sc.local, fs.local, d_local, grads.local);
    if (cfg.uses_global()) branch_backward(model.global_mlp, sc.global, fs.global, d_global, grads.global);
  }
  return grads;
}

ModelGrads backward(const Model& model, const Batch& batch) {
  BatchCache cache;
  forward_batch(model, batch, Mode::Training, &cache);
  return backward_from_cache(model, batch, cache);
}

void sgd_step(Model& model, const ModelGrads& grads, double lr) {
  auto apply = [lr](DenseStack& stack, const std::vector<DenseGrads>& gs) {
    for (size_t i = 0; i < stack.size(); ++i) {
      stack[i].weight -= lr * gs[i].d_weight;
      stack[i].bias -= lr * gs[i].d_bias;
      if (stack[i].bn) {
        stack[i].bn->gamma -= lr * gs[i].d_gamma;
        stack[i].bn->beta -= lr * gs[i].d_beta;
      }
    }
  };
  apply(model.local_mlp, grads.local);
  apply(model.global_mlp, grads.global);
  apply(model.fusion_head, grads.fusion);
  apply(model.cat_conv, grads.cat_conv);
  apply(model.classifier, grads.classifier);
}

std::vector<double*> parameter_pointers(Model& model) {
  std::vector<double*> out;
  auto visit = [&out](DenseStack& stack) {
    for (DenseLayer& layer : stack) {
      for (Eigen::Index i = 0; i < layer.weight.size(); ++i) out.push_back(layer.weight.data() + i);
      for (Eigen::Index i = 0; i < layer.bias.size(); ++i) out.push_back(layer.bias.data() + i);
      if (layer.bn) {
        for (Eigen::Index i = 0; i < layer.bn->gamma.size(); ++i) out.push_back(layer.bn->gamma.data() + i);
        for (Eigen::Index i = 0; i < layer.bn->beta.size(); ++i) out.push_back(layer.bn->beta.data() + i);
      }
    }
  };
  visit(model.local_mlp);
  visit(model.global_mlp);
  visit(model.fusion_head);
  visit(model.cat_conv);
  visit(model.classifier);
  return out;
}

int parameter_count(const Model& model) {
  int count = 0;
  auto visit = [&count](const DenseStack& stack) {
    for (const DenseLayer& layer : stack) {
      count += static_cast<int>(layer.weight.size() + layer.bias.size());
      if (layer.bn) count += static_cast<int>(layer.bn->gamma.size() + layer.bn->beta.size());
    }
  };
  visit(model.local_mlp);
  visit(model.global_mlp);
  visit(model.fusion_head);
  visit(model.cat_conv);
  visit(model.classifier);
  return count;
}

Eigen::VectorXd flatten_grads(const Model& model, const ModelGrads& grads) {
  Eigen::VectorXd flat(parameter_count(model));
  Eigen::Index at = 0;
  auto visit = [&](const DenseStack& stack, const std::vector<DenseGrads>& gs) {
    for (size_t l = 0; l < stack.size(); ++l) {
      const DenseGrads& g = gs[l];
      flat.segment(at, g.d_weight.size()) =
          Eigen::Map<const Eigen::VectorXd>(g.d_weight.data(), g.d_weight.size());
      at += g.d_weight.size();
      flat.segment(at, g.d_bias.size()) = g.d_bias;
      at += g.d_bias.size();
      if (stack[l].bn) {
        flat.segment(at, g.d_gamma.size()) = g.d_gamma;
        at += g.d_gamma.size();
        flat.segment(at, g.d_beta.size()) = g.d_beta;
        at += g.d_beta.size();
      }
    }
  };
  visit(model.local_mlp, grads.local);
  visit(model.global_mlp, grads.global);
  visit(model.fusion_head, grads.fusion);
  visit(model.cat_conv, grads.cat_conv);
  visit(model.classifier, grads.classifier);
  return flat;
}

std::vector<int> routing_signature(const Model& model, const BatchCache& cache) {
  std::vector<int> sig;
  auto add_stack = [&sig](const DenseStack& stack, const StackCache& sc) {
    for (size_t l = 0; l < stack.size(); ++l) {
      if (stack[l].activation != Activation::LeakyRelu) continue;
      const DenseCache& c = sc.layers[l];
      for (Eigen::Index i = 0; i < c.pre_act.size(); ++i) {
        sig.push_back(c.pre_act.data()[i] > 0.0 ? 1 : 0);
      }
    }
  };
  const ModelConfig& cfg = model.config;
  for (const SampleCache& sc : cache.samples) {
    add_stack(model.local_mlp, sc.local.stack);
    add_stack(model.global_mlp, sc.global.stack);
    if (cfg.branches == BranchMode::Both && cfg.fusion == FusionKind::Attention) {
      add_stack(model.fusion_head, sc.fusion_stack);
    } else if (cfg.branches == BranchMode::Both && cfg.fusion == FusionKind::CatConv) {
      add_stack(model.cat_conv, sc.fusion_stack);
    }
    for (Eigen::Index i = 0; i < sc.local.argmax.size(); ++i) sig.push_back(sc.local.argmax.data()[i]);
    for (Eigen::Index i = 0; i < sc.global.argmax.size(); ++i) sig.push_back(sc.global.argmax.data()[i]);
    for (Eigen::Index i = 0; i < sc.pool_argmax.size(); ++i) sig.push_back(sc.pool_argmax[i]);
  }
  add_stack(model.classifier, cache.classifier);
  return sig;
}

}  // namespace lgr
