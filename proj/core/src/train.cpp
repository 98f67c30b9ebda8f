#include <algorithm>
#include <numeric>

#include "lgr/model.hpp"
#include "lgr/rng.hpp"

namespace lgr {

namespace {

std::vector<int> batch_labels(const Batch& batch) {
  std::vector<int> labels(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) labels[i] = batch[i]->label;
  return labels;
}

}  // namespace

TrainHistory train(Model& model, const DatasetProvider& provider) {
  const ModelConfig& cfg = model.config;
  Rng shuffle_rng(Rng::derive(cfg.seed, 0x7261696e));  // shuffle stream

  TrainHistory history;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<FeatureSample>& data = provider(epoch);
    const int n = static_cast<int>(data.size());

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (int i = n - 1; i > 0; --i) {
      std::swap(order[i], order[static_cast<int>(shuffle_rng.uniform_index(i + 1))]);
    }

    double loss_sum = 0.0;
    int correct = 0;
    for (int start = 0; start < n; start += cfg.batch) {
      const int size = std::min(cfg.batch, n - start);
      Batch batch(size);
      for (int i = 0; i < size; ++i) batch[i] = &data[order[start + i]];

      BatchCache cache;
      const Eigen::MatrixXd logits = forward_batch_train(model, batch, cache);
      const std::vector<int> labels = batch_labels(batch);
      loss_sum += mean_loss(logits, labels) * size;
      for (int i = 0; i < size; ++i) {
        if (predicted_class(logits.row(i).transpose()) == labels[i]) ++correct;
      }

      const ModelGrads grads = backward_from_cache(model, batch, cache);
      sgd_step(model, grads, cfg.lr);
    }
    history.epochs.push_back(
        {loss_sum / n, static_cast<double>(correct) / static_cast<double>(n)});
  }
  return history;
}

TrainHistory train(Model& model, const std::vector<FeatureSample>& dataset) {
  return train(model, [&dataset](int) -> const std::vector<FeatureSample>& {
    return dataset;
  });
}

GradCheckReport finite_diff_check(const Model& model_in, const Batch& batch, double eps,
                                  int n_probes, std::uint64_t seed) {
  Model model = model_in;
  const std::vector<int> labels = batch_labels(batch);

  const ModelGrads grads = backward(model, batch);
  const Eigen::VectorXd analytic = flatten_grads(model, grads);
  const std::vector<double*> params = parameter_pointers(model);
  const int total = static_cast<int>(params.size());

  auto loss_with_signature = [&](std::vector<int>& sig) {
    BatchCache cache;
    const Eigen::MatrixXd logits = forward_batch(model, batch, Mode::Training, &cache);
    sig = routing_signature(model, cache);
    return mean_loss(logits, labels);
  };

  Rng rng(Rng::derive(seed, 0x66646366));
  std::vector<int> order(total);
  std::iota(order.begin(), order.end(), 0);

  GradCheckReport report;
  const int target = std::min(n_probes, total);
  int pos = 0;
  std::vector<int> sig_plus, sig_minus;
  while (report.checked < target && pos < total) {
    std::swap(order[pos], order[pos + static_cast<int>(rng.uniform_index(total - pos))]);
    const int idx = order[pos++];

    const double saved = *params[idx];
    *params[idx] = saved + eps;
    const double loss_plus = loss_with_signature(sig_plus);
    *params[idx] = saved - eps;
    const double loss_minus = loss_with_signature(sig_minus);
    *params[idx] = saved;

    if (sig_plus != sig_minus) {
      ++report.skipped;  // probe straddles a relu kink or a pooling tie
      continue;
    }

    const double numeric = (loss_plus - loss_minus) / (2.0 * eps);
    const double a = analytic[idx];
    const double rel =
        std::abs(numeric - a) / std::max({1.0, std::abs(numeric), std::abs(a)});
    report.max_rel_error = std::max(report.max_rel_error, rel);
    ++report.checked;
  }
  return report;
}

}  // namespace lgr
