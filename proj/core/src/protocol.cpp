#include "lgr/protocol.hpp"

#include <chrono>
#include <json.hpp>

#include "lgr/errors.hpp"
#include "lgr/rng.hpp"

namespace lgr {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t object_seed(std::uint64_t base, int label, int index, bool test) {
  return Rng::derive(Rng::derive(base, test ? 0x74657374 : 0x747261696e),
                     static_cast<std::uint64_t>(label) * 1000003 + index);
}

RotationMode test_mode(Condition condition) {
  return condition == Condition::ZZ ? RotationMode::Z : RotationMode::SO3;
}

RotationMode train_mode(Condition condition) {
  return condition == Condition::SO3SO3 ? RotationMode::SO3 : RotationMode::Z;
}

bool inputs_rotation_invariant(const ModelConfig& config) {
  return !(config.uses_global() && config.global_input == GlobalInput::Raw);
}

std::uint64_t sampling_seed_for(std::uint64_t run_seed, int object_index) {
  // Random-skeleton models key the skeleton on the object, not the rotation,
  // so repeated evaluations of one object reuse one skeleton.
  return Rng::derive(Rng::derive(run_seed, 0x736b656c), object_index);
}

}  // namespace

std::string condition_name(Condition condition) {
  switch (condition) {
    case Condition::ZZ: return "z/z";
    case Condition::ZSO3: return "z/SO3";
    case Condition::SO3SO3: return "SO3/SO3";
  }
  return "z/z";
}

Condition condition_from_name(const std::string& name) {
  if (name == "z/z") return Condition::ZZ;
  if (name == "z/SO3") return Condition::ZSO3;
  if (name == "SO3/SO3") return Condition::SO3SO3;
  throw std::invalid_argument("unknown condition: " + name +
                              " (want z/z, z/SO3 or SO3/SO3)");
}

AblationSuite suite_from_name(const std::string& name) {
  if (name == "branches") return AblationSuite::Branches;
  if (name == "fusion") return AblationSuite::Fusion;
  if (name == "sampling") return AblationSuite::Sampling;
  throw std::invalid_argument("unknown suite: " + name +
                              " (want branches, fusion or sampling)");
}

Dataset build_dataset(const DatasetSpec& spec) {
  Dataset dataset;
  for (int label = 0; label < kShapeClassCount; ++label) {
    const ShapeKind kind = shape_from_label(label);
    for (int i = 0; i < spec.train_per_class; ++i) {
      ShapeSpec shape{kind, spec.n_points, spec.jitter,
                      object_seed(spec.seed, label, i, false)};
      dataset.train.push_back({make_shape(shape), label});
    }
    for (int i = 0; i < spec.test_per_class; ++i) {
      ShapeSpec shape{kind, spec.n_points, spec.jitter,
                      object_seed(spec.seed, label, i, true)};
      dataset.test.push_back({make_shape(shape), label});
    }
  }
  return dataset;
}

Model train_condition_model(const ModelConfig& config, const Dataset& dataset,
                            RotationMode mode, std::uint64_t seed,
                            TrainHistory* history) {
  ModelConfig cfg = config;
  cfg.seed = seed;
  Model model = make_model(cfg);

  TrainHistory h;
  if (inputs_rotation_invariant(cfg)) {
    // Training rotations cannot change these features (verified separately to
    // 1e-9), so extract once from the unrotated clouds.
    std::vector<FeatureSample> features;
    features.reserve(dataset.train.size());
    for (size_t i = 0; i < dataset.train.size(); ++i) {
      FeatureSample fs = extract_features(
          dataset.train[i].cloud, cfg,
          sampling_seed_for(seed, static_cast<int>(i)));
      fs.label = dataset.train[i].label;
      features.push_back(std::move(fs));
    }
    h = train(model, features);
  } else {
    // Raw coordinates see the rotations; redraw them every epoch.
    std::vector<FeatureSample> features;
    auto provider = [&](int epoch) -> const std::vector<FeatureSample>& {
      Rng rng(Rng::derive(Rng::derive(seed, 0x617567), epoch));
      features.clear();
      features.reserve(dataset.train.size());
      for (size_t i = 0; i < dataset.train.size(); ++i) {
        const PointCloud rotated =
            apply_rotation(dataset.train[i].cloud, random_rotation(rng, mode));
        FeatureSample fs = extract_features(
            rotated, cfg, sampling_seed_for(seed, static_cast<int>(i)));
        fs.label = dataset.train[i].label;
        features.push_back(std::move(fs));
      }
      return features;
    };
    h = train(model, provider);
  }
  if (history) *history = std::move(h);
  return model;
}

ProtocolReport evaluate_model(const Model& model, const Dataset& dataset,
                              Condition condition, std::uint64_t seed) {
  const auto start = Clock::now();
  const ModelConfig& cfg = model.config;
  const int n_classes = cfg.n_classes;
  const int n_test = static_cast<int>(dataset.test.size());

  // One fixed test rotation per object per seed.
  Rng rotation_rng(Rng::derive(seed, 0x6576616c));
  std::vector<RotationMatrix> rotations;
  rotations.reserve(n_test);
  for (int i = 0; i < n_test; ++i) {
    rotations.push_back(random_rotation(rotation_rng, test_mode(condition)));
  }

  ProtocolReport report;
  report.condition = condition_name(condition);
  report.seed = seed;
  report.per_class.assign(n_classes, 0.0);
  report.confusion.assign(n_classes, std::vector<int>(n_classes, 0));

  std::vector<int> class_counts(n_classes, 0);
  std::vector<Eigen::VectorXd> base_logits(n_test);
  int correct = 0;
  for (int i = 0; i < n_test; ++i) {
    const LabeledCloud& object = dataset.test[i];
    const PointCloud rotated = apply_rotation(object.cloud, rotations[i]);
    const FeatureSample fs =
        extract_features(rotated, cfg, sampling_seed_for(seed, i));
    base_logits[i] = infer_sample(model, fs);
    const int predicted = predicted_class(base_logits[i]);
    ++class_counts[object.label];
    ++report.confusion[object.label][predicted];
    if (predicted == object.label) {
      ++correct;
      report.per_class[object.label] += 1.0;
    }
  }
  report.accuracy = static_cast<double>(correct) / n_test;
  for (int c = 0; c < n_classes; ++c) {
    if (class_counts[c] > 0) report.per_class[c] /= class_counts[c];
  }

  // Spot-check of logit stability under extra rotations of the same objects.
  Rng probe_rng(Rng::derive(seed, 0x696e76));
  const int probe_objects = std::min(5, n_test);
  for (int i = 0; i < probe_objects; ++i) {
    for (int t = 0; t < 3; ++t) {
      const PointCloud rotated = apply_rotation(
          dataset.test[i].cloud, random_rotation(probe_rng, test_mode(condition)));
      const FeatureSample fs =
          extract_features(rotated, cfg, sampling_seed_for(seed, i));
      const Eigen::VectorXd logits = infer_sample(model, fs);
      // Compare against the object under its fixed test rotation.
      report.invariance_max_diff =
          std::max(report.invariance_max_diff,
                   (logits - base_logits[i]).cwiseAbs().maxCoeff());
    }
  }

  report.runtime_s = seconds_since(start);
  return report;
}

ProtocolReport run_protocol(const ModelConfig& config, const DatasetSpec& data_spec,
                            Condition condition, std::uint64_t seed) {
  const auto start = Clock::now();
  const Dataset dataset = build_dataset(data_spec);
  const Model model =
      train_condition_model(config, dataset, train_mode(condition), seed);
  ProtocolReport report = evaluate_model(model, dataset, condition, seed);
  report.runtime_s = seconds_since(start);
  return report;
}

std::vector<ProtocolReport> run_protocol_all(const ModelConfig& config,
                                             const DatasetSpec& data_spec,
                                             std::uint64_t seed) {
  const Dataset dataset = build_dataset(data_spec);

  std::vector<ProtocolReport> reports;
  const auto start_z = Clock::now();
  const Model model_z = train_condition_model(config, dataset, RotationMode::Z, seed);
  const double train_z_s = seconds_since(start_z);

  ProtocolReport zz = evaluate_model(model_z, dataset, Condition::ZZ, seed);
  zz.runtime_s += train_z_s;
  reports.push_back(std::move(zz));
  ProtocolReport zso3 = evaluate_model(model_z, dataset, Condition::ZSO3, seed);
  zso3.runtime_s += train_z_s;
  reports.push_back(std::move(zso3));

  const auto start_so3 = Clock::now();
  const Model model_so3 =
      train_condition_model(config, dataset, RotationMode::SO3, seed);
  const double train_so3_s = seconds_since(start_so3);
  ProtocolReport so3 = evaluate_model(model_so3, dataset, Condition::SO3SO3, seed);
  so3.runtime_s += train_so3_s;
  reports.push_back(std::move(so3));
  return reports;
}

std::vector<AblationCell> run_ablation(AblationSuite suite, const ModelConfig& base,
                                       const DatasetSpec& data_spec,
                                       std::uint64_t seed) {
  struct CellSpec {
    std::string name;
    ModelConfig config;
  };
  std::vector<CellSpec> cells;
  auto with = [&base](auto&& edit) {
    ModelConfig c = base;
    edit(c);
    return c;
  };

  switch (suite) {
    case AblationSuite::Branches:
      cells.push_back({"global_only", with([](ModelConfig& c) {
                         c.branches = BranchMode::GlobalOnly;
                       })});
      cells.push_back({"local_only", with([](ModelConfig& c) {
                         c.branches = BranchMode::LocalOnly;
                       })});
      cells.push_back({"both_avg_pool", with([](ModelConfig& c) {
                         c.fusion = FusionKind::AvgPool;
                       })});
      cells.push_back({"both_cat_conv", with([](ModelConfig& c) {
                         c.fusion = FusionKind::CatConv;
                       })});
      cells.push_back({"both_attention", with([](ModelConfig& c) {
                         c.fusion = FusionKind::Attention;
                       })});
      break;
    case AblationSuite::Fusion:
      cells.push_back({"avg_pool", with([](ModelConfig& c) {
                         c.fusion = FusionKind::AvgPool;
                       })});
      cells.push_back({"cat_conv", with([](ModelConfig& c) {
                         c.fusion = FusionKind::CatConv;
                       })});
      cells.push_back({"attention", with([](ModelConfig& c) {
                         c.fusion = FusionKind::Attention;
                       })});
      break;
    case AblationSuite::Sampling:
      for (const int m : {8, 16, 32}) {
        for (const SkeletonSampling s :
             {SkeletonSampling::Fps, SkeletonSampling::Random}) {
          const std::string name =
              "m" + std::to_string(m) +
              (s == SkeletonSampling::Fps ? "_fps" : "_random");
          cells.push_back({name, with([m, s](ModelConfig& c) {
                             c.m = m;
                             c.sampling = s;
                           })});
        }
      }
      break;
  }

  std::vector<AblationCell> out;
  out.reserve(cells.size());
  for (const CellSpec& cell : cells) {
    out.push_back({cell.name,
                   run_protocol(cell.config, data_spec, Condition::ZZ, seed)});
  }
  return out;
}

std::string report_json(const ProtocolReport& report) {
  nlohmann::ordered_json j;
  j["condition"] = report.condition;
  j["seed"] = report.seed;
  j["accuracy"] = report.accuracy;
  j["per_class"] = report.per_class;
  j["confusion"] = report.confusion;
  j["invariance_max_diff"] = report.invariance_max_diff;
  j["runtime_s"] = report.runtime_s;
  return j.dump(2) + "\n";
}

std::string ablation_json(const std::string& suite, const std::vector<AblationCell>& cells,
                          std::uint64_t seed, double runtime_s) {
  nlohmann::ordered_json j;
  j["suite"] = suite;
  j["seed"] = seed;
  j["cells"] = nlohmann::ordered_json::array();
  for (const AblationCell& cell : cells) {
    nlohmann::ordered_json c;
    c["name"] = cell.name;
    c["condition"] = cell.report.condition;
    c["accuracy"] = cell.report.accuracy;
    c["per_class"] = cell.report.per_class;
    c["invariance_max_diff"] = cell.report.invariance_max_diff;
    j["cells"].push_back(std::move(c));
  }
  j["runtime_s"] = runtime_s;
  return j.dump(2) + "\n";
}

}  // namespace lgr
