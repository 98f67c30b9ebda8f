#pragma once

// Private JSON adapters for the config structs; kept out of the installed
// headers so the public surface does not depend on the vendored json.

#include <json.hpp>

#include "lgr/model.hpp"

namespace lgr {

inline std::string to_string(FusionKind f) {
  switch (f) {
    case FusionKind::Attention: return "attention";
    case FusionKind::AvgPool: return "avg_pool";
    case FusionKind::CatConv: return "cat_conv";
  }
  return "attention";
}

inline std::string to_string(BranchMode b) {
  switch (b) {
    case BranchMode::Both: return "both";
    case BranchMode::GlobalOnly: return "global_only";
    case BranchMode::LocalOnly: return "local_only";
  }
  return "both";
}

inline std::string to_string(GlobalInput g) {
  return g == GlobalInput::Canonical ? "canonical" : "raw";
}

inline std::string to_string(SkeletonSampling s) {
  return s == SkeletonSampling::Fps ? "fps" : "random";
}

FusionKind fusion_from_string(const std::string& s);
BranchMode branches_from_string(const std::string& s);
GlobalInput global_input_from_string(const std::string& s);
SkeletonSampling sampling_from_string(const std::string& s);

nlohmann::ordered_json config_to_json(const ModelConfig& config);
ModelConfig config_from_json(const nlohmann::json& j);

}  // namespace lgr
