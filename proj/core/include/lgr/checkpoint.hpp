#pragma once

#include <string>

#include "lgr/model.hpp"

namespace lgr {

/// Versioned binary container: config as JSON, then every parameter tensor
/// (including batch-norm running statistics) as raw little-endian doubles.
/// save(load(save(x))) is byte-identical. Throws IoError.
void save_model(const std::string& path, const Model& model);
Model load_model(const std::string& path);

}  // namespace lgr
