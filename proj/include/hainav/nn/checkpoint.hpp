#pragma once

#include <string>

#include "hainav/nn/module.hpp"

namespace hainav::nn {

// Binary checkpoint: magic, version, model kind, JSON metadata string, then an
// explicit name -> tensor map (dims + float64 data).
void save_checkpoint(const std::string& path, const std::string& model_kind,
                     const ParamStore& params, const std::string& meta_json = "{}");

struct CheckpointInfo {
  std::string model_kind;
  std::string meta_json;
};

// Loads into an existing store; every stored tensor must match by name and size.
CheckpointInfo load_checkpoint(const std::string& path, ParamStore& params);

// Reads header only.
CheckpointInfo peek_checkpoint(const std::string& path);

}  // namespace hainav::nn
