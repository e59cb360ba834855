#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "errmax/nn.hpp"

namespace errmax {

/// Binary model checkpoint (little-endian):
///
///   magic        8 bytes  "ERRMAXCK"
///   version      u32      1
///   n_dims       u32
///   layer_dims   n_dims x i32
///   rng_seed     u64
///   hidden_act   u32      0 = relu
///   output_act   u32      1 = identity
///   meta_len     u64
///   meta         meta_len bytes of UTF-8 JSON (config, seeds, provenance)
///   per layer k: weights dims[k]*dims[k+1] x f64, column-major
///                biases  dims[k+1] x f64
///
/// Parameters are stored as raw IEEE-754 doubles, so save/load is bit-exact.
struct Checkpoint {
    MlpModel model;
    nlohmann::json metadata = nlohmann::json::object();
};

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace errmax
