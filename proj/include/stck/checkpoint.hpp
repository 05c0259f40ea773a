#pragma once

#include <string>
#include <utility>
#include <vector>

#include "stck/tensor.hpp"

namespace stck {

// Model checkpoint: binary, little-endian.
//   magic "STCK" | u32 version=1 | u32 tensor count
//   per tensor: u32 name length | UTF-8 name | u32 ndim | u32 dims[ndim] | f64 data
// The loader validates the magic and that the file length matches exactly.
using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void save_checkpoint(const std::string& path, const NamedTensors& tensors);
NamedTensors load_checkpoint(const std::string& path);

}  // namespace stck
