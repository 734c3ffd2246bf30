// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vidcap/tensor.hpp"

namespace vidcap {

// Flat binary checkpoint: for each tensor, a 32-bit LE name length, the UTF-8
// name, 32-bit LE rank, 32-bit LE dims, then the values as little-endian
// 64-bit floats. Tensors are written in the given order and read to EOF.
void save_tensors(const std::string& path,
                  const std::vector<std::pair<std::string, const ad::Tensor*>>& tensors);

std::map<std::string, ad::Tensor> load_tensors(const std::string& path);

}  // namespace vidcap
