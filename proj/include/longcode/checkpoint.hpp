#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "longcode/tensor.hpp"

namespace longcode {

// On-disk tensor set: a plain-text manifest with one `name shape offset`
// line per tensor (shape as `AxBxC`, offset in bytes) and a flat blob of
// little-endian f32 values in manifest order.
struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<float> values;
};

void save_tensors(const std::filesystem::path& manifest, const std::filesystem::path& blob,
                  const ParameterList<float>& tensors);

std::vector<StoredTensor> load_tensors(const std::filesystem::path& manifest,
                                       const std::filesystem::path& blob);

// Copies stored values into `targets` by name. Every target must be present
// with an identical shape; extra stored tensors are an error too.
void load_into(const std::filesystem::path& manifest, const std::filesystem::path& blob,
               const ParameterList<float>& targets);

}  // namespace longcode
