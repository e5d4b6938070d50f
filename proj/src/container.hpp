#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace toric {

// Flat binary tensor container. Layout, all little-endian:
//   magic "NQD1", u32 tensor count, then per tensor:
//   u16 name length, name (UTF-8), u8 rank, u32 extent per axis, f32 data.
// Metadata rides in reserved tensor names ("meta.*", "config.*", "code.*").
// Readers reject bad magic, truncation, and trailing bytes.

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

void write_tensor_file(const std::string& path, const NamedTensors& tensors);
NamedTensors read_tensor_file(const std::string& path);

const Tensor* find_tensor(const NamedTensors& ts, const std::string& name);
const Tensor& must_tensor(const NamedTensors& ts, const std::string& name);

}  // namespace toric
