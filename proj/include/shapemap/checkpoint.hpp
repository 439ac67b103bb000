#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "shapemap/tensor.hpp"

namespace shapemap {

struct NamedTensor {
    std::string name;
    Tensor tensor;
};

// Flat binary container: a little-endian u64 header length, a JSON header
// listing {name, shape} per tensor plus a dtype tag, then the raw f64
// little-endian payloads in header order.
void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

}  // namespace shapemap
