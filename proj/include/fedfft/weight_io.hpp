#pragma once

#include <filesystem>
#include <string>

#include "fedfft/tensor.hpp"

namespace fedfft {

// Weight dumps are JSON documents:
//   {"version": 1, "layers": [{"shape": [2, 3], "data": [...row-major...]}, ...]}
// Unknown versions are rejected.
inline constexpr int kWeightDumpVersion = 1;

ModelWeights parse_weight_dump(const std::string& text);
std::string format_weight_dump(const ModelWeights& w);

ModelWeights read_weight_dump(const std::filesystem::path& path);
void write_weight_dump(const std::filesystem::path& path, const ModelWeights& w);

}  // namespace fedfft
