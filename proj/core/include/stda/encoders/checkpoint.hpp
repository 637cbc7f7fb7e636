#pragma once

#include <filesystem>

#include "stda/core/kv.hpp"
#include "stda/nn/autograd.hpp"

namespace stda {

/// Single-file parameter archive:
///   "STDACKPT" | u32 version | u32 len | metadata (key = value text)
///   | u32 count | count x { u32 len | name | u32 rank | i32 dims[rank] | f64 data[] }
/// The metadata carries the model configuration used to build the parameters.
void save_checkpoint(const std::filesystem::path& path, const nn::ParameterSet& parameters,
                     const KeyValues& metadata);

/// Metadata only.
KeyValues read_checkpoint_metadata(const std::filesystem::path& path);

/// Loads values into `parameters`. Throws std::runtime_error if the stored
/// metadata disagrees with `expected_metadata` on any key present in the latter,
/// or if names or shapes do not match.
void load_checkpoint(const std::filesystem::path& path, const nn::ParameterSet& parameters,
                     const KeyValues& expected_metadata);

}  // namespace stda
