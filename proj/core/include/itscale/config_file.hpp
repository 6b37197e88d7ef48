#pragma once

#include <filesystem>
#include <string_view>

#include "itscale/model.hpp"

namespace itscale {

/// Applies one `key = value` setting. Recognised keys: d, n, S, sigma, gamma,
/// tau, teacher_mode. Throws std::invalid_argument on unknown keys or
/// unparsable values.
void apply_model_setting(ModelConfig& config, std::string_view key, std::string_view value);

/// Reads a key-value file: one `key = value` per line, `#` starts a comment,
/// blank lines ignored. Settings override the fields of `base`.
ModelConfig load_model_config(const std::filesystem::path& path, ModelConfig base = {});

}  // namespace itscale
