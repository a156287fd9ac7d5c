#pragma once

#include <filesystem>
#include <span>

#include <json.hpp>

#include "temprel/tensor.hpp"

namespace temprel::nn {

inline constexpr int kCheckpointFormatVersion = 1;

/// [{"name", "shape", "values"}...]; values are shortest round-trip decimals,
/// so a save/load cycle is bit-exact.
nlohmann::json parameters_to_json(std::span<const Parameter* const> params);

/// Restores values by name; every parameter must be present with its shape.
/// Throws DataError.
void parameters_from_json(const nlohmann::json& array, std::span<Parameter* const> params);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j, int indent = -1);
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace temprel::nn
