#pragma once

#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "xnlu/autodiff.hpp"

namespace xnlu {

inline constexpr const char* kCheckpointFormat = "xnlu-checkpoint";
inline constexpr int kCheckpointVersion = 1;

nlohmann::json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const nlohmann::json& j);

/// Versioned container: {format, version, kind, ...}.
nlohmann::json make_checkpoint(const std::string& kind);
/// Throws DataError unless `j` is a container of the given kind and version.
void check_checkpoint(const nlohmann::json& j, const std::string& kind);

/// Writes every parameter under "tensors" keyed by name.
void store_parameters(nlohmann::json& checkpoint, std::span<Parameter* const> params);
/// Restores parameters by name; names and shapes must match exactly.
void restore_parameters(const nlohmann::json& checkpoint, std::span<Parameter* const> params);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace xnlu
