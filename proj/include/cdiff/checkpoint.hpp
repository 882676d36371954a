#pragma once

#include <filesystem>
#include <memory>
#include <vector>

#include "json.hpp"

#include "cdiff/models.hpp"

namespace cdiff {

// Binary layout (little endian): "CDIFFCKP", u32 version, u64 descriptor length,
// descriptor JSON, u64 metadata length, metadata JSON, u64 parameter count,
// float64 parameters, u64 FNV-1a checksum of all preceding bytes.
struct Checkpoint {
  nlohmann::json descriptor;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<double> params;
};

void save_checkpoint(const Model& model, const nlohmann::json& metadata, const std::filesystem::path& path);
Checkpoint read_checkpoint(const std::filesystem::path& path);

// Copies parameters into a model whose descriptor equals the checkpoint's.
void load_parameters(Model& model, const Checkpoint& ckpt);
std::unique_ptr<Model> model_from_checkpoint(const Checkpoint& ckpt);

}  // namespace cdiff
