#pragma once

#include <memory>
#include <string>
#include <vector>

#include "topicfuse/fusion.hpp"
#include "topicfuse/tensor.hpp"

#include "json.hpp"

namespace topicfuse {

struct CheckpointEntry {
  std::string name;
  int rows = 0;
  int cols = 0;
};

// Binary layout, integers little-endian: the 8 magic bytes "TFCKPT01", u32
// parameter count, then per parameter u32 name length, name bytes, u32 rows,
// u32 cols; after the manifest, every value as raw IEEE-754 binary64 in
// manifest order. Saving the same parameters twice yields identical bytes.
void save_checkpoint(const std::string& path, const std::vector<Param*>& params);

std::vector<CheckpointEntry> read_manifest(const std::string& path);

// The file's manifest must match `params` name-for-name, shape-for-shape,
// in order.
void load_checkpoint(const std::string& path, const std::vector<Param*>& params);

nlohmann::json fusion_config_to_json(const FusionConfig& cfg);
FusionConfig fusion_config_from_json(const nlohmann::json& j);

// Sidecar: everything needed to rebuild the skeleton the numbers belong to.
// Variant 1 has no skeleton; a mini text channel embeds its vocabulary and
// shape; a precomputed channel records only its width, since the vector
// store lives outside the checkpoint.
nlohmann::json model_sidecar(const AssembledModel& assembled);

// Rebuilds the described model with freshly zeroed parameters. Sidecars for
// a precomputed text channel need the caller to supply that encoder.
AssembledModel model_from_sidecar(const nlohmann::json& sidecar,
                                  std::shared_ptr<TextEncoder> precomputed = nullptr);

void save_model(const std::string& checkpoint_path, const std::string& sidecar_path,
                const AssembledModel& assembled);
AssembledModel load_model(const std::string& checkpoint_path,
                          const std::string& sidecar_path,
                          std::shared_ptr<TextEncoder> precomputed = nullptr);

}  // namespace topicfuse
