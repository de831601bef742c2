#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "biclink/trainer.hpp"

namespace biclink {

// Layout, all integers little-endian:
//   8 bytes   magic "BCLNKCKP"
//   u32       format version (kCheckpointVersion)
//   u64       byte length N of the JSON document
//   N bytes   JSON: {"config", "vocab", "l_ext", "l_int", "metadata",
//                    "tensors": [{"name", "shape": [rows, cols]}, ...]}
//   then each tensor of the manifest in order, row-major float32.
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(std::ostream& out, const LinkModel& model,
                      const std::string& metadata_json = "{}");
void write_checkpoint(const std::filesystem::path& path, const LinkModel& model,
                      const std::string& metadata_json = "{}");

LinkModel read_checkpoint(std::istream& in);
LinkModel read_checkpoint(const std::filesystem::path& path);

/// Rounds every parameter to float32, the precision a checkpoint stores.
void round_to_float(ModelParams& params);

std::string config_to_json(const EncoderConfig& cfg);
EncoderConfig config_from_json(const std::string& json_text);

}  // namespace biclink
