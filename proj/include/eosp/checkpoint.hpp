#pragma once

#include <filesystem>
#include <string>

#include "eosp/network.hpp"

namespace eosp::nn {

// Binary layout:
//   "EOSPCKPT"                    8 bytes
//   header length                 uint64, little-endian
//   header                        JSON {version:"1", config:{H,L,K,...},
//                                       parameters:[{name, shape:[r,c], offset}]}
//   payload                       float32 little-endian, column-major per array
//
// Offsets count floats from the start of the payload.
std::string serialize_checkpoint(const ParameterSet<float>& params);
ParameterSet<float> parse_checkpoint(const std::string& bytes);

void save_checkpoint(const ParameterSet<float>& params, const std::filesystem::path& path);
ParameterSet<float> load_checkpoint(const std::filesystem::path& path);

std::string config_to_json(const NetworkConfig& config);
NetworkConfig config_from_json(const std::string& text);

}  // namespace eosp::nn
