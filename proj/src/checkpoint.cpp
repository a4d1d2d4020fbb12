#include "eosp/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

namespace eosp::nn {

namespace {

constexpr char kMagic[8] = {'E', 'O', 'S', 'P', 'C', 'K', 'P', 'T'};

void append_le(std::string& out, std::uint64_t value, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
}

std::uint64_t read_le(const std::string& in, std::size_t at, int bytes) {
  std::uint64_t value = 0;
  for (int i = 0; i < bytes; ++i) {
    value |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  }
  return value;
}

nlohmann::json config_json(const NetworkConfig& c) {
  return {{"H", c.hidden_dim},
          {"L", c.n_layers},
          {"K", c.n_heads},
          {"leaky_slope", c.leaky_slope},
          {"feature_dim", c.feature_dim}};
}

NetworkConfig config_of(const nlohmann::json& j) {
  NetworkConfig c;
  try {
    c.hidden_dim = j.at("H").get<int>();
    c.n_layers = j.at("L").get<int>();
    c.n_heads = j.at("K").get<int>();
    c.leaky_slope = j.value("leaky_slope", c.leaky_slope);
    c.feature_dim = j.value("feature_dim", c.feature_dim);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError("config", ex.what());
  }
  c.validate();
  return c;
}

}  // namespace

std::string config_to_json(const NetworkConfig& config) { return config_json(config).dump(); }

NetworkConfig config_from_json(const std::string& text) {
  try {
    return config_of(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError("config", ex.what());
  }
}

std::string serialize_checkpoint(const ParameterSet<float>& params) {
  nlohmann::json header;
  header["version"] = "1";
  header["config"] = config_json(params.config);
  auto manifest = nlohmann::json::array();
  std::size_t offset = 0;
  params.visit([&](const std::string& name, const Matrix<float>& m) {
    manifest.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}, {"offset", offset}});
    offset += static_cast<std::size_t>(m.size());
  });
  header["parameters"] = std::move(manifest);
  const std::string text = header.dump();

  std::string out(kMagic, sizeof(kMagic));
  append_le(out, text.size(), 8);
  out += text;
  out.reserve(out.size() + 4 * offset);
  for (float v : params.flatten()) append_le(out, std::bit_cast<std::uint32_t>(v), 4);
  return out;
}

ParameterSet<float> parse_checkpoint(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ParseError("magic", "not a checkpoint file");
  }
  const std::uint64_t header_size = read_le(bytes, 8, 8);
  if (16 + header_size > bytes.size()) throw ParseError("header", "truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(16, header_size));
  } catch (const nlohmann::json::parse_error& ex) {
    throw ParseError("header", ex.what());
  }
  if (header.value("version", std::string()) != "1") throw ParseError("version", "unsupported version");
  auto params = ParameterSet<float>::zeros(config_of(header.at("config")));

  const std::size_t payload = 16 + header_size;
  const auto& manifest = header.at("parameters");
  std::size_t index = 0;
  params.visit([&](const std::string& name, Matrix<float>& m) {
    if (index >= manifest.size()) throw ParseError("parameters", "missing entry for '" + name + "'");
    const auto& entry = manifest[index++];
    if (entry.at("name").get<std::string>() != name) {
      throw ParseError("parameters", "expected '" + name + "', found '" + entry.at("name").get<std::string>() + "'");
    }
    const auto shape = entry.at("shape").get<std::vector<long>>();
    if (shape.size() != 2 || shape[0] != m.rows() || shape[1] != m.cols()) {
      throw ParseError("parameters." + name, "shape does not match config");
    }
    const std::size_t offset = entry.at("offset").get<std::size_t>();
    const std::size_t end = payload + 4 * (offset + static_cast<std::size_t>(m.size()));
    if (end > bytes.size()) throw ParseError("parameters." + name, "payload truncated");
    std::size_t at = payload + 4 * offset;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r, at += 4) {
        m(r, c) = std::bit_cast<float>(static_cast<std::uint32_t>(read_le(bytes, at, 4)));
      }
    }
  });
  if (index != manifest.size()) throw ParseError("parameters", "unexpected extra entries");
  return params;
}

void save_checkpoint(const ParameterSet<float>& params, const std::filesystem::path& path) {
  write_text_file(path, serialize_checkpoint(params));
}

ParameterSet<float> load_checkpoint(const std::filesystem::path& path) {
  return parse_checkpoint(read_text_file(path));
}

}  // namespace eosp::nn
