#include "wpfm/checkpoint.hpp"

#include <bit>
#include <cstring>

#include <json.hpp>

#include "wpfm/errors.hpp"
#include "wpfm/io_util.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint files assume a little-endian host");

namespace wpfm {

namespace {

constexpr char kMagic[8] = {'W', 'P', 'F', 'M', 'C', 'K', 'P', 'T'};
constexpr uint32_t kVersion = 1;

using json = nlohmann::json;

}  // namespace

void save_checkpoint(const std::string& path, const VelocityField& net,
                     const CheckpointMeta& meta) {
  const NetConfig& cfg = net.config();
  json header;
  header["arch"] = {{"d", cfg.d},
                    {"c_dim", cfg.c_dim},
                    {"t_embed_dim", cfg.t_embed_dim},
                    {"c_embed_dim", cfg.c_embed_dim},
                    {"hidden", cfg.hidden}};
  json blocks = json::array();
  for (const auto& b : net.block_shapes()) {
    blocks.push_back({{"name", b.name},
                      {"rows", b.rows},
                      {"cols", b.cols},
                      {"size", b.size}});
  }
  header["blocks"] = blocks;
  header["param_count"] = net.param_count();
  header["step_count"] = meta.step_count;
  header["config_hash"] = meta.config_hash;
  header["shift_s"] = meta.shift_s;
  header["shift_targets"] = meta.shift_targets;
  header["warp"] = meta.warp;

  std::string hdr = header.dump();
  std::string buf;
  Vec params = net.params_flat();
  buf.reserve(16 + hdr.size() + params.size() * 8);
  buf.append(kMagic, 8);
  uint32_t version = kVersion;
  uint32_t hlen = static_cast<uint32_t>(hdr.size());
  char b4[4];
  std::memcpy(b4, &version, 4);
  buf.append(b4, 4);
  std::memcpy(b4, &hlen, 4);
  buf.append(b4, 4);
  buf += hdr;
  for (double v : params) {
    char b8[8];
    std::memcpy(b8, &v, 8);
    buf.append(b8, 8);
  }
  write_file_atomic(path, buf);
}

LoadedCheckpoint read_checkpoint(const std::string& path) {
  std::string buf = read_file(path);
  if (buf.size() < 16 || std::memcmp(buf.data(), kMagic, 8) != 0) {
    throw FormatError(path + ": not a checkpoint file");
  }
  uint32_t version = 0, hlen = 0;
  std::memcpy(&version, buf.data() + 8, 4);
  std::memcpy(&hlen, buf.data() + 12, 4);
  if (version != kVersion) {
    throw FormatError(path + ": unsupported checkpoint version " +
                      std::to_string(version));
  }
  if (buf.size() < 16 + static_cast<size_t>(hlen)) {
    throw FormatError(path + ": truncated header");
  }

  json header;
  try {
    header = json::parse(buf.substr(16, hlen));
  } catch (const json::exception& e) {
    throw FormatError(path + ": bad header JSON: " + e.what());
  }

  LoadedCheckpoint out;
  try {
    const json& arch = header.at("arch");
    out.config.d = arch.at("d").get<int>();
    out.config.c_dim = arch.at("c_dim").get<int>();
    out.config.t_embed_dim = arch.at("t_embed_dim").get<int>();
    out.config.c_embed_dim = arch.at("c_embed_dim").get<int>();
    out.config.hidden = arch.at("hidden").get<std::vector<int>>();
    out.meta.step_count = header.at("step_count").get<uint64_t>();
    out.meta.config_hash = header.at("config_hash").get<std::string>();
    out.meta.shift_s = header.at("shift_s").get<double>();
    out.meta.shift_targets = header.at("shift_targets").get<bool>();
    out.meta.warp = header.at("warp").get<std::string>();
    for (const json& b : header.at("blocks")) {
      VelocityField::BlockShape shape;
      shape.name = b.at("name").get<std::string>();
      shape.rows = b.at("rows").get<int>();
      shape.cols = b.at("cols").get<int>();
      shape.size = b.at("size").get<size_t>();
      out.blocks.push_back(std::move(shape));
    }
  } catch (const json::exception& e) {
    throw FormatError(path + ": missing header field: " + e.what());
  }

  size_t param_count = header.at("param_count").get<size_t>();
  size_t expect = 16 + static_cast<size_t>(hlen) + param_count * 8;
  if (buf.size() != expect) {
    throw FormatError(path + ": size " + std::to_string(buf.size()) +
                      " does not match header (" + std::to_string(expect) +
                      ")");
  }
  out.params.resize(param_count);
  std::memcpy(out.params.data(), buf.data() + 16 + hlen, param_count * 8);
  return out;
}

VelocityField load_checkpoint(const std::string& path, CheckpointMeta* meta) {
  LoadedCheckpoint lc = read_checkpoint(path);
  VelocityField net(lc.config, 0);
  if (net.param_count() != lc.params.size()) {
    throw FormatError(path + ": parameter count " +
                      std::to_string(lc.params.size()) +
                      " does not match architecture (" +
                      std::to_string(net.param_count()) + ")");
  }
  auto shapes = net.block_shapes();
  if (shapes.size() != lc.blocks.size()) {
    throw FormatError(path + ": block list does not match architecture");
  }
  for (size_t i = 0; i < shapes.size(); ++i) {
    if (shapes[i].name != lc.blocks[i].name ||
        shapes[i].rows != lc.blocks[i].rows ||
        shapes[i].cols != lc.blocks[i].cols ||
        shapes[i].size != lc.blocks[i].size) {
      throw FormatError(path + ": block '" + lc.blocks[i].name +
                        "' does not match architecture");
    }
  }
  net.set_params_flat(lc.params);
  if (meta) *meta = lc.meta;
  return net;
}

}  // namespace wpfm
