#pragma once

// Versioned model checkpoint: an 8-byte magic, a format version, the config
// as a JSON document, then every parameter buffer in canonical order as raw
// little-endian float64.  load(save(m)) reproduces m bit-exactly.

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "aliasbench/errors.hpp"
#include "aliasbench/json_io.hpp"
#include "aliasbench/nn.hpp"

namespace aliasbench::nn {

static_assert(std::endian::native == std::endian::little, "checkpoints assume a little-endian host");

inline constexpr char kCheckpointMagic[8] = {'T', 'C', 'N', 'C', 'K', 'P', 'T', '1'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

inline void save_checkpoint(const TcnModel& model, const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(Errc::io_error, "save_checkpoint: cannot open " + path);
  f.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  auto write_u32 = [&f](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  write_u32(kCheckpointVersion);
  const std::string config = jsonio::tcn_config_to_json(model.config).dump();
  write_u32(static_cast<std::uint32_t>(config.size()));
  f.write(config.data(), static_cast<std::streamsize>(config.size()));
  model.params.for_each_buffer([&](const std::vector<double>& buf) {
    const std::uint64_t count = buf.size();
    f.write(reinterpret_cast<const char*>(&count), 8);
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 8));
  });
  if (!f) raise(Errc::io_error, "save_checkpoint: write failed for " + path);
}

inline TcnModel load_checkpoint(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(Errc::io_error, "load_checkpoint: cannot open " + path);
  char magic[8];
  f.read(magic, 8);
  if (!f || std::memcmp(magic, kCheckpointMagic, 8) != 0)
    raise(Errc::parse_error, "load_checkpoint: bad magic in " + path);
  auto read_u32 = [&f, &path]() {
    std::uint32_t v = 0;
    f.read(reinterpret_cast<char*>(&v), 4);
    if (!f) raise(Errc::parse_error, "load_checkpoint: truncated file " + path);
    return v;
  };
  const std::uint32_t version = read_u32();
  if (version != kCheckpointVersion)
    raise(Errc::parse_error, "load_checkpoint: unsupported version " + std::to_string(version));
  const std::uint32_t config_len = read_u32();
  std::string config_str(config_len, '\0');
  f.read(config_str.data(), config_len);
  if (!f) raise(Errc::parse_error, "load_checkpoint: truncated config in " + path);

  nlohmann::json config_json;
  try {
    config_json = nlohmann::json::parse(config_str);
  } catch (const nlohmann::json::exception& e) {
    raise(Errc::parse_error, std::string("load_checkpoint: bad config json: ") + e.what());
  }
  TcnModel model;
  model.config = jsonio::tcn_config_from_json(config_json);
  model.params = make_param_set(model.config);
  model.params.for_each_buffer([&](std::vector<double>& buf) {
    std::uint64_t count = 0;
    f.read(reinterpret_cast<char*>(&count), 8);
    if (!f || count != buf.size())
      raise(Errc::parse_error, "load_checkpoint: buffer shape mismatch in " + path);
    f.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(count * 8));
    if (!f) raise(Errc::parse_error, "load_checkpoint: truncated buffer in " + path);
  });
  f.peek();
  if (!f.eof()) raise(Errc::parse_error, "load_checkpoint: trailing bytes in " + path);
  return model;
}

}  // namespace aliasbench::nn
