#pragma once

// Minimal RIFF/WAVE reader and writer for the formats the workbench ingests:
// PCM16, PCM24 and IEEE float32, mono or stereo (stereo is collapsed to mono
// by averaging the channels).  Writing emits mono in any of the three
// formats; float32 is the default and round-trips float-representable
// samples bit-exactly.

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "aliasbench/errors.hpp"
#include "aliasbench/signal.hpp"

namespace aliasbench::dsp {

static_assert(std::endian::native == std::endian::little, "wav i/o assumes a little-endian host");

enum class WavFormat { pcm16, pcm24, float32 };

namespace wav_detail {

inline std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void append_u32(std::vector<std::uint8_t>& v, std::uint32_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 8) & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 16) & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 24) & 0xff));
}

inline void append_u16(std::vector<std::uint8_t>& v, std::uint16_t x) {
  v.push_back(static_cast<std::uint8_t>(x & 0xff));
  v.push_back(static_cast<std::uint8_t>((x >> 8) & 0xff));
}

inline void append_tag(std::vector<std::uint8_t>& v, const char* tag) {
  v.insert(v.end(), tag, tag + 4);
}

inline std::int32_t clamp_round(double x, double scale, std::int32_t lo, std::int32_t hi) {
  double v = std::nearbyint(x * scale);
  if (v < lo) return lo;
  if (v > hi) return hi;
  return static_cast<std::int32_t>(v);
}

}  // namespace wav_detail

inline Signal load_wav(const std::string& path) {
  using namespace wav_detail;
  std::ifstream f(path, std::ios::binary);
  if (!f) raise(Errc::io_error, "load_wav: cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    raise(Errc::wav_malformed, "load_wav: not a RIFF/WAVE file: " + path);

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* id = reinterpret_cast<const char*>(bytes.data() + pos);
    const std::uint32_t size = read_u32(bytes.data() + pos + 4);
    pos += 8;
    if (pos + size > bytes.size()) raise(Errc::wav_malformed, "load_wav: truncated chunk in " + path);
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (size < 16) raise(Errc::wav_malformed, "load_wav: fmt chunk too small in " + path);
      const std::uint8_t* p = bytes.data() + pos;
      format = read_u16(p);
      channels = read_u16(p + 2);
      rate = read_u32(p + 4);
      bits = read_u16(p + 14);
      if (format == 0xFFFE) {  // WAVE_FORMAT_EXTENSIBLE: real tag leads the GUID
        if (size < 40) raise(Errc::wav_malformed, "load_wav: extensible fmt chunk too small in " + path);
        format = read_u16(p + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      data = bytes.data() + pos;
      data_size = size;
    }
    pos += size + (size & 1);  // chunks are word-aligned
  }

  if (!have_fmt) raise(Errc::wav_malformed, "load_wav: missing fmt chunk in " + path);
  if (data == nullptr) raise(Errc::wav_malformed, "load_wav: missing data chunk in " + path);
  if (rate == 0) raise(Errc::wav_malformed, "load_wav: zero sample rate in " + path);
  if (channels != 1 && channels != 2)
    raise(Errc::wav_unsupported, "load_wav: unsupported channel count " + std::to_string(channels));

  const bool pcm16 = format == 1 && bits == 16;
  const bool pcm24 = format == 1 && bits == 24;
  const bool f32 = format == 3 && bits == 32;
  if (!pcm16 && !pcm24 && !f32)
    raise(Errc::wav_unsupported, "load_wav: unsupported codec (format " + std::to_string(format) +
                                     ", " + std::to_string(bits) + " bits)");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_size = bytes_per_sample * channels;
  const std::size_t frames = data_size / frame_size;
  if (frames == 0) raise(Errc::wav_empty_data, "load_wav: empty data chunk in " + path);

  auto decode = [&](const std::uint8_t* p) -> double {
    if (pcm16) {
      std::int16_t v;
      std::memcpy(&v, p, 2);
      return static_cast<double>(v) / 32768.0;
    }
    if (pcm24) {
      std::int32_t v = static_cast<std::int32_t>(p[0]) | (static_cast<std::int32_t>(p[1]) << 8) |
                       (static_cast<std::int32_t>(p[2]) << 16);
      if (v & 0x800000) v -= 0x1000000;  // sign extend
      return static_cast<double>(v) / 8388608.0;
    }
    float v;
    std::memcpy(&v, p, 4);
    return static_cast<double>(v);
  };

  Signal s;
  s.sample_rate = static_cast<int>(rate);
  s.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    const std::uint8_t* p = data + i * frame_size;
    double v = decode(p);
    if (channels == 2) v = 0.5 * (v + decode(p + bytes_per_sample));
    if (!std::isfinite(v)) raise(Errc::wav_malformed, "load_wav: non-finite sample in " + path);
    s.samples[i] = v;
  }
  return s;
}

inline void save_wav(const std::string& path, const Signal& s, WavFormat format = WavFormat::float32) {
  using namespace wav_detail;
  if (s.empty()) raise(Errc::invalid_argument, "save_wav: empty signal");
  if (s.sample_rate <= 0) raise(Errc::invalid_argument, "save_wav: sample rate must be positive");

  const bool is_float = format == WavFormat::float32;
  const std::uint16_t bits = format == WavFormat::pcm16 ? 16 : format == WavFormat::pcm24 ? 24 : 32;
  const std::uint32_t bytes_per_sample = bits / 8;
  const std::uint32_t rate = static_cast<std::uint32_t>(s.sample_rate);
  const std::uint32_t data_size = static_cast<std::uint32_t>(s.size() * bytes_per_sample);

  std::vector<std::uint8_t> out;
  out.reserve(64 + data_size);
  append_tag(out, "RIFF");
  append_u32(out, 0);  // patched below
  append_tag(out, "WAVE");
  append_tag(out, "fmt ");
  append_u32(out, is_float ? 18 : 16);
  append_u16(out, is_float ? 3 : 1);
  append_u16(out, 1);  // mono
  append_u32(out, rate);
  append_u32(out, rate * bytes_per_sample);
  append_u16(out, static_cast<std::uint16_t>(bytes_per_sample));
  append_u16(out, bits);
  if (is_float) {
    append_u16(out, 0);  // cbSize
    append_tag(out, "fact");
    append_u32(out, 4);
    append_u32(out, static_cast<std::uint32_t>(s.size()));
  }
  append_tag(out, "data");
  append_u32(out, data_size);
  for (double x : s.samples) {
    if (format == WavFormat::pcm16) {
      const std::int32_t v = clamp_round(x, 32768.0, -32768, 32767);
      append_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    } else if (format == WavFormat::pcm24) {
      const std::int32_t v = clamp_round(x, 8388608.0, -8388608, 8388607);
      out.push_back(static_cast<std::uint8_t>(v & 0xff));
      out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xff));
      out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xff));
    } else {
      const float v = static_cast<float>(x);
      std::uint32_t u;
      std::memcpy(&u, &v, 4);
      append_u32(out, u);
    }
  }
  if (out.size() & 1) out.push_back(0);
  const std::uint32_t riff_size = static_cast<std::uint32_t>(out.size() - 8);
  out[4] = static_cast<std::uint8_t>(riff_size & 0xff);
  out[5] = static_cast<std::uint8_t>((riff_size >> 8) & 0xff);
  out[6] = static_cast<std::uint8_t>((riff_size >> 16) & 0xff);
  out[7] = static_cast<std::uint8_t>((riff_size >> 24) & 0xff);

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) raise(Errc::io_error, "save_wav: cannot open " + path + " for writing");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!f) raise(Errc::io_error, "save_wav: write failed for " + path);
}

}  // namespace aliasbench::dsp
