// Copyright 2026 The Taches Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Minimal RIFF/WAVE reader and writer.
//
// Canonical little-endian files with a "fmt " and a "data" chunk only:
// 16- and 24-bit integer PCM (format tag 1) and 32-bit IEEE float (tag 3).
// Other chunks are skipped on read. WAVE_FORMAT_EXTENSIBLE is rejected.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "taches/signal.hpp"

namespace taches::audio {

enum class Encoding { kPcm16, kPcm24, kFloat32 };

inline int bits_per_sample(Encoding enc) {
  switch (enc) {
    case Encoding::kPcm16: return 16;
    case Encoding::kPcm24: return 24;
    case Encoding::kFloat32: return 32;
  }
  return 0;
}

inline const char* to_string(Encoding enc) {
  switch (enc) {
    case Encoding::kPcm16: return "pcm16";
    case Encoding::kPcm24: return "pcm24";
    case Encoding::kFloat32: return "float32";
  }
  return "?";
}

struct WavSpec {
  unsigned sample_rate = kDefaultSampleRate;
  unsigned channels = 1;
  Encoding encoding = Encoding::kFloat32;
};

struct WavData {
  std::vector<Signal> channels;
  WavSpec spec;
};

struct WriteStats {
  std::size_t clipped = 0;  // samples saturated to the PCM range
};

namespace detail {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

inline std::uint32_t get_u32(const unsigned char* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) |
         (std::uint32_t{p[2]} << 16) | (std::uint32_t{p[3]} << 24);
}
inline std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}
inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
inline void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v));
  out.push_back(static_cast<unsigned char>(v >> 8));
}
inline void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

// Saturating nearest-even conversion of v to a `bits`-wide PCM code.
inline std::int32_t to_pcm(double v, int bits, std::size_t& clipped) {
  const double top = std::ldexp(1.0, bits - 1);
  if (std::isnan(v)) {
    ++clipped;
    return 0;
  }
  const double scaled = std::nearbyint(v * top);
  if (scaled > top - 1) {
    ++clipped;
    return static_cast<std::int32_t>(top - 1);
  }
  if (scaled < -top) {
    ++clipped;
    return static_cast<std::int32_t>(-top);
  }
  return static_cast<std::int32_t>(scaled);
}

}  // namespace detail

inline WavData read_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path + ": cannot open for reading");
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  auto fail = [&](const std::string& chunk, const std::string& what) -> IoError {
    return IoError(path + ": chunk '" + chunk + "': " + what);
  };

  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("RIFF", "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format_tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t rate = 0;
  std::uint16_t bits = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id(reinterpret_cast<const char*>(bytes.data() + pos), 4);
    const std::size_t size = detail::get_u32(bytes.data() + pos + 4);
    const std::size_t body = pos + 8;
    if (id == "fmt ") {
      if (size < 16 || body + 16 > bytes.size()) throw fail(id, "truncated");
      const unsigned char* f = bytes.data() + body;
      format_tag = detail::get_u16(f);
      channels = detail::get_u16(f + 2);
      rate = detail::get_u32(f + 4);
      bits = detail::get_u16(f + 14);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw fail(id, "appears before the 'fmt ' chunk");
      data = bytes.data() + body;
      data_size = std::min(size, bytes.size() - body);
      break;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt) throw fail("fmt ", "missing");
  if (data == nullptr) throw fail("data", "missing");

  WavSpec spec;
  if (format_tag == detail::kFormatPcm && bits == 16) {
    spec.encoding = Encoding::kPcm16;
  } else if (format_tag == detail::kFormatPcm && bits == 24) {
    spec.encoding = Encoding::kPcm24;
  } else if (format_tag == detail::kFormatFloat && bits == 32) {
    spec.encoding = Encoding::kFloat32;
  } else if (format_tag == detail::kFormatExtensible) {
    throw fail("fmt ", "WAVE_FORMAT_EXTENSIBLE is not supported");
  } else {
    throw fail("fmt ", "unsupported encoding (format tag " +
                           std::to_string(format_tag) + ", " +
                           std::to_string(bits) + " bits)");
  }
  if (channels == 0) throw fail("fmt ", "zero channels");
  if (rate == 0) throw fail("fmt ", "zero sample rate");
  spec.channels = channels;
  spec.sample_rate = rate;

  const std::size_t width = bits / 8;
  const std::size_t frames = data_size / (width * channels);
  std::vector<std::vector<double>> chans(channels, std::vector<double>(frames));
  const double scale = std::ldexp(1.0, -(bits - 1));
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = data + (f * channels + c) * width;
      double v = 0.0;
      switch (spec.encoding) {
        case Encoding::kPcm16:
          v = static_cast<std::int16_t>(detail::get_u16(p)) * scale;
          break;
        case Encoding::kPcm24: {
          std::int32_t raw = p[0] | (p[1] << 8) | (p[2] << 16);
          if (raw & 0x800000) raw -= 0x1000000;
          v = raw * scale;
          break;
        }
        case Encoding::kFloat32: {
          const std::uint32_t u = detail::get_u32(p);
          float fv;
          std::memcpy(&fv, &u, sizeof fv);
          v = fv;
          break;
        }
      }
      chans[c][f] = v;
    }
  }

  WavData out;
  out.spec = spec;
  for (auto& c : chans) out.channels.emplace_back(std::move(c), rate);
  return out;
}

/// Writes interleaved frames. PCM samples are rounded to nearest-even and
/// saturated; the number of saturated samples is returned.
inline WriteStats write_wav(const std::string& path,
                            const std::vector<Signal>& channels,
                            const WavSpec& spec) {
  if (channels.empty()) throw DomainError("no channels to write");
  if (spec.sample_rate == 0) throw DomainError("sample rate must be positive");
  const std::size_t frames = channels.front().size();
  for (const Signal& c : channels) {
    if (c.size() != frames) {
      throw DomainError("channel length mismatch: " + std::to_string(c.size()) +
                        " vs " + std::to_string(frames) + " samples");
    }
  }

  const int bits = bits_per_sample(spec.encoding);
  const std::size_t width = static_cast<std::size_t>(bits) / 8;
  const auto n_chan = static_cast<std::uint16_t>(channels.size());
  const std::size_t data_size = frames * n_chan * width;
  if (data_size + 36 > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("output exceeds the 4 GiB RIFF limit");
  }

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  detail::put_tag(out, "RIFF");
  detail::put_u32(out, static_cast<std::uint32_t>(36 + data_size));
  detail::put_tag(out, "WAVE");
  detail::put_tag(out, "fmt ");
  detail::put_u32(out, 16);
  detail::put_u16(out, spec.encoding == Encoding::kFloat32 ? detail::kFormatFloat
                                                          : detail::kFormatPcm);
  detail::put_u16(out, n_chan);
  detail::put_u32(out, spec.sample_rate);
  detail::put_u32(out, static_cast<std::uint32_t>(spec.sample_rate * n_chan * width));
  detail::put_u16(out, static_cast<std::uint16_t>(n_chan * width));
  detail::put_u16(out, static_cast<std::uint16_t>(bits));
  detail::put_tag(out, "data");
  detail::put_u32(out, static_cast<std::uint32_t>(data_size));

  WriteStats stats;
  for (std::size_t f = 0; f < frames; ++f) {
    for (const Signal& c : channels) {
      const double v = c[f];
      switch (spec.encoding) {
        case Encoding::kPcm16:
          detail::put_u16(out, static_cast<std::uint16_t>(
                                   detail::to_pcm(v, 16, stats.clipped)));
          break;
        case Encoding::kPcm24: {
          const auto u = static_cast<std::uint32_t>(detail::to_pcm(v, 24, stats.clipped));
          out.push_back(static_cast<unsigned char>(u));
          out.push_back(static_cast<unsigned char>(u >> 8));
          out.push_back(static_cast<unsigned char>(u >> 16));
          break;
        }
        case Encoding::kFloat32: {
          const float fv = static_cast<float>(v);
          std::uint32_t u;
          std::memcpy(&u, &fv, sizeof u);
          detail::put_u32(out, u);
          break;
        }
      }
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError(path + ": cannot open for writing");
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError(path + ": write failed");
  return stats;
}

}  // namespace taches::audio
