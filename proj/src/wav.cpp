// sslvc/wav.cpp

// Copyright 2026  sslvc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sslvc/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>

#include "sslvc/errors.hpp"
#include "sslvc/tensor_io.hpp"

namespace sslvc {

namespace {

std::uint32_t le32(const std::uint8_t *p) {
  return p[0] | (p[1] << 8) | (p[2] << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
std::uint16_t le16(const std::uint8_t *p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }

void put32(std::vector<std::uint8_t> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}
void put16(std::vector<std::uint8_t> &out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

}  // namespace

Waveform read_wav(const std::filesystem::path &path) {
  auto bytes = read_file_bytes(path);
  const std::string name = path.string();
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw FormatError(name + ": not a RIFF/WAVE file");

  Waveform wave;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t *chunk = bytes.data() + pos;
    std::uint32_t size = le32(chunk + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size()) size = static_cast<std::uint32_t>(bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw FormatError(name + ": short fmt chunk");
      std::uint16_t format = le16(bytes.data() + body);
      std::uint16_t channels = le16(bytes.data() + body + 2);
      wave.sample_rate = static_cast<int>(le32(bytes.data() + body + 4));
      std::uint16_t bits = le16(bytes.data() + body + 14);
      if (format != 1 || bits != 16)
        throw FormatError(name + ": only PCM16 is supported");
      if (channels != 1) throw FormatError(name + ": only mono audio is supported");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw FormatError(name + ": data chunk before fmt chunk");
      std::size_t n = size / 2;
      wave.samples.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        auto s = static_cast<std::int16_t>(le16(bytes.data() + body + 2 * i));
        wave.samples[i] = static_cast<float>(s) / 32768.0f;
      }
      return wave;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError(name + ": missing data chunk");
}

void write_wav(const std::filesystem::path &path, const Waveform &wave) {
  const auto n = static_cast<std::uint32_t>(wave.samples.size());
  std::vector<std::uint8_t> out;
  out.reserve(44 + 2 * n);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put32(out, 36 + 2 * n);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put32(out, 16);
  put16(out, 1);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(wave.sample_rate));
  put32(out, static_cast<std::uint32_t>(wave.sample_rate) * 2);
  put16(out, 2);
  put16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put32(out, 2 * n);
  for (float f : wave.samples) {
    float c = std::isfinite(f) ? std::clamp(f, -1.0f, 1.0f) : 0.0f;
    auto s = static_cast<std::int16_t>(std::lround(c * 32767.0f));
    put16(out, static_cast<std::uint16_t>(s));
  }
  write_file_atomic(path, out);
}

}  // namespace sslvc
