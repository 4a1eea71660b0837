// sslvc/wav.hpp

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

#ifndef SSLVC_WAV_HPP
#define SSLVC_WAV_HPP

#include <filesystem>
#include <vector>

namespace sslvc {

struct Waveform {
  std::vector<float> samples;  // mono, nominally in [-1, 1]
  int sample_rate = 16000;
};

// Mono PCM16 RIFF/WAVE only. Anything else is a FormatError.
Waveform read_wav(const std::filesystem::path &path);

// Samples are clipped to [-1, 1] and quantized to PCM16.
void write_wav(const std::filesystem::path &path, const Waveform &wave);

}  // namespace sslvc

#endif  // SSLVC_WAV_HPP
