// sslvc/synth.cpp

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

#include "sslvc/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "sslvc/wav.hpp"

namespace sslvc {

namespace {

struct Vowel {
  std::array<double, 3> formants;
  std::array<double, 3> bandwidths;
};

// Rough adult formant targets.
const std::array<Vowel, 6> kVowels = {{
    {{730, 1090, 2440}, {90, 110, 160}},
    {{270, 2290, 3010}, {60, 100, 170}},
    {{300, 870, 2240}, {70, 100, 150}},
    {{530, 1840, 2480}, {80, 110, 160}},
    {{570, 840, 2410}, {80, 100, 160}},
    {{440, 1020, 2240}, {80, 100, 150}},
}};

}  // namespace

int vowel_count() { return static_cast<int>(kVowels.size()); }

std::vector<Phone> random_phones(std::mt19937_64 &engine, double total_s) {
  std::uniform_int_distribution<int> vowel(0, vowel_count() - 1);
  std::uniform_real_distribution<double> duration(0.06, 0.18);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::vector<Phone> phones{{-1, 0.08}};
  double t = 0.08;
  while (t < total_s - 0.1) {
    Phone p{coin(engine) < 0.1 ? -1 : vowel(engine), duration(engine)};
    phones.push_back(p);
    t += p.duration_s;
  }
  phones.push_back({-1, std::max(0.05, total_s - t)});
  return phones;
}

std::vector<float> synthesize_voice(const std::vector<Phone> &phones, const VoiceProfile &voice,
                                    int sample_rate) {
  double total = 0.0;
  for (const auto &p : phones) total += p.duration_s;
  const auto n = static_cast<std::size_t>(std::lround(total * sample_rate));
  std::vector<float> out(n, 0.0f);

  // Per-sample phone index, and a smoothed voicing gate.
  std::vector<int> phone_at(n, -1);
  std::vector<double> gate(n, 0.0);
  {
    std::size_t pos = 0;
    for (std::size_t i = 0; i < phones.size(); ++i) {
      auto len = static_cast<std::size_t>(std::lround(phones[i].duration_s * sample_rate));
      for (std::size_t j = pos; j < std::min(n, pos + len); ++j) {
        phone_at[j] = static_cast<int>(i);
        gate[j] = phones[i].vowel >= 0 ? 1.0 : 0.0;
      }
      pos += len;
    }
    const auto ramp = static_cast<std::size_t>(0.01 * sample_rate);
    std::vector<double> smooth(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += gate[i];
      if (i >= ramp) acc -= gate[i - ramp];
      smooth[i] = acc / static_cast<double>(ramp);
    }
    gate.swap(smooth);
  }

  const int block = sample_rate / 200;  // envelopes update every 5 ms
  const double nyquist = 0.5 * sample_rate;
  const int max_harmonics = static_cast<int>(nyquist / (0.6 * voice.f0_hz)) + 1;
  std::vector<double> phase(static_cast<std::size_t>(max_harmonics + 1), 0.0);
  std::vector<double> amp(phase.size(), 0.0);
  std::array<double, 3> formants = kVowels[0].formants;
  std::array<double, 3> bandwidths = kVowels[0].bandwidths;

  for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(block)) {
    const double t = static_cast<double>(start) / sample_rate;
    const int idx = phone_at[start];
    const int v = idx >= 0 ? phones[static_cast<std::size_t>(idx)].vowel : -1;
    if (v >= 0) {
      // Glide toward the current vowel's formants (about 25 ms time constant).
      for (int k = 0; k < 3; ++k) {
        formants[k] += 0.2 * (kVowels[v].formants[k] - formants[k]);
        bandwidths[k] += 0.2 * (kVowels[v].bandwidths[k] - bandwidths[k]);
      }
    }
    const double f0 = voice.f0_hz * (1.0 + 0.06 * std::sin(2.0 * std::numbers::pi * 2.5 * t) -
                                      0.08 * t / std::max(total, 1e-3));
    const int harmonics = std::min(max_harmonics, static_cast<int>(nyquist / f0));
    double norm = 0.0;
    for (int h = 1; h <= harmonics; ++h) {
      const double f = h * f0;
      double env = 0.0;
      for (int k = 0; k < 3; ++k) {
        const double fc = formants[k] * voice.formant_scale;
        const double z = (f - fc) / bandwidths[k];
        env += std::exp(-0.5 * z * z) / (1.0 + k);
      }
      env = (env + 0.02) / (1.0 + f / 1500.0);
      amp[static_cast<std::size_t>(h)] = env;
      norm += env * env;
    }
    norm = std::sqrt(std::max(norm, 1e-12));
    const std::size_t end = std::min(n, start + static_cast<std::size_t>(block));
    for (std::size_t i = start; i < end; ++i) {
      double s = 0.0;
      for (int h = 1; h <= harmonics; ++h) {
        auto &ph = phase[static_cast<std::size_t>(h)];
        ph += 2.0 * std::numbers::pi * h * f0 / sample_rate;
        if (ph > 2.0 * std::numbers::pi) ph -= 2.0 * std::numbers::pi;
        s += amp[static_cast<std::size_t>(h)] * std::sin(ph);
      }
      out[i] = static_cast<float>(voice.amplitude * gate[i] * s / norm);
    }
  }
  if (voice.noise_floor > 0.0) {
    std::mt19937_64 engine(voice.noise_seed);
    std::normal_distribution<double> noise(0.0, voice.noise_floor);
    for (auto &v : out) v += static_cast<float>(noise(engine));
  }
  return out;
}

VoiceProfile fixture_target_voice() { return {"target", 220.0, 1.12, 0.3}; }

std::vector<VoiceProfile> fixture_external_voices() {
  return {{"spk_low", 110.0, 0.88, 0.3}, {"spk_mid", 160.0, 0.97, 0.3}, {"spk_high", 290.0, 1.2, 0.3}};
}

void write_fixture_corpus(const std::filesystem::path &root, const FixtureSpec &spec) {
  std::mt19937_64 engine(spec.seed);
  const auto target = fixture_target_voice();
  for (int i = 0; i < spec.target_utterances; ++i) {
    auto phones = random_phones(engine, spec.utterance_s);
    char name[32];
    std::snprintf(name, sizeof name, "t%03d.wav", i);
    write_wav(root / "target" / name, {synthesize_voice(phones, target), 16000});
  }
  for (const auto &voice : fixture_external_voices()) {
    for (int i = 0; i < spec.external_per_speaker; ++i) {
      auto phones = random_phones(engine, spec.utterance_s);
      char name[32];
      std::snprintf(name, sizeof name, "%s_%03d.wav", voice.name.c_str(), i);
      write_wav(root / "external" / voice.name / name, {synthesize_voice(phones, voice), 16000});
      write_wav(root / "parallel" / voice.name / name, {synthesize_voice(phones, target), 16000});
    }
  }
}

}  // namespace sslvc
