// sslvc/synth.hpp

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

#ifndef SSLVC_SYNTH_HPP
#define SSLVC_SYNTH_HPP

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace sslvc {

// Formant-filtered harmonic voice, used to build deterministic fixture
// corpora with controllable speaker identity (F0 and vocal-tract scale)
// and shared content (vowel sequences).
struct VoiceProfile {
  std::string name;
  double f0_hz = 200.0;
  double formant_scale = 1.0;
  double amplitude = 0.3;
  double noise_floor = 0.0;  // RMS of seeded background noise
  std::uint64_t noise_seed = 0;
};

struct Phone {
  int vowel = 0;  // index into the built-in vowel table; -1 is a pause
  double duration_s = 0.1;
};

int vowel_count();

std::vector<Phone> random_phones(std::mt19937_64 &engine, double total_s);

std::vector<float> synthesize_voice(const std::vector<Phone> &phones,
                                    const VoiceProfile &voice, int sample_rate = 16000);

struct FixtureSpec {
  int target_utterances = 10;
  int external_per_speaker = 4;
  double utterance_s = 1.2;
  std::uint64_t seed = 11;
};

// Writes target/*.wav (target voice), external/<speaker>/*.wav and
// parallel/<speaker>/*.wav (the target voice speaking the same phones as
// each external utterance, usable as MCD ground truth).
void write_fixture_corpus(const std::filesystem::path &root, const FixtureSpec &spec = {});

VoiceProfile fixture_target_voice();
std::vector<VoiceProfile> fixture_external_voices();

}  // namespace sslvc

#endif  // SSLVC_SYNTH_HPP
