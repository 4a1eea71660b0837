// sslvc/dsp.hpp

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

#ifndef SSLVC_DSP_HPP
#define SSLVC_DSP_HPP

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "sslvc/types.hpp"
#include "sslvc/wav.hpp"

namespace sslvc {

struct MelConfig {
  int sample_rate = 16000;
  int n_fft = 1024;
  int win_length = 1024;
  int hop_length = 160;
  int n_mels = 80;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-5;

  int n_bins() const { return n_fft / 2 + 1; }
};

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular filters with unit peak, [n_mels x n_bins].
MatrixD mel_filterbank(const MelConfig &config = {});

// Periodic Hann window of the given length.
std::vector<double> hann_window(int length);

// Centered STFT with reflection padding of n_fft/2 on both sides:
// frame count is floor(len / hop) + 1. Returns [frames x n_bins].
Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
stft(std::span<const float> signal, const MelConfig &config = {});

// Inverse of stft() by weighted overlap-add; output length hop*(frames-1).
std::vector<float> istft(
    const Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic,
                        Eigen::RowMajor> &spectrum,
    const MelConfig &config = {});

// Natural-log amplitude mel spectrogram, floored at config.log_floor.
MelSpectrogram extract_mel(std::span<const float> signal, const MelConfig &config = {});
MelSpectrogram extract_mel(const Waveform &wave, const MelConfig &config = {});

// Converts a magnitude spectrogram [frames x n_bins] to log-mel.
MatrixF magnitude_to_log_mel(const MatrixD &magnitude, const MelConfig &config = {});

// Pitch-preserving waveform-similarity overlap-add. The output has
// round(len / rate) samples; rate 1.0 returns the input unchanged.
std::vector<float> time_stretch(std::span<const float> signal, double rate,
                                int sample_rate = 16000);

struct ProsodyTrack {
  Eigen::VectorXf f0_hz;   // 0 marks unvoiced
  Eigen::VectorXf energy;  // frame RMS
  std::vector<bool> voiced;

  Eigen::Index size() const { return f0_hz.size(); }
};

struct PitchConfig {
  double window_s = 0.025;
  double f0_min = 50.0;
  double f0_max = 600.0;
  double threshold = 0.15;    // absolute CMNDF threshold for the first dip
  double max_aperiodicity = 0.35;
  double silence_rms = 1e-4;
};

// F0 from the cumulative-mean-normalized difference of the short-time
// autocorrelation, one frame per mel hop (same frame count as extract_mel).
ProsodyTrack extract_prosody(std::span<const float> signal, const MelConfig &mel = {},
                             const PitchConfig &pitch = {});

// Stored as [T x 2] (f0_hz, energy).
MatrixF prosody_to_matrix(const ProsodyTrack &track);
ProsodyTrack prosody_from_matrix(const MatrixF &m);

struct GriffinLimConfig {
  int iterations = 32;
  int nnls_iterations = 50;
  double momentum = 0.99;
  std::uint64_t seed = 0;
};

// Mel inversion: non-negative least-squares lift to linear magnitude, then
// Griffin-Lim phase recovery. Output length is hop * (frames - 1).
std::vector<float> griffin_lim(const MelSpectrogram &mel, const GriffinLimConfig &gl = {},
                               const MelConfig &config = {});

}  // namespace sslvc

#endif  // SSLVC_DSP_HPP
