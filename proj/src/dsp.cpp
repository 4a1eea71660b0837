// sslvc/dsp.cpp

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

#include "sslvc/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/FFT>

#include "sslvc/errors.hpp"

namespace sslvc {

namespace {

using ComplexMatrix =
    Eigen::Matrix<std::complex<double>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// numpy-style "reflect" index, repeated for signals shorter than the pad.
std::ptrdiff_t reflect_index(std::ptrdiff_t i, std::ptrdiff_t n) {
  if (n == 1) return 0;
  const std::ptrdiff_t period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

void check_signal(std::span<const float> signal) {
  if (signal.empty()) throw InputError("waveform is empty");
  for (float s : signal)
    if (!std::isfinite(s)) throw InputError("waveform contains non-finite samples");
}

// Analysis window of n_fft taps: Hann of win_length, centered.
std::vector<double> analysis_window(const MelConfig &config) {
  if (config.win_length > config.n_fft || config.win_length <= 0)
    throw ConfigError("win_length must lie in (0, n_fft]");
  std::vector<double> w(static_cast<std::size_t>(config.n_fft), 0.0);
  auto hann = hann_window(config.win_length);
  const int offset = (config.n_fft - config.win_length) / 2;
  std::copy(hann.begin(), hann.end(), w.begin() + offset);
  return w;
}

const MatrixD &cached_filterbank(const MelConfig &config) {
  thread_local MelConfig key{};
  thread_local MatrixD bank;
  if (bank.size() == 0 || key.sample_rate != config.sample_rate || key.n_fft != config.n_fft ||
      key.n_mels != config.n_mels || key.fmin != config.fmin || key.fmax != config.fmax) {
    bank = mel_filterbank(config);
    key = config;
  }
  return bank;
}

}  // namespace

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

MatrixD mel_filterbank(const MelConfig &config) {
  const int bins = config.n_bins();
  const double lo = hz_to_mel(config.fmin), hi = hz_to_mel(config.fmax);
  std::vector<double> edges(static_cast<std::size_t>(config.n_mels + 2));
  for (int i = 0; i < config.n_mels + 2; ++i)
    edges[i] = mel_to_hz(lo + (hi - lo) * i / (config.n_mels + 1));
  MatrixD bank = MatrixD::Zero(config.n_mels, bins);
  for (int m = 0; m < config.n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * config.sample_rate / config.n_fft;
      double w = 0.0;
      if (f > left && f <= center) {
        w = (f - left) / (center - left);
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      bank(m, k) = w;
    }
  }
  return bank;
}

std::vector<double> hann_window(int length) {
  std::vector<double> w(static_cast<std::size_t>(length));
  for (int n = 0; n < length; ++n)
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
  return w;
}

ComplexMatrix stft(std::span<const float> signal, const MelConfig &config) {
  check_signal(signal);
  const auto len = static_cast<std::ptrdiff_t>(signal.size());
  const int n_fft = config.n_fft, hop = config.hop_length, pad = n_fft / 2;
  const auto frames = static_cast<Eigen::Index>(len / hop + 1);
  const auto window = analysis_window(config);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  ComplexMatrix out(frames, config.n_bins());
  std::vector<double> frame(static_cast<std::size_t>(n_fft));
  std::vector<std::complex<double>> spectrum;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::ptrdiff_t start = t * hop - pad;
    for (int n = 0; n < n_fft; ++n)
      frame[n] = window[n] * signal[static_cast<std::size_t>(reflect_index(start + n, len))];
    fft.fwd(spectrum, frame);
    for (int k = 0; k < config.n_bins(); ++k) out(t, k) = spectrum[static_cast<std::size_t>(k)];
  }
  return out;
}

std::vector<float> istft(const ComplexMatrix &spectrum, const MelConfig &config) {
  const int n_fft = config.n_fft, hop = config.hop_length, pad = n_fft / 2;
  const auto frames = spectrum.rows();
  if (frames < 1) return {};
  const auto window = analysis_window(config);
  const std::size_t padded = static_cast<std::size_t>(n_fft + hop * (frames - 1));
  std::vector<double> acc(padded, 0.0), norm(padded, 0.0);

  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> bins(static_cast<std::size_t>(config.n_bins()));
  std::vector<double> frame;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int k = 0; k < config.n_bins(); ++k) bins[static_cast<std::size_t>(k)] = spectrum(t, k);
    fft.inv(frame, bins, n_fft);
    const std::size_t start = static_cast<std::size_t>(t * hop);
    for (int n = 0; n < n_fft; ++n) {
      acc[start + n] += frame[n] * window[n];
      norm[start + n] += window[n] * window[n];
    }
  }
  const std::size_t out_len = static_cast<std::size_t>(hop * (frames - 1));
  std::vector<float> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const double w = norm[i + pad];
    out[i] = static_cast<float>(w > 1e-8 ? acc[i + pad] / w : 0.0);
  }
  return out;
}

MatrixF magnitude_to_log_mel(const MatrixD &magnitude, const MelConfig &config) {
  const MatrixD &bank = cached_filterbank(config);
  MatrixD mel = magnitude * bank.transpose();
  return mel.unaryExpr([&](double v) { return std::log(std::max(v, config.log_floor)); })
      .cast<float>();
}

MelSpectrogram extract_mel(std::span<const float> signal, const MelConfig &config) {
  auto spectrum = stft(signal, config);
  MatrixD magnitude = spectrum.cwiseAbs();
  MelSpectrogram mel;
  mel.frames = magnitude_to_log_mel(magnitude, config);
  mel.hop_s = static_cast<double>(config.hop_length) / config.sample_rate;
  return mel;
}

MelSpectrogram extract_mel(const Waveform &wave, const MelConfig &config) {
  if (wave.sample_rate != config.sample_rate)
    throw InputError("expected " + std::to_string(config.sample_rate) + " Hz audio, got " +
                     std::to_string(wave.sample_rate));
  return extract_mel(std::span<const float>(wave.samples), config);
}

std::vector<float> time_stretch(std::span<const float> signal, double rate, int sample_rate) {
  if (!(rate >= 0.8 && rate <= 1.2))
    throw ConfigError("time_stretch: rate must lie in [0.8, 1.2]");
  check_signal(signal);
  if (rate == 1.0) return {signal.begin(), signal.end()};

  const auto len = static_cast<std::ptrdiff_t>(signal.size());
  const int frame = 2 * static_cast<int>(std::lround(0.016 * sample_rate));  // 32 ms
  const int synthesis_hop = frame / 2;
  const int tolerance = frame / 4;
  const auto out_len = static_cast<std::ptrdiff_t>(std::lround(static_cast<double>(len) / rate));
  const auto window = hann_window(frame);
  auto sample = [&](std::ptrdiff_t i) -> double {
    return (i >= 0 && i < len) ? signal[static_cast<std::size_t>(i)] : 0.0;
  };

  std::vector<double> acc(static_cast<std::size_t>(out_len + 2 * frame), 0.0);
  std::vector<double> norm(acc.size(), 0.0);
  const std::ptrdiff_t shift = frame / 2;  // frames start half a window early
  std::ptrdiff_t previous = 0;
  for (std::ptrdiff_t k = 0;; ++k) {
    const std::ptrdiff_t out_pos = k * synthesis_hop - shift;
    if (out_pos >= out_len) break;
    const auto nominal = static_cast<std::ptrdiff_t>(std::lround(static_cast<double>(out_pos) * rate));
    std::ptrdiff_t chosen = nominal;
    if (k > 0) {
      // Pick the segment most similar to the natural continuation of the
      // previously copied one.
      const std::ptrdiff_t natural = previous + synthesis_hop;
      double best = -std::numeric_limits<double>::infinity();
      for (std::ptrdiff_t delta = -tolerance; delta <= tolerance; ++delta) {
        const std::ptrdiff_t candidate = nominal + delta;
        double corr = 0.0;
        for (int n = 0; n < frame; n += 2) corr += sample(candidate + n) * sample(natural + n);
        if (corr > best) {
          best = corr;
          chosen = candidate;
        }
      }
    }
    for (int n = 0; n < frame; ++n) {
      const std::ptrdiff_t o = out_pos + n + shift;
      if (o < 0 || o >= static_cast<std::ptrdiff_t>(acc.size())) continue;
      acc[static_cast<std::size_t>(o)] += window[n] * sample(chosen + n);
      norm[static_cast<std::size_t>(o)] += window[n];
    }
    previous = chosen;
  }
  std::vector<float> out(static_cast<std::size_t>(out_len));
  for (std::ptrdiff_t i = 0; i < out_len; ++i) {
    const auto o = static_cast<std::size_t>(i + shift);
    out[static_cast<std::size_t>(i)] = static_cast<float>(norm[o] > 1e-6 ? acc[o] / norm[o] : 0.0);
  }
  return out;
}

ProsodyTrack extract_prosody(std::span<const float> signal, const MelConfig &mel,
                             const PitchConfig &pitch) {
  check_signal(signal);
  const auto len = static_cast<std::ptrdiff_t>(signal.size());
  const int sr = mel.sample_rate;
  const int window = static_cast<int>(std::lround(pitch.window_s * sr));
  const int tau_min = std::max(2, static_cast<int>(std::floor(sr / pitch.f0_max)));
  const int tau_max = static_cast<int>(std::ceil(sr / pitch.f0_min));
  const auto frames = static_cast<Eigen::Index>(len / mel.hop_length + 1);

  ProsodyTrack track;
  track.f0_hz = Eigen::VectorXf::Zero(frames);
  track.energy = Eigen::VectorXf::Zero(frames);
  track.voiced.assign(static_cast<std::size_t>(frames), false);

  std::vector<double> buf(static_cast<std::size_t>(window + tau_max + 1));
  std::vector<double> diff(static_cast<std::size_t>(tau_max + 2));
  std::vector<double> cmndf(static_cast<std::size_t>(tau_max + 2));
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::ptrdiff_t start = t * mel.hop_length - window / 2;
    for (std::size_t n = 0; n < buf.size(); ++n) {
      const std::ptrdiff_t i = start + static_cast<std::ptrdiff_t>(n);
      buf[n] = (i >= 0 && i < len) ? signal[static_cast<std::size_t>(i)] : 0.0;
    }
    double power = 0.0;
    for (int n = 0; n < window; ++n) power += buf[n] * buf[n];
    const double rms = std::sqrt(power / window);
    track.energy[t] = static_cast<float>(rms);
    if (rms < pitch.silence_rms) continue;

    for (int tau = 1; tau <= tau_max; ++tau) {
      double d = 0.0;
      for (int n = 0; n < window; ++n) {
        const double e = buf[n] - buf[n + tau];
        d += e * e;
      }
      diff[tau] = d;
    }
    double running = 0.0;
    cmndf[0] = 1.0;
    for (int tau = 1; tau <= tau_max; ++tau) {
      running += diff[tau];
      cmndf[tau] = running > 0.0 ? diff[tau] * tau / running : 1.0;
    }

    int best = -1;
    for (int tau = tau_min; tau <= tau_max; ++tau) {
      if (cmndf[tau] < pitch.threshold) {
        while (tau + 1 <= tau_max && cmndf[tau + 1] < cmndf[tau]) ++tau;
        best = tau;
        break;
      }
    }
    if (best < 0) {
      best = tau_min;
      for (int tau = tau_min; tau <= tau_max; ++tau)
        if (cmndf[tau] < cmndf[best]) best = tau;
      if (cmndf[best] > pitch.max_aperiodicity) continue;
    }
    double refined = best;
    if (best > 1 && best < tau_max) {
      const double a = cmndf[best - 1], b = cmndf[best], c = cmndf[best + 1];
      const double denom = a - 2.0 * b + c;
      if (std::abs(denom) > 1e-12) refined = best + 0.5 * (a - c) / denom;
    }
    track.f0_hz[t] = static_cast<float>(sr / refined);
    track.voiced[static_cast<std::size_t>(t)] = true;
  }
  return track;
}

MatrixF prosody_to_matrix(const ProsodyTrack &track) {
  MatrixF m(track.size(), 2);
  m.col(0) = track.f0_hz;
  m.col(1) = track.energy;
  return m;
}

ProsodyTrack prosody_from_matrix(const MatrixF &m) {
  if (m.cols() != 2) throw ShapeError("prosody tensor must be [T x 2]");
  ProsodyTrack track;
  track.f0_hz = m.col(0);
  track.energy = m.col(1);
  track.voiced.resize(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) track.voiced[static_cast<std::size_t>(i)] = m(i, 0) > 0.0f;
  return track;
}

std::vector<float> griffin_lim(const MelSpectrogram &mel, const GriffinLimConfig &gl,
                               const MelConfig &config) {
  if (mel.frames.cols() != config.n_mels)
    throw ShapeError("griffin_lim: mel has " + std::to_string(mel.frames.cols()) +
                     " bins, expected " + std::to_string(config.n_mels));
  const auto frames = mel.frames.rows();
  if (frames < 1) return {};
  const MatrixD &bank = cached_filterbank(config);
  const MatrixD target = mel.frames.cast<double>().array().exp().matrix();

  // Non-negative lift: start from the filter-weighted average, then refine
  // with multiplicative least-squares updates.
  const Eigen::RowVectorXd coverage = bank.colwise().sum();
  MatrixD magnitude = target * bank;
  for (Eigen::Index k = 0; k < magnitude.cols(); ++k) {
    const double c = coverage[k];
    magnitude.col(k) = c > 1e-12 ? (magnitude.col(k) / c).eval() : Eigen::VectorXd::Zero(frames);
  }
  const MatrixD gram = bank.transpose() * bank;
  const MatrixD numerator = target * bank;
  for (int it = 0; it < gl.nnls_iterations; ++it) {
    MatrixD denominator = magnitude * gram;
    magnitude = magnitude.cwiseProduct(numerator).cwiseQuotient(denominator.array().max(1e-30).matrix());
  }

  std::mt19937_64 engine(gl.seed);
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  ComplexMatrix spectrum(frames, config.n_bins());
  for (Eigen::Index t = 0; t < frames; ++t)
    for (Eigen::Index k = 0; k < spectrum.cols(); ++k)
      spectrum(t, k) = std::polar(magnitude(t, k), phase(engine));

  // A one-frame spectrogram has no samples to iterate on.
  if (frames < 2) return {};
  // Fast Griffin-Lim: the magnitude projection is extrapolated with
  // momentum before the next consistency projection.
  ComplexMatrix projected = spectrum, previous = spectrum;
  std::vector<float> signal = istft(spectrum, config);
  for (int it = 0; it < gl.iterations; ++it) {
    ComplexMatrix rebuilt = stft(signal, config);
    const Eigen::Index rows = std::min(rebuilt.rows(), frames);
    for (Eigen::Index t = 0; t < rows; ++t) {
      for (Eigen::Index k = 0; k < spectrum.cols(); ++k) {
        const std::complex<double> z = rebuilt(t, k);
        const double a = std::abs(z);
        projected(t, k) = a > 1e-12 ? magnitude(t, k) * (z / a) : std::complex<double>(magnitude(t, k), 0.0);
      }
    }
    spectrum = projected + gl.momentum * (projected - previous);
    previous = projected;
    signal = istft(spectrum, config);
  }
  if (gl.iterations > 0) signal = istft(projected, config);
  return signal;
}

}  // namespace sslvc
