// sslvc/eval.hpp

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

#ifndef SSLVC_EVAL_HPP
#define SSLVC_EVAL_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/dsp.hpp"
#include "sslvc/errors.hpp"
#include "sslvc/types.hpp"

namespace sslvc {

// ---- mel-cepstral distortion

inline constexpr int kCepstralOrder = 13;

// Orthonormal DCT-II of each log-mel frame, coefficients 1..order.
MatrixD mel_cepstrum(const MatrixF &log_mel, int order = kCepstralOrder);

// Monotone DTW with steps (1,0), (0,1), (1,1) and Euclidean local cost.
std::vector<std::pair<Eigen::Index, Eigen::Index>> dtw_path(const MatrixD &a, const MatrixD &b);

// Mean over the warping path of (10/ln10) * sqrt(2 * sum_d (c_d - c'_d)^2).
double mcd_cepstra(const MatrixD &a, const MatrixD &b);

// Both inputs 16 kHz and at least one analysis window long.
double mcd(const Waveform &converted, const Waveform &target, const MelConfig &mel = {});

// ---- prosody

struct ProsodyRmse {
  std::optional<double> f0_rmse;  // unset when no frame is voiced in both
  double energy_rmse = 0.0;
  std::vector<std::string> warnings;
};

// Min-max normalization to [0, 1]; a constant sequence maps to zeros and
// sets *degenerate.
Eigen::VectorXd min_max(const Eigen::VectorXd &x, bool *degenerate = nullptr);

// Tracks are truncated to the shorter one. F0 is normalized over each
// track's voiced frames and compared on frames voiced in both; energy is
// normalized and compared over all shared frames.
ProsodyRmse prosody_rmse(const ProsodyTrack &source, const ProsodyTrack &converted);

// ---- speaker similarity

enum class EmbedderKind { kFallbackStats, kExternalCommand };

struct SpeakerEmbedderSpec {
  EmbedderKind kind = EmbedderKind::kFallbackStats;
  // external_command: "{input_wav}" and "{output_tensor}" placeholders; the
  // tensor may be [dim] or [1 x dim].
  std::string command_template;
  int dim = 0;  // 0 accepts whatever the command writes
};

void to_json(nlohmann::json &j, const SpeakerEmbedderSpec &s);
void from_json(const nlohmann::json &j, SpeakerEmbedderSpec &s);

// Fallback: per-channel mean and std of the log-mel, concatenated.
Eigen::VectorXd fallback_embedding(const MatrixF &log_mel);

// External failures raise EvalError; there is no silent fallback.
Eigen::VectorXd speaker_embedding(const SpeakerEmbedderSpec &spec, const std::filesystem::path &wav,
                                  const MelConfig &mel = {});

// Cosine of the angle between a and b. A zero vector is a DomainError.
double cosine_similarity(const Eigen::VectorXd &a, const Eigen::VectorXd &b);

// ---- embedding-space probes

struct TsneConfig {
  double perplexity = 30.0;
  int iterations = 1000;
  double early_exaggeration = 12.0;
  int exaggeration_iterations = 250;
  double learning_rate = 200.0;
  std::uint64_t seed = 0;
};

// Exact t-SNE. Needs at least 3 * perplexity points.
MatrixD tsne(const MatrixD &points, const TsneConfig &config = {});

// k-means++ seeding, then Lloyd iterations. Returns one label per row.
std::vector<int> kmeans(const MatrixD &points, int k, std::uint64_t seed = 0, int iterations = 100);

// Mean silhouette coefficient of a labelling (Euclidean).
double silhouette(const MatrixD &points, const std::vector<int> &labels);

// Labelled embedding frames. Frames of one utterance share a group, and
// the train/test split never separates a group.
struct ProbeSet {
  MatrixD points;
  std::vector<int> speakers;
  std::vector<int> groups;

  void append(const MatrixD &frames, int speaker, int group);
};

// Per-utterance summary of a content embedding [T x H]: the temporal mean
// of e_t e_t^T, upper triangle without the diagonal, as one [1 x H(H-1)/2]
// row. Instance-normalized channels have zero mean and unit variance, so
// first moments and the diagonal carry nothing.
MatrixD correlation_summary(const MatrixD &embedding);

struct ProbeConfig {
  double test_fraction = 0.2;
  int iterations = 300;
  double learning_rate = 0.5;
  double l2 = 1e-3;
  std::uint64_t seed = 0;
};

struct ProbeResult {
  double accuracy = 0.0;
  double chance = 0.0;
  std::size_t train_points = 0;
  std::size_t test_points = 0;
};

// Multinomial logistic regression on standardized inputs, trained by
// full-batch gradient descent. The split is stratified by speaker over
// groups. One speaker, or a speaker with fewer than two groups, is a
// ParameterError.
ProbeResult speaker_probe(const ProbeSet &data, const ProbeConfig &config = {});

struct TsneProbeResult {
  MatrixD coordinates;        // [n x 2]
  double speaker_silhouette;  // silhouette of the 2-D points under the speaker labels
};

// At least two speakers and 50 points; then exact t-SNE.
TsneProbeResult tsne_probe(const ProbeSet &data, const TsneConfig &config = {});

// Evenly spaced subsample of at most max_rows rows per group, keeping
// labels aligned.
ProbeSet subsample(const ProbeSet &data, int max_rows_per_group);

// ---- report

struct EvalPair {
  std::filesystem::path converted;
  std::filesystem::path source;
  std::optional<std::filesystem::path> reference;  // parallel target-voice ground truth
};

struct EvalReport {
  std::optional<double> mcd_db;  // unset without parallel references
  double cos_sim = 0.0;
  double f0_rmse = 0.0;
  double energy_rmse = 0.0;
  std::size_t n_pairs = 0;
  std::size_t n_mcd_pairs = 0;
  std::vector<std::string> warnings;

  std::string table() const;
};

void to_json(nlohmann::json &j, const EvalReport &r);

// Scores every pair (in parallel) and averages. Speaker similarity is
// measured against the mean embedding of the target references. No pairs
// is a ParameterError.
EvalReport evaluate_pairs(const std::vector<EvalPair> &pairs,
                          const std::vector<std::filesystem::path> &target_references,
                          const SpeakerEmbedderSpec &embedder, int workers = 2, const MelConfig &mel = {});

}  // namespace sslvc

#endif  // SSLVC_EVAL_HPP
