// sslvc/training.hpp

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

#ifndef SSLVC_TRAINING_HPP
#define SSLVC_TRAINING_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sslvc/checkpoint.hpp"
#include "sslvc/manifest.hpp"
#include "sslvc/objective.hpp"
#include "sslvc/optim.hpp"

namespace sslvc {

struct TrainingConfig {
  std::int64_t steps = 100000;
  int batch_size = 16;  // utterances per corpus per step
  double lr_g = 2e-4;
  double lr_d = 1e-4;
  double beta1 = 0.8;
  double beta2 = 0.99;
  std::int64_t warmup_steps = 5000;
  double lambda_sim_after_warmup = 1.0;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 1000;
  std::int64_t validate_every = 500;
  int segment_frames = 128;  // feature frames per crop; mel crop is factor times longer
  GanObjective objective = GanObjective::kExpectation;
  int loader_workers = 2;
  // L_rec alone: no discriminator updates, no adversarial terms.
  bool reconstruction_only = false;

  void validate() const;
};

void to_json(nlohmann::json &j, const TrainingConfig &c);
void from_json(const nlohmann::json &j, TrainingConfig &c);

// 0 before warmup_steps, lambda_sim_after_warmup from then on.
double lambda_sim(const TrainingConfig &config, std::int64_t step);

struct Utterance {
  std::string id;
  MatrixF features;  // [T_s x D]
  MatrixF mel;       // [T_m x n_mels]; empty for external utterances
};

struct Corpus {
  std::vector<Utterance> target;
  std::vector<Utterance> external;
  std::vector<Utterance> validation;
};

// Throws PreflightError naming every missing feature or mel file.
void preflight(const std::vector<UtteranceRecord> &records);

// Preflight, then parallel tensor loading.
Corpus load_corpus(const std::vector<UtteranceRecord> &train, const std::vector<UtteranceRecord> &validation,
                   int workers);

struct TrainingBatch {
  std::vector<std::string> target_ids;
  std::vector<std::string> external_ids;
  std::vector<MatrixF> target_features;
  std::vector<MatrixF> target_mels;
  std::vector<MatrixF> external_features;
};

// Step-indexed sampling. Each corpus is walked in its own seeded
// per-epoch permutation, so the two corpora cycle independently; crop
// offsets come from a per-step seed. batch(step) is a pure function of
// (corpus, config, step), which makes resumption exact.
class BatchSampler {
 public:
  BatchSampler(const Corpus &corpus, const TrainingConfig &config, int upsample_factor);
  TrainingBatch batch(std::int64_t step) const;

 private:
  std::size_t pick(const std::vector<Utterance> &items, std::uint64_t tag, std::int64_t position) const;

  const Corpus &corpus_;
  TrainingConfig config_;
  int factor_;
};

// Feature frames usable with a factor-aligned mel: min(T_s, T_m / factor).
Eigen::Index aligned_length(const Utterance &u, int upsample_factor);

class Trainer {
 public:
  Trainer(const ModelConfig &model, const TrainingConfig &config);

  // One discriminator update on detached generator outputs, then one
  // generator update scored by the updated discriminators.
  LossReport train_step(const TrainingBatch &batch, std::int64_t step);

  // Mean reconstruction loss over full-length utterances in eval mode.
  double validation_loss(const std::vector<Utterance> &items);

  // Sets the mel projection bias to the per-bin mean of the target mels.
  void init_mel_bias(const std::vector<Utterance> &target);

  void save(const std::filesystem::path &blob, std::int64_t step);
  // Restores weights and optimizer state; returns the stored step.
  std::int64_t load(const std::filesystem::path &blob);

  Models<float> &models() { return models_; }
  const ModelConfig &model_config() const { return model_config_; }
  const TrainingConfig &config() const { return config_; }

 private:
  LossReport step_impl(const TrainingBatch &batch, std::int64_t step);

  ModelConfig model_config_;
  TrainingConfig config_;
  Models<float> models_;
  Adam<float> opt_g_;
  Adam<float> opt_d_;
};

struct RunOptions {
  std::filesystem::path output_dir;  // empty: no checkpoints or log files
  std::optional<std::filesystem::path> resume;
  std::function<void(std::int64_t, const LossReport &)> on_step;
};

struct RunResult {
  std::int64_t final_step = 0;
  std::vector<LossReport> reports;  // one per executed step
  std::vector<std::pair<std::int64_t, double>> validation;
  std::filesystem::path last_checkpoint;
};

// Full loop: optional resume, checkpoints every checkpoint_every steps and
// at the end, validation every validate_every steps (and at the start),
// JSON-lines log at output_dir/train_log.jsonl. A non-finite loss writes
// output_dir/nonfinite_step_<k>.json with the batch ids and rethrows.
RunResult run_training(Trainer &trainer, const Corpus &corpus, const RunOptions &options);

}  // namespace sslvc

#endif  // SSLVC_TRAINING_HPP
