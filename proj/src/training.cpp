// sslvc/training.cpp

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

#include "sslvc/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "sslvc/hash.hpp"
#include "sslvc/loader.hpp"
#include "sslvc/tensor_io.hpp"

namespace sslvc {

namespace fs = std::filesystem;

void TrainingConfig::validate() const {
  if (steps < 0) throw ConfigError("training.steps must be >= 0");
  if (batch_size < 1) throw ConfigError("training.batch_size must be >= 1");
  if (!(lr_g > 0.0) || !(lr_d > 0.0)) throw ConfigError("training learning rates must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw ConfigError("training betas must be in [0, 1)");
  if (warmup_steps < 0) throw ConfigError("training.warmup_steps must be >= 0");
  if (!std::isfinite(lambda_sim_after_warmup) || lambda_sim_after_warmup < 0.0)
    throw ConfigError("training.lambda_sim_after_warmup must be finite and >= 0");
  if (checkpoint_every < 0 || validate_every < 0) throw ConfigError("training cadences must be >= 0");
  if (segment_frames < 1) throw ConfigError("training.segment_frames must be >= 1");
  if (loader_workers < 1) throw ConfigError("training.loader_workers must be >= 1");
}

void to_json(nlohmann::json &j, const TrainingConfig &c) {
  j = {{"steps", c.steps},
       {"batch_size", c.batch_size},
       {"lr_g", c.lr_g},
       {"lr_d", c.lr_d},
       {"beta1", c.beta1},
       {"beta2", c.beta2},
       {"warmup_steps", c.warmup_steps},
       {"lambda_sim_after_warmup", c.lambda_sim_after_warmup},
       {"seed", c.seed},
       {"checkpoint_every", c.checkpoint_every},
       {"validate_every", c.validate_every},
       {"segment_frames", c.segment_frames},
       {"objective", to_string(c.objective)},
       {"loader_workers", c.loader_workers},
       {"reconstruction_only", c.reconstruction_only}};
}

void from_json(const nlohmann::json &j, TrainingConfig &c) {
  c.steps = j.value("steps", c.steps);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.lr_g = j.value("lr_g", c.lr_g);
  c.lr_d = j.value("lr_d", c.lr_d);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.warmup_steps = j.value("warmup_steps", c.warmup_steps);
  c.lambda_sim_after_warmup = j.value("lambda_sim_after_warmup", c.lambda_sim_after_warmup);
  c.seed = j.value("seed", c.seed);
  c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
  c.validate_every = j.value("validate_every", c.validate_every);
  c.segment_frames = j.value("segment_frames", c.segment_frames);
  if (j.contains("objective")) c.objective = parse_gan_objective(j.at("objective").get<std::string>());
  c.loader_workers = j.value("loader_workers", c.loader_workers);
  c.reconstruction_only = j.value("reconstruction_only", c.reconstruction_only);
}

double lambda_sim(const TrainingConfig &config, std::int64_t step) {
  return step < config.warmup_steps ? 0.0 : config.lambda_sim_after_warmup;
}

void preflight(const std::vector<UtteranceRecord> &records) {
  std::vector<std::string> gaps;
  auto need = [&gaps](const UtteranceRecord &r, const std::optional<fs::path> &p, const char *what) {
    if (!p) {
      gaps.push_back(r.id + ": no " + what + " path in manifest");
    } else if (!fs::exists(*p)) {
      gaps.push_back(r.id + ": missing " + what + " file " + p->string());
    }
  };
  for (const auto &r : records) {
    need(r, r.feature_path, "feature");
    if (r.corpus_tag == CorpusTag::kTarget) need(r, r.mel_path, "mel");
  }
  if (!gaps.empty()) {
    std::string msg = std::to_string(gaps.size()) + " missing input(s); run prepare first:";
    for (const auto &g : gaps) msg += "\n  " + g;
    throw PreflightError(msg);
  }
}

Corpus load_corpus(const std::vector<UtteranceRecord> &train, const std::vector<UtteranceRecord> &validation,
                   int workers) {
  std::vector<UtteranceRecord> all = train;
  all.insert(all.end(), validation.begin(), validation.end());
  preflight(all);
  std::vector<Utterance> loaded(all.size());
  parallel_load<Utterance>(
      all.size(), static_cast<std::size_t>(workers), 8,
      [&all](std::size_t i) {
        const auto &r = all[i];
        Utterance u;
        u.id = r.id;
        u.features = read_matrix(*r.feature_path);
        if (r.corpus_tag == CorpusTag::kTarget) u.mel = read_matrix(*r.mel_path);
        return u;
      },
      [&loaded](std::size_t i, Utterance &&u) { loaded[i] = std::move(u); });
  Corpus corpus;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (i >= train.size()) {
      if (all[i].corpus_tag == CorpusTag::kTarget) corpus.validation.push_back(std::move(loaded[i]));
    } else if (all[i].corpus_tag == CorpusTag::kTarget) {
      corpus.target.push_back(std::move(loaded[i]));
    } else {
      corpus.external.push_back(std::move(loaded[i]));
    }
  }
  return corpus;
}

Eigen::Index aligned_length(const Utterance &u, int upsample_factor) {
  if (u.mel.size() == 0) return u.features.rows();
  return std::min<Eigen::Index>(u.features.rows(), u.mel.rows() / upsample_factor);
}

BatchSampler::BatchSampler(const Corpus &corpus, const TrainingConfig &config, int upsample_factor)
    : corpus_(corpus), config_(config), factor_(upsample_factor) {
  if (corpus_.target.empty()) throw InputError("training needs at least one target utterance");
  if (corpus_.external.empty()) throw InputError("training needs at least one external utterance");
  for (const auto &u : corpus_.target)
    if (aligned_length(u, factor_) < 1) throw InputError("target utterance " + u.id + " is too short");
  for (const auto &u : corpus_.external)
    if (u.features.rows() < 1) throw InputError("external utterance " + u.id + " is empty");
}

std::size_t BatchSampler::pick(const std::vector<Utterance> &items, std::uint64_t tag, std::int64_t position) const {
  const auto n = static_cast<std::int64_t>(items.size());
  const std::int64_t epoch = position / n;
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(mix_seed(config_.seed, tag, static_cast<std::uint64_t>(epoch)));
  std::shuffle(order.begin(), order.end(), rng);
  return order[static_cast<std::size_t>(position % n)];
}

TrainingBatch BatchSampler::batch(std::int64_t step) const {
  TrainingBatch b;
  std::mt19937_64 crop_rng(mix_seed(config_.seed, 0xC409, static_cast<std::uint64_t>(step)));
  const Eigen::Index seg = config_.segment_frames;
  auto crop_start = [&crop_rng, seg](Eigen::Index length) -> Eigen::Index {
    if (length <= seg) return 0;
    std::uniform_int_distribution<Eigen::Index> u(0, length - seg);
    return u(crop_rng);
  };
  for (int i = 0; i < config_.batch_size; ++i) {
    const auto &u = corpus_.target[pick(corpus_.target, 0x7A6E, step * config_.batch_size + i)];
    const Eigen::Index len = aligned_length(u, factor_);
    const Eigen::Index start = crop_start(len);
    const Eigen::Index n = std::min(len, seg);
    b.target_ids.push_back(u.id);
    b.target_features.push_back(u.features.middleRows(start, n));
    b.target_mels.push_back(u.mel.middleRows(start * factor_, n * factor_));
  }
  for (int i = 0; i < config_.batch_size; ++i) {
    const auto &u = corpus_.external[pick(corpus_.external, 0xE87, step * config_.batch_size + i)];
    const Eigen::Index len = u.features.rows();
    const Eigen::Index start = crop_start(len);
    b.external_ids.push_back(u.id);
    b.external_features.push_back(u.features.middleRows(start, std::min(len, seg)));
  }
  return b;
}

Trainer::Trainer(const ModelConfig &model, const TrainingConfig &config)
    : model_config_(model), config_(config), models_(model, config.seed),
      opt_g_(models_.generator.parameters(), {config.lr_g, config.beta1, config.beta2, 1e-8}),
      opt_d_(models_.discriminator_parameters(), {config.lr_d, config.beta1, config.beta2, 1e-8}) {
  config_.validate();
}

namespace {

std::string describe_batch(const TrainingBatch &batch) {
  std::string ids;
  for (const auto &id : batch.target_ids) ids += (ids.empty() ? "" : ", ") + id;
  for (const auto &id : batch.external_ids) ids += ", " + id;
  return ids;
}

}  // namespace

LossReport Trainer::train_step(const TrainingBatch &batch, std::int64_t step) {
  try {
    return step_impl(batch, step);
  } catch (const DomainError &e) {
    // NaN scores surface here before any loss is formed.
    throw TrainingError("non-finite value at step " + std::to_string(step) + " (" + e.what() +
                        "); batch: " + describe_batch(batch));
  }
}

LossReport Trainer::step_impl(const TrainingBatch &batch, std::int64_t step) {
  const auto lambda = static_cast<float>(lambda_sim(config_, step));
  std::mt19937_64 dropout_rng(mix_seed(config_.seed, 0xD409, static_cast<std::uint64_t>(step)));
  const ForwardContext<float> ctx{true, static_cast<float>(model_config_.generator.dropout), &dropout_rng};

  ad::Tape<float> g_tape;
  g_tape.freeze(models_.discriminator_parameters());
  if (config_.reconstruction_only) {
    auto graph = run_generator(g_tape, models_.generator, batch.target_features, batch.target_mels, {}, ctx);
    std::vector<ad::Var<float>> recs;
    for (std::size_t i = 0; i < graph.y_f.size(); ++i) recs.push_back(tape_losses::loss_rec(graph.y_f[i], graph.y_g[i]));
    auto l_rec = ad::mean_of(recs);
    if (!std::isfinite(l_rec.scalar()))
      throw TrainingError("non-finite reconstruction loss at step " + std::to_string(step) +
                          "; batch: " + describe_batch(batch));
    opt_g_.zero_grad();
    g_tape.backward(l_rec);
    g_tape.flush_param_grads();
    opt_g_.step();
    LossReport r;
    r.l_rec = r.total_g = l_rec.scalar();
    r.lambda_sim = lambda;
    return r;
  }
  auto graph = run_generator(g_tape, models_.generator, batch.target_features, batch.target_mels,
                             batch.external_features, ctx);

  AdversarialTerms rf, cvt, e;
  {
    ad::Tape<float> d_tape;
    auto detached = detach(d_tape, graph);
    auto od = discriminator_objective(d_tape, models_, detached, lambda, config_.objective);
    rf.d_term = od.rf.d.scalar();
    cvt.d_term = od.cvt.d.scalar();
    e.d_term = od.e.d.scalar();
    if (!std::isfinite(od.total.scalar()))
      throw TrainingError("non-finite discriminator loss at step " + std::to_string(step) +
                          "; batch: " + describe_batch(batch));
    opt_d_.zero_grad();
    d_tape.backward(od.total);
    d_tape.flush_param_grads();
    opt_d_.step();
  }

  auto og = generator_objective(g_tape, models_, graph, lambda, config_.objective);
  rf.g_term = og.rf.g.scalar();
  cvt.g_term = og.cvt.g.scalar();
  e.g_term = og.e.g.scalar();
  if (!std::isfinite(og.total.scalar()))
    throw TrainingError("non-finite generator loss at step " + std::to_string(step) +
                        "; batch: " + describe_batch(batch));
  opt_g_.zero_grad();
  g_tape.backward(og.total);
  g_tape.flush_param_grads();
  opt_g_.step();

  return assemble(og.l_rec.scalar(), rf, cvt, e, lambda);
}

double Trainer::validation_loss(const std::vector<Utterance> &items) {
  if (items.empty()) throw InputError("validation set is empty");
  const int factor = model_config_.generator.upsample_factor;
  double total = 0.0;
  for (const auto &u : items) {
    const Eigen::Index len = aligned_length(u, factor);
    MatrixF out = models_.generator.convert(u.features.topRows(len));
    total += loss_rec(out, u.mel.topRows(len * factor));
  }
  return total / static_cast<double>(items.size());
}

void Trainer::init_mel_bias(const std::vector<Utterance> &target) {
  Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(model_config_.generator.n_mels);
  Eigen::Index frames = 0;
  for (const auto &u : target) {
    if (u.mel.cols() != sum.size()) throw ShapeError("target mel " + u.id + " has the wrong bin count");
    sum += u.mel.cast<double>().colwise().sum();
    frames += u.mel.rows();
  }
  if (frames == 0) return;
  models_.generator.mel_bias().value = (sum / static_cast<double>(frames)).cast<float>();
}

void Trainer::save(const fs::path &blob, std::int64_t step) {
  TensorMap tensors;
  export_parameters(models_.generator.parameters(), "generator/", tensors);
  export_parameters(models_.discriminator_parameters(), "discriminators/", tensors);
  auto moments = [&tensors](Adam<float> &opt, const std::string &prefix) {
    const auto &ps = opt.parameters();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      tensors[prefix + ".m/" + ps[i]->name] = opt.first_moments()[i];
      tensors[prefix + ".v/" + ps[i]->name] = opt.second_moments()[i];
    }
  };
  moments(opt_g_, "adam_g");
  moments(opt_d_, "adam_d");
  CheckpointMeta meta;
  meta.step = step;
  meta.model = model_config_;
  meta.extra = {{"adam_g_steps", opt_g_.steps()}, {"adam_d_steps", opt_d_.steps()}, {"training", config_}};
  save_checkpoint(blob, meta, tensors);
}

std::int64_t Trainer::load(const fs::path &blob) {
  const auto meta = read_checkpoint_meta(blob);
  if (meta.config_hash != config_hash(model_config_))
    throw ConfigError("checkpoint " + blob.string() + " was written for a different model config (hash " +
                      meta.config_hash + ", expected " + config_hash(model_config_) + ")");
  const auto tensors = read_weight_blob(blob);
  import_parameters(models_.generator.parameters(), "generator/", tensors);
  import_parameters(models_.discriminator_parameters(), "discriminators/", tensors);
  auto moments = [&tensors](Adam<float> &opt, const std::string &prefix) {
    const auto &ps = opt.parameters();
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto m = tensors.find(prefix + ".m/" + ps[i]->name);
      auto v = tensors.find(prefix + ".v/" + ps[i]->name);
      if (m == tensors.end() || v == tensors.end())
        throw FormatError("checkpoint is missing optimizer state for " + ps[i]->name);
      opt.first_moments()[i] = m->second;
      opt.second_moments()[i] = v->second;
    }
  };
  moments(opt_g_, "adam_g");
  moments(opt_d_, "adam_d");
  opt_g_.set_steps(meta.extra.value("adam_g_steps", std::int64_t{0}));
  opt_d_.set_steps(meta.extra.value("adam_d_steps", std::int64_t{0}));
  return meta.step;
}

RunResult run_training(Trainer &trainer, const Corpus &corpus, const RunOptions &options) {
  const auto &config = trainer.config();
  const bool files = !options.output_dir.empty();
  const fs::path ckpt_dir = options.output_dir / "checkpoints";
  if (files) fs::create_directories(ckpt_dir);

  RunResult result;
  std::int64_t start = 0;
  if (options.resume) {
    start = trainer.load(*options.resume);
    if (start > config.steps)
      throw ConfigError("checkpoint step " + std::to_string(start) + " is beyond training.steps " +
                        std::to_string(config.steps));
  } else {
    trainer.init_mel_bias(corpus.target);
  }
  BatchSampler sampler(corpus, config, trainer.model_config().generator.upsample_factor);

  std::ofstream log;
  if (files) {
    log.open(options.output_dir / "train_log.jsonl", options.resume ? std::ios::app : std::ios::trunc);
    if (!log) throw InputError("cannot write " + (options.output_dir / "train_log.jsonl").string());
  }
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&t0] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };
  auto validate = [&](std::int64_t done) {
    if (corpus.validation.empty()) return;
    const double v = trainer.validation_loss(corpus.validation);
    result.validation.emplace_back(done, v);
    if (files) log << nlohmann::json{{"step", done}, {"validation_l_rec", v}}.dump() << "\n" << std::flush;
  };
  auto checkpoint = [&](std::int64_t done) {
    if (!files) return;
    result.last_checkpoint = checkpoint_name(ckpt_dir, done);
    trainer.save(result.last_checkpoint, done);
  };

  if (!options.resume) {
    if (config.validate_every > 0) validate(0);
    checkpoint(0);
  }
  for (std::int64_t step = start; step < config.steps; ++step) {
    const auto batch = sampler.batch(step);
    LossReport report;
    try {
      report = trainer.train_step(batch, step);
    } catch (const TrainingError &) {
      if (files) {
        nlohmann::json dump = {{"step", step},
                               {"target_ids", batch.target_ids},
                               {"external_ids", batch.external_ids}};
        std::ofstream(options.output_dir / ("nonfinite_step_" + std::to_string(step) + ".json")) << dump.dump(2);
      }
      throw;
    }
    result.reports.push_back(report);
    if (files) {
      nlohmann::json line = report;
      line["step"] = step;
      line["wall_time_s"] = elapsed();
      log << line.dump() << "\n" << std::flush;
    }
    if (options.on_step) options.on_step(step, report);
    const std::int64_t done = step + 1;
    if (config.validate_every > 0 && done % config.validate_every == 0) validate(done);
    if ((config.checkpoint_every > 0 && done % config.checkpoint_every == 0) || done == config.steps)
      checkpoint(done);
  }
  result.final_step = std::max(start, config.steps);
  return result;
}

}  // namespace sslvc
