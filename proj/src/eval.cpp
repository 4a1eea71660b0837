// sslvc/eval.cpp

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

#include "sslvc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <set>

#include "sslvc/loader.hpp"
#include "sslvc/ssl_frontend.hpp"
#include "sslvc/tensor_io.hpp"

namespace sslvc {

namespace fs = std::filesystem;

MatrixD mel_cepstrum(const MatrixF &log_mel, int order) {
  const Eigen::Index n = log_mel.cols();
  if (order < 1 || order >= n) throw ParameterError("cepstral order must be in [1, n_mels)");
  MatrixD basis(n, order);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int k = 1; k <= order; ++k)
      basis(i, k - 1) = std::sqrt(2.0 / static_cast<double>(n)) *
                        std::cos(std::numbers::pi * k * (static_cast<double>(i) + 0.5) / static_cast<double>(n));
  return log_mel.cast<double>() * basis;
}

std::vector<std::pair<Eigen::Index, Eigen::Index>> dtw_path(const MatrixD &a, const MatrixD &b) {
  const Eigen::Index n = a.rows(), m = b.rows();
  if (n == 0 || m == 0) throw InputError("dtw: empty sequence");
  if (a.cols() != b.cols()) throw ShapeError("dtw: feature dims differ");
  const double inf = std::numeric_limits<double>::infinity();
  MatrixD acc = MatrixD::Constant(n, m, inf);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double d = (a.row(i) - b.row(j)).norm();
      double best = 0.0;
      if (i > 0 || j > 0) {
        best = inf;
        if (i > 0 && j > 0) best = acc(i - 1, j - 1);
        if (i > 0) best = std::min(best, acc(i - 1, j));
        if (j > 0) best = std::min(best, acc(i, j - 1));
      }
      acc(i, j) = d + best;
    }
  }
  std::vector<std::pair<Eigen::Index, Eigen::Index>> path;
  Eigen::Index i = n - 1, j = m - 1;
  path.emplace_back(i, j);
  while (i > 0 || j > 0) {
    if (i == 0) {
      --j;
    } else if (j == 0) {
      --i;
    } else {
      const double diag = acc(i - 1, j - 1), up = acc(i - 1, j), left = acc(i, j - 1);
      if (diag <= up && diag <= left) {
        --i;
        --j;
      } else if (up < left) {
        --i;
      } else {
        --j;
      }
    }
    path.emplace_back(i, j);
  }
  std::reverse(path.begin(), path.end());
  return path;
}

double mcd_cepstra(const MatrixD &a, const MatrixD &b) {
  const auto path = dtw_path(a, b);
  const double k = 10.0 / std::numbers::ln10;
  double sum = 0.0;
  for (const auto &[i, j] : path) sum += k * std::sqrt(2.0 * (a.row(i) - b.row(j)).squaredNorm());
  return sum / static_cast<double>(path.size());
}

double mcd(const Waveform &converted, const Waveform &target, const MelConfig &mel) {
  for (const auto *w : {&converted, &target}) {
    if (w->sample_rate != mel.sample_rate)
      throw InputError("mcd: expected " + std::to_string(mel.sample_rate) + " Hz audio, got " +
                       std::to_string(w->sample_rate));
    if (static_cast<int>(w->samples.size()) < mel.win_length)
      throw InputError("mcd: input shorter than one analysis frame (" + std::to_string(w->samples.size()) +
                       " samples)");
  }
  return mcd_cepstra(mel_cepstrum(extract_mel(converted, mel).frames), mel_cepstrum(extract_mel(target, mel).frames));
}

Eigen::VectorXd min_max(const Eigen::VectorXd &x, bool *degenerate) {
  if (degenerate) *degenerate = false;
  if (x.size() == 0) return x;
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  if (!(hi > lo)) {
    if (degenerate) *degenerate = true;
    return Eigen::VectorXd::Zero(x.size());
  }
  return (x.array() - lo) / (hi - lo);
}

ProsodyRmse prosody_rmse(const ProsodyTrack &source, const ProsodyTrack &converted) {
  ProsodyRmse out;
  const Eigen::Index n = std::min(source.size(), converted.size());
  if (n == 0) throw InputError("prosody_rmse: empty track");

  bool degenerate = false;
  const Eigen::VectorXd ea = min_max(source.energy.head(n).cast<double>(), &degenerate);
  if (degenerate) out.warnings.push_back("source energy is constant; normalized to zeros");
  const Eigen::VectorXd eb = min_max(converted.energy.head(n).cast<double>(), &degenerate);
  if (degenerate) out.warnings.push_back("converted energy is constant; normalized to zeros");
  out.energy_rmse = std::sqrt((ea - eb).squaredNorm() / static_cast<double>(n));

  // F0 over each track's own voiced frames, then mutually voiced ones.
  auto voiced_norm = [&](const ProsodyTrack &t, const char *name) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < n; ++i)
      if (t.voiced[static_cast<std::size_t>(i)]) idx.push_back(i);
    Eigen::VectorXd v(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) v(static_cast<Eigen::Index>(k)) = t.f0_hz(idx[k]);
    bool deg = false;
    v = min_max(v, &deg);
    if (deg && v.size() > 0) out.warnings.push_back(std::string(name) + " F0 is constant; normalized to zeros");
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) full(idx[k]) = v(static_cast<Eigen::Index>(k));
    return full;
  };
  const Eigen::VectorXd fa = voiced_norm(source, "source"), fb = voiced_norm(converted, "converted");
  double sum = 0.0;
  std::size_t count = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (source.voiced[static_cast<std::size_t>(i)] && converted.voiced[static_cast<std::size_t>(i)]) {
      sum += (fa(i) - fb(i)) * (fa(i) - fb(i));
      ++count;
    }
  }
  if (count > 0) {
    out.f0_rmse = std::sqrt(sum / static_cast<double>(count));
  } else {
    out.warnings.push_back("no frame is voiced in both tracks; F0 RMSE skipped");
  }
  return out;
}

namespace {

EmbedderKind parse_embedder_kind(const std::string &s) {
  if (s == "fallback_stats") return EmbedderKind::kFallbackStats;
  if (s == "external_command") return EmbedderKind::kExternalCommand;
  throw ConfigError("unknown speaker embedder '" + s + "' (expected fallback_stats or external_command)");
}

}  // namespace

void to_json(nlohmann::json &j, const SpeakerEmbedderSpec &s) {
  j = {{"kind", s.kind == EmbedderKind::kFallbackStats ? "fallback_stats" : "external_command"}, {"dim", s.dim}};
  if (s.kind == EmbedderKind::kExternalCommand) j["command_template"] = s.command_template;
}

void from_json(const nlohmann::json &j, SpeakerEmbedderSpec &s) {
  if (j.contains("kind")) s.kind = parse_embedder_kind(j.at("kind").get<std::string>());
  s.command_template = j.value("command_template", s.command_template);
  s.dim = j.value("dim", s.dim);
  if (s.kind == EmbedderKind::kExternalCommand &&
      (s.command_template.find("{input_wav}") == std::string::npos ||
       s.command_template.find("{output_tensor}") == std::string::npos))
    throw ConfigError("embedder command_template must contain {input_wav} and {output_tensor}");
}

Eigen::VectorXd fallback_embedding(const MatrixF &log_mel) {
  if (log_mel.rows() == 0) throw InputError("fallback embedding: empty mel");
  const MatrixD m = log_mel.cast<double>();
  const Eigen::RowVectorXd mean = m.colwise().mean();
  const Eigen::RowVectorXd sd = ((m.rowwise() - mean).array().square().colwise().mean()).sqrt();
  Eigen::VectorXd out(2 * m.cols());
  out << mean.transpose(), sd.transpose();
  return out;
}

Eigen::VectorXd speaker_embedding(const SpeakerEmbedderSpec &spec, const fs::path &wav, const MelConfig &mel) {
  if (spec.kind == EmbedderKind::kFallbackStats) return fallback_embedding(extract_mel(read_wav(wav), mel).frames);
  const fs::path out = fs::temp_directory_path() / ("sslvc_emb_" + std::to_string(std::hash<std::string>{}(wav.string())) +
                                                   "_" + std::to_string(reinterpret_cast<std::uintptr_t>(&spec)) + ".vctf");
  run_command(fill_command(spec.command_template, {{"input_wav", wav.string()}, {"output_tensor", out.string()}}),
              true);
  TensorFile t;
  try {
    t = read_tensor(out);
  } catch (const Error &e) {
    throw EvalError("speaker embedder output for " + wav.string() + ": " + e.what());
  }
  std::error_code ec;
  fs::remove(out, ec);
  if (t.shape.size() > 2 || (t.shape.size() == 2 && t.shape[0] != 1))
    throw EvalError("speaker embedder must write a vector, got a tensor of rank " + std::to_string(t.shape.size()));
  Eigen::VectorXd v(static_cast<Eigen::Index>(t.data.size()));
  for (std::size_t i = 0; i < t.data.size(); ++i) v(static_cast<Eigen::Index>(i)) = t.data[i];
  if (spec.dim > 0 && v.size() != spec.dim)
    throw EvalError("speaker embedder wrote dim " + std::to_string(v.size()) + ", expected " + std::to_string(spec.dim));
  return v;
}

double cosine_similarity(const Eigen::VectorXd &a, const Eigen::VectorXd &b) {
  if (a.size() != b.size()) throw ShapeError("cosine_similarity: sizes differ");
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("cosine_similarity: zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

namespace {

MatrixD squared_distances(const MatrixD &x) {
  const Eigen::VectorXd sq = x.rowwise().squaredNorm();
  MatrixD d = (-2.0 * x * x.transpose()).colwise() + sq;
  d.rowwise() += sq.transpose();
  return d.cwiseMax(0.0);
}

// Row-conditional affinities with per-row precision found by bisection.
MatrixD conditional_p(const MatrixD &d2, double perplexity) {
  const Eigen::Index n = d2.rows();
  const double target = std::log(perplexity);
  MatrixD p = MatrixD::Zero(n, n);
  Eigen::VectorXd row(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double beta = 1.0, lo = -1.0, hi = -1.0;
    for (int it = 0; it < 100; ++it) {
      double sum = 0.0, dot = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        row(j) = j == i ? 0.0 : std::exp(-d2(i, j) * beta);
        sum += row(j);
        dot += row(j) * d2(i, j);
      }
      sum = std::max(sum, 1e-300);
      const double entropy = std::log(sum) + beta * dot / sum;
      if (std::abs(entropy - target) < 1e-5) break;
      if (entropy > target) {
        lo = beta;
        beta = hi < 0 ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = lo < 0 ? beta / 2.0 : 0.5 * (beta + lo);
      }
    }
    p.row(i) = row.transpose() / std::max(row.sum(), 1e-300);
  }
  return p;
}

}  // namespace

MatrixD tsne(const MatrixD &points, const TsneConfig &config) {
  const Eigen::Index n = points.rows();
  if (!(config.perplexity > 0.0)) throw ParameterError("t-SNE perplexity must be > 0");
  if (static_cast<double>(n) < 3.0 * config.perplexity)
    throw ParameterError("t-SNE needs at least 3 * perplexity points (" + std::to_string(n) + " < " +
                         std::to_string(3.0 * config.perplexity) + ")");
  // Distances are scaled so the bisection starts in a sane range.
  MatrixD d2 = squared_distances(points);
  const double scale = d2.maxCoeff();
  if (scale > 0.0) d2 /= scale;
  MatrixD p = conditional_p(d2, config.perplexity);
  p = p + p.transpose();
  p /= p.sum();
  p = p.cwiseMax(1e-12);

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1e-4);
  MatrixD y(n, 2);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = normal(rng);
  MatrixD step = MatrixD::Zero(n, 2), gains = MatrixD::Ones(n, 2);

  for (int it = 0; it < config.iterations; ++it) {
    const double exaggeration = it < config.exaggeration_iterations ? config.early_exaggeration : 1.0;
    const double momentum = it < 250 ? 0.5 : 0.8;
    MatrixD num = (1.0 + squared_distances(y).array()).inverse().matrix();
    num.diagonal().setZero();
    const MatrixD q = (num / num.sum()).cwiseMax(1e-12);
    const MatrixD w = ((exaggeration * p - q).array() * num.array()).matrix();
    const MatrixD grad = 4.0 * (w.rowwise().sum().asDiagonal() * y - w * y);
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      double &g = gains.data()[i];
      g = (grad.data()[i] > 0) != (step.data()[i] > 0) ? g + 0.2 : g * 0.8;
      g = std::max(g, 0.01);
      step.data()[i] = momentum * step.data()[i] - config.learning_rate * g * grad.data()[i];
    }
    y += step;
    y.rowwise() -= y.colwise().mean();
  }
  return y;
}

std::vector<int> kmeans(const MatrixD &points, int k, std::uint64_t seed, int iterations) {
  const Eigen::Index n = points.rows();
  if (k < 1 || k > n) throw ParameterError("kmeans: k must be in [1, n]");
  std::mt19937_64 rng(seed);
  MatrixD centers(k, points.cols());
  centers.row(0) = points.row(std::uniform_int_distribution<Eigen::Index>(0, n - 1)(rng));
  Eigen::VectorXd dist = Eigen::VectorXd::Constant(n, std::numeric_limits<double>::infinity());
  for (int c = 1; c < k; ++c) {
    for (Eigen::Index i = 0; i < n; ++i) dist(i) = std::min(dist(i), (points.row(i) - centers.row(c - 1)).squaredNorm());
    std::discrete_distribution<Eigen::Index> pick(dist.data(), dist.data() + n);
    centers.row(c) = points.row(dist.sum() > 0 ? pick(rng) : 0);
  }
  std::vector<int> labels(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < iterations; ++it) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best;
      (centers.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (labels[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }
    if (!changed) break;
    MatrixD sums = MatrixD::Zero(k, points.cols());
    Eigen::VectorXd counts = Eigen::VectorXd::Zero(k);
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
      counts(labels[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int c = 0; c < k; ++c)
      if (counts(c) > 0) centers.row(c) = sums.row(c) / counts(c);
  }
  return labels;
}

double silhouette(const MatrixD &points, const std::vector<int> &labels) {
  const Eigen::Index n = points.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n) throw ShapeError("silhouette: one label per point");
  std::map<int, int> index;
  for (int l : labels) index.emplace(l, 0);
  if (index.size() < 2) throw ParameterError("silhouette needs at least two clusters");
  int next = 0;
  for (auto &[l, i] : index) i = next++;
  const MatrixD d = squared_distances(points).cwiseSqrt();
  std::vector<double> size(index.size(), 0.0);
  for (int l : labels) size[static_cast<std::size_t>(index[l])] += 1.0;
  double total = 0.0;
  std::vector<double> sums(index.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) sums[static_cast<std::size_t>(index[labels[static_cast<std::size_t>(j)]])] += d(i, j);
    const auto own = static_cast<std::size_t>(index[labels[static_cast<std::size_t>(i)]]);
    if (size[own] < 2) continue;  // singleton scores 0
    const double a = sums[own] / (size[own] - 1.0);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c)
      if (c != own) b = std::min(b, sums[c] / size[c]);
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

MatrixD correlation_summary(const MatrixD &embedding) {
  const Eigen::Index t = embedding.rows(), h = embedding.cols();
  if (t < 1 || h < 2) throw ShapeError("correlation_summary: need at least one frame and two channels");
  const MatrixD c = embedding.transpose() * embedding / static_cast<double>(t);
  MatrixD out(1, h * (h - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < h; ++i)
    for (Eigen::Index j = i + 1; j < h; ++j) out(0, k++) = c(i, j);
  return out;
}

void ProbeSet::append(const MatrixD &frames, int speaker, int group) {
  if (points.size() > 0 && frames.cols() != points.cols()) throw ShapeError("probe set: embedding dims differ");
  MatrixD grown(points.rows() + frames.rows(), frames.cols());
  if (points.rows() > 0) grown.topRows(points.rows()) = points;
  grown.bottomRows(frames.rows()) = frames;
  points = std::move(grown);
  speakers.insert(speakers.end(), static_cast<std::size_t>(frames.rows()), speaker);
  groups.insert(groups.end(), static_cast<std::size_t>(frames.rows()), group);
}

ProbeResult speaker_probe(const ProbeSet &data, const ProbeConfig &config) {
  const Eigen::Index n = data.points.rows();
  if (static_cast<Eigen::Index>(data.speakers.size()) != n || static_cast<Eigen::Index>(data.groups.size()) != n)
    throw ShapeError("speaker_probe: one speaker and group per point");
  std::map<int, std::set<int>> groups_of;
  for (Eigen::Index i = 0; i < n; ++i)
    groups_of[data.speakers[static_cast<std::size_t>(i)]].insert(data.groups[static_cast<std::size_t>(i)]);
  if (groups_of.size() < 2) throw ParameterError("speaker_probe needs at least two speakers");

  std::mt19937_64 rng(config.seed);
  std::set<int> test_groups;
  std::map<int, int> class_of;
  for (auto &[speaker, groups] : groups_of) {
    if (groups.size() < 2)
      throw ParameterError("speaker_probe: speaker " + std::to_string(speaker) + " has fewer than two utterances");
    const int cls = static_cast<int>(class_of.size());
    class_of[speaker] = cls;
    std::vector<int> g(groups.begin(), groups.end());
    std::shuffle(g.begin(), g.end(), rng);
    auto n_test = static_cast<std::size_t>(std::lround(config.test_fraction * static_cast<double>(g.size())));
    n_test = std::clamp<std::size_t>(n_test, 1, g.size() - 1);
    test_groups.insert(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(n_test));
  }
  std::vector<Eigen::Index> train, test;
  for (Eigen::Index i = 0; i < n; ++i)
    (test_groups.count(data.groups[static_cast<std::size_t>(i)]) ? test : train).push_back(i);

  const int k = static_cast<int>(class_of.size());
  const Eigen::Index d = data.points.cols();
  auto gather = [&](const std::vector<Eigen::Index> &rows, MatrixD &x, std::vector<int> &y) {
    x.resize(static_cast<Eigen::Index>(rows.size()), d);
    y.clear();
    for (std::size_t r = 0; r < rows.size(); ++r) {
      x.row(static_cast<Eigen::Index>(r)) = data.points.row(rows[r]);
      y.push_back(class_of[data.speakers[static_cast<std::size_t>(rows[r])]]);
    }
  };
  MatrixD xtr, xte;
  std::vector<int> ytr, yte;
  gather(train, xtr, ytr);
  gather(test, xte, yte);
  const Eigen::RowVectorXd mean = xtr.colwise().mean();
  const Eigen::RowVectorXd sd =
      ((xtr.rowwise() - mean).array().square().colwise().mean()).sqrt().max(1e-8).matrix();
  auto standardize = [&](MatrixD &x) { x = ((x.rowwise() - mean).array().rowwise() / sd.array()).matrix(); };
  standardize(xtr);
  standardize(xte);

  MatrixD onehot = MatrixD::Zero(xtr.rows(), k);
  for (std::size_t i = 0; i < ytr.size(); ++i) onehot(static_cast<Eigen::Index>(i), ytr[i]) = 1.0;
  MatrixD w = MatrixD::Zero(d, k);
  Eigen::RowVectorXd b = Eigen::RowVectorXd::Zero(k);
  auto softmax = [](MatrixD z) {
    z.colwise() -= z.rowwise().maxCoeff();
    z = z.array().exp().matrix();
    z.array().colwise() /= z.rowwise().sum().array();
    return z;
  };
  const double inv_n = 1.0 / static_cast<double>(xtr.rows());
  for (int it = 0; it < config.iterations; ++it) {
    const MatrixD delta = (softmax((xtr * w).rowwise() + b) - onehot) * inv_n;
    w -= config.learning_rate * (xtr.transpose() * delta + config.l2 * w);
    b -= config.learning_rate * delta.colwise().sum();
  }
  const MatrixD scores = (xte * w).rowwise() + b;
  std::size_t correct = 0;
  for (Eigen::Index i = 0; i < scores.rows(); ++i) {
    Eigen::Index best;
    scores.row(i).maxCoeff(&best);
    if (static_cast<int>(best) == yte[static_cast<std::size_t>(i)]) ++correct;
  }
  ProbeResult r;
  r.accuracy = static_cast<double>(correct) / static_cast<double>(yte.size());
  r.chance = 1.0 / static_cast<double>(k);
  r.train_points = train.size();
  r.test_points = test.size();
  return r;
}

TsneProbeResult tsne_probe(const ProbeSet &data, const TsneConfig &config) {
  const std::set<int> speakers(data.speakers.begin(), data.speakers.end());
  if (speakers.size() < 2) throw ParameterError("t-SNE probe needs at least two speakers");
  if (data.points.rows() < 50) throw ParameterError("t-SNE probe needs at least 50 points");
  TsneProbeResult r;
  r.coordinates = tsne(data.points, config);
  r.speaker_silhouette = silhouette(r.coordinates, data.speakers);
  return r;
}

ProbeSet subsample(const ProbeSet &data, int max_rows_per_group) {
  if (max_rows_per_group < 1) throw ParameterError("subsample: max_rows_per_group must be >= 1");
  std::map<int, std::vector<Eigen::Index>> rows;
  for (Eigen::Index i = 0; i < data.points.rows(); ++i) rows[data.groups[static_cast<std::size_t>(i)]].push_back(i);
  std::vector<Eigen::Index> keep;
  for (auto &[g, r] : rows) {
    const std::size_t m = std::min<std::size_t>(r.size(), static_cast<std::size_t>(max_rows_per_group));
    for (std::size_t k = 0; k < m; ++k) keep.push_back(r[k * r.size() / m]);
  }
  std::sort(keep.begin(), keep.end());
  ProbeSet out;
  out.points.resize(static_cast<Eigen::Index>(keep.size()), data.points.cols());
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.points.row(static_cast<Eigen::Index>(k)) = data.points.row(keep[k]);
    out.speakers.push_back(data.speakers[static_cast<std::size_t>(keep[k])]);
    out.groups.push_back(data.groups[static_cast<std::size_t>(keep[k])]);
  }
  return out;
}

std::string EvalReport::table() const {
  char buf[512];
  std::string mcd_text = mcd_db ? std::to_string(*mcd_db) : std::string("n/a (no parallel references)");
  std::snprintf(buf, sizeof buf,
                "pairs          %zu\n"
                "MCD (dB)       %s\n"
                "COS-SIM        %.4f\n"
                "F0 RMSE        %.4f\n"
                "Energy RMSE    %.4f\n",
                n_pairs, mcd_text.c_str(), cos_sim, f0_rmse, energy_rmse);
  std::string out = buf;
  for (const auto &w : warnings) out += "warning: " + w + "\n";
  return out;
}

void to_json(nlohmann::json &j, const EvalReport &r) {
  j = {{"mcd_db", r.mcd_db ? nlohmann::json(*r.mcd_db) : nlohmann::json(nullptr)},
       {"cos_sim", r.cos_sim},
       {"f0_rmse", r.f0_rmse},
       {"energy_rmse", r.energy_rmse},
       {"n_pairs", r.n_pairs},
       {"n_mcd_pairs", r.n_mcd_pairs},
       {"warnings", r.warnings}};
}

EvalReport evaluate_pairs(const std::vector<EvalPair> &pairs, const std::vector<fs::path> &target_references,
                          const SpeakerEmbedderSpec &embedder, int workers, const MelConfig &mel) {
  if (pairs.empty()) throw ParameterError("evaluate: no converted files");
  if (target_references.empty()) throw ParameterError("evaluate: no target reference audio");

  Eigen::VectorXd reference;
  for (const auto &p : target_references) {
    Eigen::VectorXd e = speaker_embedding(embedder, p, mel);
    if (!(e.norm() > 0.0)) throw EvalError("zero speaker embedding for " + p.string());
    e /= e.norm();
    if (reference.size() == 0) reference = Eigen::VectorXd::Zero(e.size());
    if (e.size() != reference.size()) throw EvalError("speaker embeddings differ in size");
    reference += e;
  }

  struct Scores {
    std::optional<double> mcd, f0;
    double cos = 0.0, energy = 0.0;
    std::vector<std::string> warnings;
  };
  std::vector<Scores> scores(pairs.size());
  parallel_load<Scores>(
      pairs.size(), static_cast<std::size_t>(std::max(1, workers)), 8,
      [&](std::size_t i) {
        const auto &p = pairs[i];
        Scores s;
        const Waveform converted = read_wav(p.converted);
        const Waveform source = read_wav(p.source);
        s.cos = cosine_similarity(speaker_embedding(embedder, p.converted, mel), reference);
        auto pr = prosody_rmse(extract_prosody(source.samples, mel), extract_prosody(converted.samples, mel));
        s.f0 = pr.f0_rmse;
        s.energy = pr.energy_rmse;
        for (auto &w : pr.warnings) s.warnings.push_back(p.converted.filename().string() + ": " + w);
        if (p.reference) s.mcd = mcd(converted, read_wav(*p.reference), mel);
        return s;
      },
      [&](std::size_t i, Scores &&s) { scores[i] = std::move(s); });

  EvalReport r;
  r.n_pairs = pairs.size();
  double mcd_sum = 0.0, f0_sum = 0.0;
  std::size_t f0_count = 0;
  for (const auto &s : scores) {
    r.cos_sim += s.cos;
    r.energy_rmse += s.energy;
    if (s.f0) {
      f0_sum += *s.f0;
      ++f0_count;
    }
    if (s.mcd) {
      mcd_sum += *s.mcd;
      ++r.n_mcd_pairs;
    }
    r.warnings.insert(r.warnings.end(), s.warnings.begin(), s.warnings.end());
  }
  const auto n = static_cast<double>(pairs.size());
  r.cos_sim /= n;
  r.energy_rmse /= n;
  r.f0_rmse = f0_count ? f0_sum / static_cast<double>(f0_count) : 0.0;
  if (!f0_count) r.warnings.push_back("no pair had mutually voiced frames; F0 RMSE reported as 0");
  if (r.n_mcd_pairs) r.mcd_db = mcd_sum / static_cast<double>(r.n_mcd_pairs);
  else r.warnings.push_back("no parallel references; MCD not computed");
  return r;
}

}  // namespace sslvc
