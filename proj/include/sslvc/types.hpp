// sslvc/types.hpp

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

#ifndef SSLVC_TYPES_HPP
#define SSLVC_TYPES_HPP

#include <Eigen/Core>

namespace sslvc {

// Sequences are stored time-major: one row per frame, one column per
// channel. Row-major storage keeps a frame contiguous.
template <typename Scalar>
using Matrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixF = Matrix<float>;
using MatrixD = Matrix<double>;
using VectorF = Vector<float>;
using VectorD = Vector<double>;

// Per-utterance self-supervised representation [T_s x D].
struct FeatureSequence {
  MatrixF frames;
  double frame_rate_hz = 50.0;
};

// Natural-log amplitude mel spectrogram [T_m x n_mels].
struct MelSpectrogram {
  MatrixF frames;
  double hop_s = 0.01;
};

}  // namespace sslvc

#endif  // SSLVC_TYPES_HPP
