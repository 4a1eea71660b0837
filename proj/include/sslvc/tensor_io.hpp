// sslvc/tensor_io.hpp

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

#ifndef SSLVC_TENSOR_IO_HPP
#define SSLVC_TENSOR_IO_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sslvc/types.hpp"

namespace sslvc {

// On-disk layout (all integers little-endian):
//
//   "VCTF" | version u32 | dtype u8 | ndim u32 | dims u64[ndim] | payload
//
// The payload is row-major float32. Only dtype 0 (float32) and 1..4
// dimensions are accepted.
inline constexpr std::uint32_t kTensorVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 0;

struct TensorFile {
  std::vector<std::uint64_t> shape;
  std::vector<float> data;

  std::uint64_t element_count() const;
};

std::vector<std::uint8_t> encode_tensor(const TensorFile &tensor);
TensorFile decode_tensor(std::span<const std::uint8_t> bytes);

// Writes through a temporary file and renames it into place, so readers
// never observe a partially written tensor.
void write_tensor(const std::filesystem::path &path, const TensorFile &tensor);
TensorFile read_tensor(const std::filesystem::path &path);

// 2-D convenience wrappers. A 1-D tensor reads back as a single row.
void write_matrix(const std::filesystem::path &path, const MatrixF &matrix);
MatrixF read_matrix(const std::filesystem::path &path);

TensorFile to_tensor(const MatrixF &matrix);
MatrixF to_matrix(const TensorFile &tensor);

// Atomic whole-file write shared by every writer in the project.
void write_file_atomic(const std::filesystem::path &path,
                       std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path);

}  // namespace sslvc

#endif  // SSLVC_TENSOR_IO_HPP
