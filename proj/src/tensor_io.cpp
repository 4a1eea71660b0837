// sslvc/tensor_io.cpp

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

#include "sslvc/tensor_io.hpp"

#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>
#include <thread>

#include "sslvc/errors.hpp"

namespace sslvc {

namespace {

constexpr char kMagic[4] = {'V', 'C', 'T', 'F'};

void put_u32(std::vector<std::uint8_t> &out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t> &out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint64_t uint(int width) {
    need(width);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i)
      v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += width;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw FormatError("tensor: truncated header");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t TensorFile::element_count() const {
  std::uint64_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::vector<std::uint8_t> encode_tensor(const TensorFile &tensor) {
  if (tensor.shape.empty() || tensor.shape.size() > 4)
    throw FormatError("tensor: shape must have 1-4 dimensions");
  if (tensor.element_count() != tensor.data.size())
    throw FormatError("tensor: shape does not match element count");
  std::vector<std::uint8_t> out(kMagic, kMagic + 4);
  out.reserve(4 + 4 + 1 + 4 + 8 * tensor.shape.size() + 4 * tensor.data.size());
  put_u32(out, kTensorVersion);
  out.push_back(kDtypeFloat32);
  put_u32(out, static_cast<std::uint32_t>(tensor.shape.size()));
  for (auto d : tensor.shape) put_u64(out, d);
  for (float f : tensor.data) put_u32(out, std::bit_cast<std::uint32_t>(f));
  return out;
}

TensorFile decode_tensor(std::span<const std::uint8_t> bytes) {
  Reader in(bytes);
  auto magic = in.take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0)
    throw FormatError("tensor: bad magic");
  auto version = in.uint(4);
  if (version != kTensorVersion)
    throw FormatError("tensor: unsupported version " + std::to_string(version));
  auto dtype = in.uint(1);
  if (dtype != kDtypeFloat32)
    throw FormatError("tensor: dtype mismatch (only float32 is supported)");
  auto ndim = in.uint(4);
  if (ndim < 1 || ndim > 4)
    throw FormatError("tensor: ndim must be 1-4, got " + std::to_string(ndim));
  TensorFile t;
  for (std::uint64_t i = 0; i < ndim; ++i) t.shape.push_back(in.uint(8));
  std::uint64_t n = t.element_count();
  if (in.remaining() != n * 4)
    throw FormatError("tensor: payload holds " + std::to_string(in.remaining()) +
                      " bytes, header implies " + std::to_string(n * 4));
  t.data.resize(n);
  for (std::uint64_t i = 0; i < n; ++i)
    t.data[i] = std::bit_cast<float>(static_cast<std::uint32_t>(in.uint(4)));
  return t;
}

void write_file_atomic(const std::filesystem::path &path,
                       std::span<const std::uint8_t> bytes) {
  static std::atomic<unsigned> counter{0};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()) % 100000) +
         "_" + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot open for writing: " + tmp.string());
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw InputError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open: " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_tensor(const std::filesystem::path &path, const TensorFile &tensor) {
  for (float f : tensor.data)
    if (!std::isfinite(f)) throw DomainError("tensor: refusing to write non-finite value");
  write_file_atomic(path, encode_tensor(tensor));
}

TensorFile read_tensor(const std::filesystem::path &path) {
  auto bytes = read_file_bytes(path);
  try {
    return decode_tensor(bytes);
  } catch (const FormatError &e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

TensorFile to_tensor(const MatrixF &matrix) {
  TensorFile t;
  t.shape = {static_cast<std::uint64_t>(matrix.rows()),
             static_cast<std::uint64_t>(matrix.cols())};
  t.data.assign(matrix.data(), matrix.data() + matrix.size());
  return t;
}

MatrixF to_matrix(const TensorFile &tensor) {
  Eigen::Index rows = 1, cols = 0;
  if (tensor.shape.size() == 1) {
    cols = static_cast<Eigen::Index>(tensor.shape[0]);
  } else if (tensor.shape.size() == 2) {
    rows = static_cast<Eigen::Index>(tensor.shape[0]);
    cols = static_cast<Eigen::Index>(tensor.shape[1]);
  } else {
    throw ShapeError("tensor: expected a 1-D or 2-D tensor");
  }
  MatrixF m(rows, cols);
  std::copy(tensor.data.begin(), tensor.data.end(), m.data());
  return m;
}

void write_matrix(const std::filesystem::path &path, const MatrixF &matrix) {
  write_tensor(path, to_tensor(matrix));
}

MatrixF read_matrix(const std::filesystem::path &path) {
  return to_matrix(read_tensor(path));
}

}  // namespace sslvc
