// Tensor container: bit-exact round trips and format errors.

#include <filesystem>
#include <random>

#include "doctest.h"
#include "sslvc/errors.hpp"
#include "sslvc/tensor_io.hpp"

using namespace sslvc;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string &name) {
  auto dir = fs::temp_directory_path() / "sslvc_test_tensor_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("zero matrix round trips") {
  MatrixF zeros = MatrixF::Zero(2, 3);
  auto path = temp_path("zeros.vctf");
  write_matrix(path, zeros);
  CHECK(fs::file_size(path) == 4 + 4 + 1 + 4 + 2 * 8 + 6 * 4);
  MatrixF back = read_matrix(path);
  CHECK(back.rows() == 2);
  CHECK(back.cols() == 3);
  CHECK(back == zeros);
}

TEST_CASE("payload of [3.5] is 00 00 60 40") {
  // 3.5 = 1.75 * 2^1: sign 0, biased exponent 128, mantissa .11 -> 0x40600000.
  TensorFile t{{1}, {3.5f}};
  auto bytes = encode_tensor(t);
  REQUIRE(bytes.size() == 4 + 4 + 1 + 4 + 8 + 4);
  std::vector<std::uint8_t> payload(bytes.end() - 4, bytes.end());
  CHECK(payload == std::vector<std::uint8_t>{0x00, 0x00, 0x60, 0x40});
  std::vector<std::uint8_t> header(bytes.begin(), bytes.begin() + 13);
  CHECK(header == std::vector<std::uint8_t>{'V', 'C', 'T', 'F', 1, 0, 0, 0, 0, 1, 0, 0, 0});
}

TEST_CASE("header claiming 4 elements with 3 in the payload is rejected") {
  TensorFile t{{4}, {1, 2, 3, 4}};
  auto bytes = encode_tensor(t);
  bytes.resize(bytes.size() - 4);
  CHECK_THROWS_AS(decode_tensor(bytes), FormatError);
}

TEST_CASE("bad magic and dtype are format errors") {
  TensorFile t{{2}, {1, 2}};
  auto bytes = encode_tensor(t);
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_tensor(bad_magic), FormatError);
  auto bad_dtype = bytes;
  bad_dtype[8] = 7;
  CHECK_THROWS_AS(decode_tensor(bad_dtype), FormatError);
  CHECK_THROWS_AS(decode_tensor(std::vector<std::uint8_t>{'V', 'C'}), FormatError);
}

TEST_CASE("shape must have one to four dimensions") {
  CHECK_THROWS_AS(encode_tensor(TensorFile{{}, {}}), FormatError);
  CHECK_THROWS_AS(encode_tensor(TensorFile{{1, 1, 1, 1, 1}, {0.0f}}), FormatError);
}

TEST_CASE("non-finite values are not written") {
  MatrixF m = MatrixF::Zero(1, 2);
  m(0, 1) = std::numeric_limits<float>::quiet_NaN();
  CHECK_THROWS_AS(write_matrix(temp_path("nan.vctf"), m), DomainError);
}

TEST_CASE("property: random shapes and values round trip bit-exactly") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> ndim(1, 4), dim(0, 6);
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int trial = 0; trial < 200; ++trial) {
    TensorFile t;
    const int nd = ndim(rng);
    for (int i = 0; i < nd; ++i) t.shape.push_back(static_cast<std::uint64_t>(dim(rng)));
    t.data.resize(t.element_count());
    for (auto &v : t.data) {
      // Random finite bit patterns, including subnormals and negative zero.
      do {
        v = std::bit_cast<float>(bits(rng));
      } while (!std::isfinite(v));
    }
    auto path = temp_path("prop.vctf");
    write_tensor(path, t);
    auto back = read_tensor(path);
    REQUIRE(back.shape == t.shape);
    REQUIRE(back.data.size() == t.data.size());
    for (std::size_t i = 0; i < t.data.size(); ++i)
      REQUIRE(std::bit_cast<std::uint32_t>(back.data[i]) == std::bit_cast<std::uint32_t>(t.data[i]));
  }
}
