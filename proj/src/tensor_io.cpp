/* Copyright 2026 The DTM Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "dtm/tensor_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

namespace dtm {
namespace {

template <typename U>
void put_le(std::string& out, U value) {
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
  }
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename U>
  U get_le(const char* what) {
    if (bytes_.size() - pos_ < sizeof(U)) {
      throw Error(ErrorCode::TruncatedPayload,
                  std::string("file ends inside ") + what);
    }
    U value = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) {
      value |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i]))
               << (8 * i);
    }
    pos_ += sizeof(U);
    return value;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t pos() const { return pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_tensor(const TokenMatrix& t) {
  std::string out(kTensorMagic, sizeof(kTensorMagic));
  put_le<std::uint32_t>(out, kTensorVersion);
  put_le<std::uint32_t>(out, kDtypeF32);
  put_le<std::uint32_t>(out, 2);
  put_le<std::uint64_t>(out, t.rows());
  put_le<std::uint64_t>(out, t.cols());
  out.reserve(out.size() + t.size() * 4);
  for (float v : t.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

TokenMatrix decode_tensor(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kTensorMagic, 4) != 0) {
    throw Error(ErrorCode::BadMagic, "not a DTMT tensor file");
  }
  Reader in(bytes);
  in.get_le<std::uint32_t>("magic");
  const auto version = in.get_le<std::uint32_t>("version");
  if (version != kTensorVersion) {
    throw Error(ErrorCode::BadVersion,
                "unsupported tensor version " + std::to_string(version));
  }
  const auto dtype = in.get_le<std::uint32_t>("dtype");
  if (dtype != kDtypeF32) {
    throw Error(ErrorCode::UnsupportedDtype,
                "unsupported dtype " + std::to_string(dtype));
  }
  const auto ndim = in.get_le<std::uint32_t>("ndim");
  if (ndim != 1 && ndim != 2) {
    throw Error(ErrorCode::UnsupportedRank,
                "expected rank 1 or 2, got " + std::to_string(ndim));
  }
  std::uint64_t dims[2] = {1, 0};
  for (std::uint32_t i = 0; i < ndim; ++i) {
    dims[2 - ndim + i] = in.get_le<std::uint64_t>("dims");
  }
  const std::uint64_t count = dims[0] * dims[1];
  if (dims[1] != 0 && count / dims[1] != dims[0]) {
    throw Error(ErrorCode::TruncatedPayload, "dimension product overflows");
  }
  if (in.remaining() / 4 < count) {
    throw Error(ErrorCode::TruncatedPayload,
                "payload holds " + std::to_string(in.remaining() / 4) +
                    " values, header claims " + std::to_string(count));
  }
  if (in.remaining() != count * 4) {
    throw Error(ErrorCode::TrailingData,
                std::to_string(in.remaining() - count * 4) +
                    " bytes after payload");
  }
  std::vector<float> values(count);
  for (auto& v : values) {
    v = std::bit_cast<float>(in.get_le<std::uint32_t>("payload"));
  }
  TokenMatrix t(dims[0], dims[1], std::move(values));
  validate_token_matrix(t).throw_if_error();
  return t;
}

TokenMatrix read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::IoError, "cannot read " + path.string());
  return decode_tensor(bytes);
}

void write_tensor(const std::filesystem::path& path, const TokenMatrix& t) {
  const std::string bytes = encode_tensor(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
}

}  // namespace dtm
