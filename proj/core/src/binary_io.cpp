// Copyright 2026 The mimoadv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mimoadv/binary_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>

#include "mimoadv/errors.hpp"

namespace mimoadv {
namespace {

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

}  // namespace

void BinaryWriter::magic(std::string_view tag) { out_.write(tag.data(), static_cast<std::streamsize>(tag.size())); }

void BinaryWriter::u32(std::uint32_t v) {
  v = to_little(v);
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void BinaryWriter::u64(std::uint64_t v) {
  v = to_little(v);
  out_.write(reinterpret_cast<const char*>(&v), sizeof v);
}

void BinaryWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void BinaryWriter::f64s(std::span<const double> values) {
  if constexpr (std::endian::native == std::endian::little) {
    out_.write(reinterpret_cast<const char*>(values.data()),
               static_cast<std::streamsize>(values.size_bytes()));
  } else {
    for (double v : values) f64(v);
  }
}

void BinaryReader::read_raw(char* dst, std::size_t n) {
  in_.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) {
    throw FormatError(what_ + ": truncated file");
  }
}

void BinaryReader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  read_raw(got.data(), got.size());
  if (got != tag) throw FormatError(what_ + ": bad magic (not a " + std::string(tag) + " file)");
}

std::uint32_t BinaryReader::u32() {
  std::uint32_t v = 0;
  read_raw(reinterpret_cast<char*>(&v), sizeof v);
  return to_little(v);
}

std::uint64_t BinaryReader::u64() {
  std::uint64_t v = 0;
  read_raw(reinterpret_cast<char*>(&v), sizeof v);
  return to_little(v);
}

double BinaryReader::f64() { return std::bit_cast<double>(u64()); }

void BinaryReader::f64s(std::span<double> out) {
  if constexpr (std::endian::native == std::endian::little) {
    read_raw(reinterpret_cast<char*>(out.data()), out.size_bytes());
  } else {
    for (double& v : out) v = f64();
  }
}

std::vector<double> BinaryReader::f64s(std::size_t count) {
  std::vector<double> out(count);
  f64s(std::span<double>(out));
  return out;
}

void BinaryReader::expect_end() {
  if (in_.peek() != std::char_traits<char>::eof()) {
    throw FormatError(what_ + ": trailing bytes after payload");
  }
}

}  // namespace mimoadv
