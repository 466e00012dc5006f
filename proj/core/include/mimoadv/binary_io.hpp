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

#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mimoadv {

// Little-endian fixed-width encoding shared by every binary file format.
class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void magic(std::string_view tag);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f64(double v);
  void f64s(std::span<const double> values);

 private:
  std::ostream& out_;
};

class BinaryReader {
 public:
  // `what` names the file in error messages.
  BinaryReader(std::istream& in, std::string what) : in_(in), what_(std::move(what)) {}

  /// Throws FormatError when the next bytes differ from `tag`.
  void expect_magic(std::string_view tag);
  std::uint32_t u32();
  std::uint64_t u64();
  double f64();
  void f64s(std::span<double> out);
  std::vector<double> f64s(std::size_t count);
  /// Throws FormatError if bytes remain after the payload.
  void expect_end();

 private:
  void read_raw(char* dst, std::size_t n);

  std::istream& in_;
  std::string what_;
};

}  // namespace mimoadv
