// Copyright 2026 The lrevent Authors. All Rights Reserved.
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

// Little-endian primitives shared by the binary containers.

#ifndef LREVENT_SRC_BINARY_IO_HPP_
#define LREVENT_SRC_BINARY_IO_HPP_

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "lrevent/error.hpp"

namespace lrevent::detail {

inline void PutU64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> buf;
  for (int k = 0; k < 8; ++k) buf[k] = static_cast<char>((v >> (8 * k)) & 0xffu);
  out.write(buf.data(), buf.size());
}

inline void PutF64(std::ostream& out, double v) { PutU64(out, std::bit_cast<std::uint64_t>(v)); }

inline void PutU8(std::ostream& out, std::uint8_t v) { out.put(static_cast<char>(v)); }

inline void ReadExact(std::istream& in, char* dst, std::size_t n) {
  in.read(dst, static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n) Fail(ErrorCode::kFormat, "truncated binary container");
}

inline std::uint64_t GetU64(std::istream& in) {
  std::array<unsigned char, 8> buf;
  ReadExact(in, reinterpret_cast<char*>(buf.data()), buf.size());
  std::uint64_t v = 0;
  for (int k = 0; k < 8; ++k) v |= static_cast<std::uint64_t>(buf[k]) << (8 * k);
  return v;
}

inline double GetF64(std::istream& in) { return std::bit_cast<double>(GetU64(in)); }

inline std::uint8_t GetU8(std::istream& in) {
  char c = 0;
  ReadExact(in, &c, 1);
  return static_cast<std::uint8_t>(c);
}

inline void PutMagic(std::ostream& out, std::string_view magic) {
  out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

inline void ExpectMagic(std::istream& in, std::string_view magic) {
  std::string got(magic.size(), '\0');
  ReadExact(in, got.data(), got.size());
  if (got != magic) Fail(ErrorCode::kFormat, "bad magic: expected " + std::string(magic));
}

}  // namespace lrevent::detail

#endif  // LREVENT_SRC_BINARY_IO_HPP_
