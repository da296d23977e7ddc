// include/avfusion/core/matrix_io.hpp

// Copyright 2026  The avfusion Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

// AVPF: the portable matrix container used for every numeric artifact.
//
//   offset 0   "AVPF"            4-byte magic
//   offset 4   u32 version (=1)  little endian
//   offset 8   u32 rows
//   offset 12  u32 cols
//   offset 16  rows*cols IEEE-754 binary32, row-major, little endian

#include <Eigen/Dense>

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

#include "avfusion/core/error.hpp"
#include "avfusion/core/types.hpp"

namespace avf::io {

using FloatMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::array<char, 4> kAvpfMagic = {'A', 'V', 'P', 'F'};
inline constexpr std::uint32_t kAvpfVersion = 1;
inline constexpr std::size_t kAvpfHeaderBytes = 16;

namespace detail {

inline void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

}  // namespace detail

inline std::vector<unsigned char> encode_avpf(const FloatMatrix& m) {
  if (static_cast<std::uint64_t>(m.rows()) > std::numeric_limits<std::uint32_t>::max() ||
      static_cast<std::uint64_t>(m.cols()) > std::numeric_limits<std::uint32_t>::max())
    throw FormatError("matrix dimensions exceed u32", 8);
  std::vector<unsigned char> out;
  out.reserve(kAvpfHeaderBytes + static_cast<std::size_t>(m.size()) * 4);
  out.insert(out.end(), kAvpfMagic.begin(), kAvpfMagic.end());
  detail::put_u32(out, kAvpfVersion);
  detail::put_u32(out, static_cast<std::uint32_t>(m.rows()));
  detail::put_u32(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) detail::put_u32(out, std::bit_cast<std::uint32_t>(m(r, c)));
  return out;
}

inline FloatMatrix decode_avpf(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < kAvpfHeaderBytes)
    throw FormatError("truncated AVPF header", bytes.size());
  if (std::memcmp(bytes.data(), kAvpfMagic.data(), 4) != 0) throw FormatError("bad AVPF magic", 0);
  const std::uint32_t version = detail::get_u32(bytes.data() + 4);
  if (version != kAvpfVersion)
    throw FormatError("unsupported AVPF version " + std::to_string(version), 4);
  const std::uint64_t rows = detail::get_u32(bytes.data() + 8);
  const std::uint64_t cols = detail::get_u32(bytes.data() + 12);
  const std::uint64_t count = rows * cols;  // at most (2^32-1)^2, fits in 64 bits
  if (count > (std::numeric_limits<std::uint64_t>::max() - kAvpfHeaderBytes) / 4 ||
      count > static_cast<std::uint64_t>(std::numeric_limits<Eigen::Index>::max()))
    throw FormatError("AVPF dimension overflow", 8);
  const std::uint64_t expected = kAvpfHeaderBytes + count * 4;
  if (bytes.size() < expected) throw FormatError("truncated AVPF payload", bytes.size());
  if (bytes.size() > expected) throw FormatError("trailing bytes after AVPF payload", expected);
  FloatMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const unsigned char* p = bytes.data() + kAvpfHeaderBytes;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c, p += 4) m(r, c) = std::bit_cast<float>(detail::get_u32(p));
  return m;
}

inline void write_avpf(const std::filesystem::path& path, const FloatMatrix& m) {
  const auto bytes = encode_avpf(m);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw Error("short write to " + path.string());
}

inline FloatMatrix read_avpf(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  try {
    return decode_avpf(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

/// 64-bit convenience wrappers; values are narrowed to binary32 on disk.
inline void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  write_avpf(path, m.cast<float>());
}

inline Matrix read_matrix(const std::filesystem::path& path) { return read_avpf(path).cast<double>(); }

/// Integer sequences (alignments) are stored as a T x 1 AVPF column.
inline void write_index_sequence(const std::filesystem::path& path, const std::vector<int>& seq) {
  FloatMatrix m(static_cast<Eigen::Index>(seq.size()), 1);
  for (std::size_t i = 0; i < seq.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = static_cast<float>(seq[i]);
  write_avpf(path, m);
}

inline std::vector<int> read_index_sequence(const std::filesystem::path& path) {
  const FloatMatrix m = read_avpf(path);
  if (m.cols() != 1) throw FormatError(path.string() + ": index sequence must have one column", 12);
  std::vector<int> seq(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) seq[static_cast<std::size_t>(i)] = static_cast<int>(m(i, 0));
  return seq;
}

}  // namespace avf::io
