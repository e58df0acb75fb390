/*
 * Copyright (c) 2026 The geomatch Authors
 *
 * Licensed under the Apache License, Version 2.0;
 * You may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an 'AS IS' BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "geomatch/npy.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <regex>
#include <sstream>

#include "geomatch/error.hpp"

namespace geomatch::npy {

namespace {

constexpr char kMagic[] = "\x93NUMPY";
constexpr std::size_t kMagicLen = 6;

float from_le(std::uint32_t bits) {
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFF) << 24) | ((bits & 0xFF00) << 8) |
           ((bits >> 8) & 0xFF00) | (bits >> 24);
  }
  return std::bit_cast<float>(bits);
}

std::uint32_t to_le(float v) {
  auto bits = std::bit_cast<std::uint32_t>(v);
  if constexpr (std::endian::native == std::endian::big) {
    bits = ((bits & 0xFF) << 24) | ((bits & 0xFF00) << 8) |
           ((bits >> 8) & 0xFF00) | (bits >> 24);
  }
  return bits;
}

std::vector<std::size_t> parse_shape(const std::string& tuple) {
  std::vector<std::size_t> shape;
  std::stringstream ss(tuple);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    auto last = item.find_last_not_of(" \t");
    item = item.substr(first, last - first + 1);
    if (item.empty() ||
        item.find_first_not_of("0123456789") != std::string::npos) {
      throw InputError("npy: malformed shape entry '" + item + "'");
    }
    shape.push_back(std::stoull(item));
  }
  return shape;
}

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Array parse(const std::string& bytes) {
  if (bytes.size() < kMagicLen + 4 ||
      std::memcmp(bytes.data(), kMagic, kMagicLen) != 0) {
    throw InputError("npy: bad magic string");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw InputError("npy: unsupported version " + std::to_string(major) +
                     "." + std::to_string(minor));
  }
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                 (static_cast<unsigned char>(bytes[9]) << 8);
  if (bytes.size() < 10 + header_len) throw InputError("npy: truncated header");
  const std::string header = bytes.substr(10, header_len);

  static const std::regex descr_re(R"('descr'\s*:\s*'([^']*)')");
  static const std::regex order_re(R"('fortran_order'\s*:\s*(True|False))");
  static const std::regex shape_re(R"('shape'\s*:\s*\(([^)]*)\))");
  std::smatch m;
  if (!std::regex_search(header, m, descr_re)) {
    throw InputError("npy: header lacks descr");
  }
  if (m[1] != "<f4") {
    throw InputError("npy: unsupported dtype '" + m[1].str() +
                     "', expected '<f4'");
  }
  if (!std::regex_search(header, m, order_re)) {
    throw InputError("npy: header lacks fortran_order");
  }
  if (m[1] != "False") throw InputError("npy: fortran_order arrays are rejected");
  if (!std::regex_search(header, m, shape_re)) {
    throw InputError("npy: header lacks shape");
  }

  Array out;
  out.shape = parse_shape(m[1].str());
  std::size_t count = 1;
  for (auto d : out.shape) count *= d;
  const std::size_t offset = 10 + header_len;
  if (bytes.size() - offset != count * 4) {
    throw InputError("npy: payload holds " +
                     std::to_string((bytes.size() - offset) / 4) +
                     " floats, shape needs " + std::to_string(count));
  }
  out.data.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + offset + 4 * i, 4);
    out.data[i] = from_le(bits);
  }
  return out;
}

std::string serialize(const Array& array) {
  std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': " +
                       shape_string(array.shape) + ", }";
  // magic + version + length + header + newline, padded to 64 bytes
  const std::size_t unpadded = 10 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');

  std::string out(kMagic, kMagicLen);
  out.push_back('\x01');
  out.push_back('\x00');
  out.push_back(static_cast<char>(header.size() & 0xFF));
  out.push_back(static_cast<char>((header.size() >> 8) & 0xFF));
  out += header;
  const std::size_t offset = out.size();
  out.resize(offset + array.data.size() * 4);
  for (std::size_t i = 0; i < array.data.size(); ++i) {
    const auto bits = to_le(array.data[i]);
    std::memcpy(out.data() + offset + 4 * i, &bits, 4);
  }
  return out;
}

Array read(const std::filesystem::path& path) {
  try {
    return parse(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write(const std::filesystem::path& path, const Array& array) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  const auto bytes = serialize(array);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  auto a = read(path);
  if (a.shape.size() != 3) {
    throw InputError(path.string() + ": feature map must have shape (H, W, C)");
  }
  const int h = static_cast<int>(a.shape[0]);
  const int w = static_cast<int>(a.shape[1]);
  const int c = static_cast<int>(a.shape[2]);
  bool unit = h * w > 0;
  for (int i = 0; i < h * w && unit; ++i) {
    double sq = 0.0;
    for (int k = 0; k < c; ++k) {
      const double v = a.data[static_cast<std::size_t>(i) * c + k];
      sq += v * v;
    }
    unit = std::abs(std::sqrt(sq) - 1.0) <= 1e-5;
  }
  return FeatureMap(h, w, c, std::move(a.data), unit);
}

void save_feature_map(const std::filesystem::path& path, const FeatureMap& f) {
  write(path, Array{{static_cast<std::size_t>(f.height()),
                     static_cast<std::size_t>(f.width()),
                     static_cast<std::size_t>(f.channels())},
                    f.data()});
}

InstanceMask load_mask(const std::filesystem::path& path) {
  auto a = read(path);
  if (a.shape.size() != 2) {
    throw InputError(path.string() + ": mask must have shape (H, W)");
  }
  std::vector<std::uint8_t> bits(a.data.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = a.data[i] != 0.0f;
  return InstanceMask(static_cast<int>(a.shape[0]), static_cast<int>(a.shape[1]),
                      std::move(bits));
}

void save_mask(const std::filesystem::path& path, const InstanceMask& m) {
  std::vector<float> data(m.bits().begin(), m.bits().end());
  write(path, Array{{static_cast<std::size_t>(m.height()),
                     static_cast<std::size_t>(m.width())},
                    std::move(data)});
}

}  // namespace geomatch::npy
