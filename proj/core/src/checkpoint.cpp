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
#include "geomatch/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "geomatch/error.hpp"

namespace geomatch {

namespace {

constexpr char kMagic[8] = {'G', 'E', 'O', 'M', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

template <typename T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) {
      throw InputError(std::string("checkpoint truncated while reading ") + what);
    }
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_checkpoint(const PostProcessor& net) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kCheckpointVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers().size()));
  for (const auto& l : net.layers()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.kind));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.in_channels));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(l.out_channels));
    put<std::int32_t>(out, l.skip);
  }
  put<std::uint64_t>(out, net.param_count());
  for (double p : net.params()) put<float>(out, static_cast<float>(p));
  return out;
}

PostProcessor parse_checkpoint(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw InputError("not a geomatch checkpoint (bad magic)");
  }
  Reader r(bytes.substr(sizeof(kMagic)));
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw InputError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto n_layers = r.get<std::uint32_t>("layer count");
  if (n_layers == 0 || n_layers > 4096) throw InputError("implausible checkpoint layer count");
  std::vector<LayerSpec> layers;
  for (std::uint32_t k = 0; k < n_layers; ++k) {
    const auto kind = r.get<std::uint32_t>("layer kind");
    if (kind > static_cast<std::uint32_t>(LayerKind::residual_add)) {
      throw InputError("unknown layer kind " + std::to_string(kind) + " in checkpoint");
    }
    LayerSpec l;
    l.kind = static_cast<LayerKind>(kind);
    l.in_channels = static_cast<int>(r.get<std::uint32_t>("layer channels"));
    l.out_channels = static_cast<int>(r.get<std::uint32_t>("layer channels"));
    l.skip = r.get<std::int32_t>("layer skip");
    layers.push_back(l);
  }
  PostProcessor net = [&] {
    try {
      return PostProcessor(std::move(layers));
    } catch (const ArgumentError& e) {
      throw InputError(std::string("checkpoint layer stack is invalid: ") + e.what());
    }
  }();
  const auto count = r.get<std::uint64_t>("parameter count");
  if (count != net.param_count()) {
    throw InputError("checkpoint stores " + std::to_string(count) +
                     " parameters, layer stack needs " + std::to_string(net.param_count()));
  }
  if (r.remaining() != count * sizeof(float)) {
    throw InputError("checkpoint parameter payload has the wrong size");
  }
  auto params = net.params();
  for (std::size_t i = 0; i < count; ++i) params[i] = r.get<float>("parameters");
  return net;
}

void save_checkpoint(const std::filesystem::path& path, const PostProcessor& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write checkpoint " + path.string());
  const std::string bytes = serialize_checkpoint(net);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw InputError("failed writing checkpoint " + path.string());
}

PostProcessor load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_checkpoint(ss.str());
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_trace_csv(std::ostream& out, std::span<const TraceRow> rows) {
  out << "step,lr,L_sparse,L_dense,total\n";
  out << std::setprecision(17);
  for (const auto& r : rows) {
    out << r.step << ',' << r.lr << ',' << r.sparse << ',' << r.dense << ',' << r.total << '\n';
  }
}

void save_trace_csv(const std::filesystem::path& path, std::span<const TraceRow> rows) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write loss trace " + path.string());
  write_trace_csv(out, rows);
}

}  // namespace geomatch
