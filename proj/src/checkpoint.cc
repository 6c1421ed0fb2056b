// Copyright 2026 The dpgan Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpgan/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "dpgan/errors.h"

namespace dpgan {
namespace {

void PutU32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void PutF64(std::vector<std::uint8_t>& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }

  void Need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("checkpoint truncated while reading ") + what,
                        pos_);
    }
  }
  std::uint8_t U8(const char* what) {
    Need(1, what);
    return bytes_[pos_++];
  }
  std::uint32_t U32(const char* what) {
    Need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{bytes_[pos_++]} << (8 * i);
    return v;
  }
  double F64(const char* what) {
    Need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{bytes_[pos_++]} << (8 * i);
    return std::bit_cast<double>(v);
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> EncodeCheckpoint(const Network& net) {
  std::vector<std::uint8_t> out = {'D', 'P', 'G', '1', kCheckpointVersion};
  PutU32(out, static_cast<std::uint32_t>(net.num_layers()));
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const LayerSpec& spec = net.layer(l);
    PutU32(out, static_cast<std::uint32_t>(spec.in));
    PutU32(out, static_cast<std::uint32_t>(spec.out));
    out.push_back(static_cast<std::uint8_t>(spec.activation));
    const auto params = net.params();
    for (std::size_t i = 0; i < spec.in * spec.out + spec.out; ++i) {
      PutF64(out, params[net.weight_offset(l) + i]);
    }
  }
  return out;
}

Network DecodeCheckpoint(const std::vector<std::uint8_t>& bytes) {
  Reader in(bytes);
  in.Need(4, "magic");
  if (std::memcmp(bytes.data(), "DPG1", 4) != 0) {
    throw FormatError("bad checkpoint magic", 0);
  }
  in.U32("magic");
  const std::size_t version_at = in.offset();
  if (in.U8("version") != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version", version_at);
  }
  const std::size_t count_at = in.offset();
  const std::uint32_t count = in.U32("layer count");
  if (count == 0) throw FormatError("checkpoint has no layers", count_at);

  std::vector<LayerSpec> specs;
  std::vector<double> values;
  for (std::uint32_t l = 0; l < count; ++l) {
    const std::size_t layer_at = in.offset();
    LayerSpec spec;
    spec.in = in.U32("layer input size");
    spec.out = in.U32("layer output size");
    const std::size_t act_at = in.offset();
    const std::uint8_t act = in.U8("activation tag");
    if (act > static_cast<std::uint8_t>(Activation::kLeakyRelu)) {
      throw FormatError("unknown activation tag", act_at);
    }
    spec.activation = static_cast<Activation>(act);
    if (spec.in == 0 || spec.out == 0) {
      throw FormatError("layer with zero size", layer_at);
    }
    if (!specs.empty() && specs.back().out != spec.in) {
      throw FormatError("layer sizes do not chain", layer_at);
    }
    const std::size_t n = spec.in * spec.out + spec.out;
    in.Need(8 * n, "layer parameters");
    for (std::size_t i = 0; i < n; ++i) values.push_back(in.F64("parameter"));
    specs.push_back(spec);
  }
  if (in.offset() != bytes.size()) {
    throw FormatError("trailing bytes after checkpoint", in.offset());
  }
  Network net(std::move(specs));
  std::copy(values.begin(), values.end(), net.params().begin());
  return net;
}

void SaveCheckpoint(const Network& net, const std::string& path) {
  const std::vector<std::uint8_t> bytes = EncodeCheckpoint(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint for writing: " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint: " + path);
}

Network LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return DecodeCheckpoint(bytes);
}

}  // namespace dpgan
