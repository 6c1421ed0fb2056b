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

// Binary network checkpoints:
//
//   "DPG1" | version u8 | layer count u32
//   per layer: in u32 | out u32 | activation u8 | out*in f64 | out f64
//
// Integers and floats are little-endian.

#ifndef DPGAN_CHECKPOINT_H_
#define DPGAN_CHECKPOINT_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dpgan/network.h"

namespace dpgan {

inline constexpr std::uint8_t kCheckpointVersion = 1;

std::vector<std::uint8_t> EncodeCheckpoint(const Network& net);
// Throws FormatError naming the byte offset of the first bad field.
Network DecodeCheckpoint(const std::vector<std::uint8_t>& bytes);

void SaveCheckpoint(const Network& net, const std::string& path);
Network LoadCheckpoint(const std::string& path);

}  // namespace dpgan

#endif  // DPGAN_CHECKPOINT_H_
