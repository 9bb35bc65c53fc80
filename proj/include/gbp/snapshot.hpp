// Copyright 2026 The gbp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "gbp/network.hpp"

namespace gbp::nn {

// Network snapshot, binary format version 1 (little-endian throughout):
//
//   offset  field
//   0       magic "GBPSNAP1" (8 bytes)
//   8       u32  format version (1)
//   12      u8   loss kind (0 mse_reconstruction, 1 softmax_cross_entropy)
//   13      u32  layer count L
//           L layer records:
//             u8  layer kind (0 fc, 1 diagonal_scale, 2 activation)
//             i32 in_dim, i32 out_dim, i32 param index (-1 for activation)
//             u8  apply (0 transposed, 1 plain)
//             u8  activation (0 identity, 1 sigmoid, 2 tanh, 3 relu)
//             u8  has_bias
//           u32  parameter count P
//           P parameter records:
//             u8  manifold kind (0 euclidean, 1 stiefel, 2 oblique)
//             i32 manifold n, i32 manifold p
//             i32 rows, i32 cols, rows*cols f64 weights (row-major)
//             i32 bias length (0 if none), f64 bias entries
//
// Momentum buffers are not stored; loading yields zeroed optimizer state.

struct Snapshot {
  NetworkSpec net;
  std::vector<ParamState> params;
};

void save_snapshot(const std::string& path, const NetworkSpec& net,
                   const std::vector<ParamState>& params);

Snapshot load_snapshot(const std::string& path);

}  // namespace gbp::nn
