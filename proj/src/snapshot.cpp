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

#include "gbp/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace gbp::nn {

static_assert(std::endian::native == std::endian::little,
              "snapshot format is little-endian");

namespace {

constexpr char kMagic[8] = {'G', 'B', 'P', 'S', 'N', 'A', 'P', '1'};
constexpr std::uint32_t kFormatVersion = 1;

void write_bytes(std::ofstream& out, const void* data, std::size_t len) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
}

template <typename T>
void write_pod(std::ofstream& out, T value) {
  write_bytes(out, &value, sizeof(T));
}

void read_bytes(std::ifstream& in, void* data, std::size_t len, const std::string& path) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(len));
  if (in.gcount() != static_cast<std::streamsize>(len)) {
    throw IoError("load_snapshot: truncated file '" + path + "'");
  }
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T value;
  read_bytes(in, &value, sizeof(T), path);
  return value;
}

void write_matrix(std::ofstream& out, const Matrix& m) {
  write_pod<std::int32_t>(out, m.rows());
  write_pod<std::int32_t>(out, m.cols());
  write_bytes(out, m.data(), m.size() * sizeof(double));
}

Matrix read_matrix(std::ifstream& in, const std::string& path) {
  const auto rows = read_pod<std::int32_t>(in, path);
  const auto cols = read_pod<std::int32_t>(in, path);
  if (rows <= 0 || cols <= 0 || rows > (1 << 24) || cols > (1 << 24)) {
    throw IoError("load_snapshot: implausible matrix shape in '" + path + "'");
  }
  Matrix m(rows, cols);
  read_bytes(in, m.data(), m.size() * sizeof(double), path);
  return m;
}

}  // namespace

void save_snapshot(const std::string& path, const NetworkSpec& net,
                   const std::vector<ParamState>& params) {
  validate_network(net, params);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("save_snapshot: cannot open '" + path + "' for writing");

  write_bytes(out, kMagic, sizeof(kMagic));
  write_pod<std::uint32_t>(out, kFormatVersion);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(net.loss));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(net.layers.size()));
  for (const LayerSpec& layer : net.layers) {
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(layer.kind));
    write_pod<std::int32_t>(out, layer.in_dim);
    write_pod<std::int32_t>(out, layer.out_dim);
    write_pod<std::int32_t>(out, layer.param);
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(layer.apply));
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(layer.activation));
    write_pod<std::uint8_t>(out, layer.has_bias ? 1 : 0);
  }
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const ParamState& ps : params) {
    write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(ps.manifold.kind));
    write_pod<std::int32_t>(out, ps.manifold.n);
    write_pod<std::int32_t>(out, ps.manifold.p);
    write_matrix(out, ps.weights);
    write_pod<std::int32_t>(out, static_cast<std::int32_t>(ps.bias.size()));
    if (ps.has_bias()) write_bytes(out, ps.bias.data(), ps.bias.size() * sizeof(double));
  }
  if (!out) throw IoError("save_snapshot: write to '" + path + "' failed");
}

Snapshot load_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("load_snapshot: cannot open '" + path + "'");

  char magic[8];
  read_bytes(in, magic, sizeof(magic), path);
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw IoError("load_snapshot: '" + path + "' is not a gbp snapshot");
  }
  const auto version = read_pod<std::uint32_t>(in, path);
  if (version != kFormatVersion) {
    throw IoError("load_snapshot: unsupported format version " + std::to_string(version));
  }

  Snapshot snap;
  const auto loss = read_pod<std::uint8_t>(in, path);
  if (loss > 1) throw IoError("load_snapshot: bad loss kind");
  snap.net.loss = static_cast<LossKind>(loss);

  const auto layer_count = read_pod<std::uint32_t>(in, path);
  snap.net.layers.resize(layer_count);
  for (LayerSpec& layer : snap.net.layers) {
    const auto kind = read_pod<std::uint8_t>(in, path);
    if (kind > 2) throw IoError("load_snapshot: bad layer kind");
    layer.kind = static_cast<LayerKind>(kind);
    layer.in_dim = read_pod<std::int32_t>(in, path);
    layer.out_dim = read_pod<std::int32_t>(in, path);
    layer.param = read_pod<std::int32_t>(in, path);
    const auto apply = read_pod<std::uint8_t>(in, path);
    if (apply > 1) throw IoError("load_snapshot: bad apply mode");
    layer.apply = static_cast<FcApply>(apply);
    const auto act = read_pod<std::uint8_t>(in, path);
    if (act > 3) throw IoError("load_snapshot: bad activation kind");
    layer.activation = static_cast<ActivationKind>(act);
    layer.has_bias = read_pod<std::uint8_t>(in, path) != 0;
  }

  const auto param_count = read_pod<std::uint32_t>(in, path);
  snap.params.reserve(param_count);
  for (std::uint32_t i = 0; i < param_count; ++i) {
    const auto kind = read_pod<std::uint8_t>(in, path);
    if (kind > 2) throw IoError("load_snapshot: bad manifold kind");
    manifolds::ManifoldDescriptor m;
    m.kind = static_cast<manifolds::ManifoldKind>(kind);
    m.n = read_pod<std::int32_t>(in, path);
    m.p = read_pod<std::int32_t>(in, path);
    Matrix weights = read_matrix(in, path);
    const auto bias_len = read_pod<std::int32_t>(in, path);
    ParamState ps = make_param(std::move(weights), m, bias_len);
    if (bias_len > 0) read_bytes(in, ps.bias.data(), ps.bias.size() * sizeof(double), path);
    snap.params.push_back(std::move(ps));
  }

  validate_network(snap.net, snap.params);
  return snap;
}

}  // namespace gbp::nn
