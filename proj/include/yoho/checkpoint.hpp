// yoho/checkpoint.hpp

// Copyright 2026 The yoho-sed Authors
//
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

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "yoho/network.hpp"

namespace yoho {

// Layout (little-endian):
//   "YOHO" u32 version
//   string  architecture block, key=value lines
//   string  metadata block, key=value lines (profile name, feature config, ...)
//   u32     tensor count
//   per tensor: string name, u32 ndim, u32 dims[ndim], f32 values (row-major)
// Strings are u32 length + bytes. Parameters come first in layer order, then
// batch-norm running statistics.

inline constexpr char kCheckpointMagic[4] = {'Y', 'O', 'H', 'O'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

using Metadata = std::map<std::string, std::string>;

inline std::string architecture_to_text(const Architecture& a) {
  std::ostringstream os;
  os << "kind=" << model_kind_name(a.kind) << "\ninput_time=" << a.input_time << "\nn_mels=" << a.n_mels
     << "\nn_classes=" << a.n_classes << "\nwidth_divisor=" << a.width_divisor << "\nseed=" << a.seed << "\nclasses=";
  for (std::size_t i = 0; i < a.classes.size(); ++i) os << (i ? "," : "") << a.classes[i];
  os << "\n";
  return os.str();
}

inline Architecture architecture_from_text(std::string_view text) {
  Architecture a;
  auto num = [](const std::string& k, const std::string& v) {
    try {
      std::size_t used = 0;
      unsigned long long n = std::stoull(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return n;
    } catch (const std::exception&) {
      throw DataError("checkpoint: bad value for " + k + ": '" + v + "'");
    }
  };
  for (const auto& [k, v] : parse_key_values(text)) {
    if (k == "kind") a.kind = parse_model_kind(v);
    else if (k == "input_time") a.input_time = num(k, v);
    else if (k == "n_mels") a.n_mels = num(k, v);
    else if (k == "n_classes") a.n_classes = num(k, v);
    else if (k == "width_divisor") a.width_divisor = num(k, v);
    else if (k == "seed") a.seed = num(k, v);
    else if (k == "classes") {
      a.classes.clear();
      std::size_t pos = 0;
      while (!v.empty() && pos <= v.size()) {
        std::size_t c = v.find(',', pos);
        if (c == std::string::npos) c = v.size();
        a.classes.push_back(v.substr(pos, c - pos));
        pos = c + 1;
      }
    } else {
      throw DataError("checkpoint: unknown architecture key '" + k + "'");
    }
  }
  return a;
}

inline std::string metadata_to_text(const Metadata& m) {
  std::string s;
  for (const auto& [k, v] : m) {
    if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
      throw ArgumentError("checkpoint metadata may not contain '=' in keys or newlines");
    s += k + "=" + v + "\n";
  }
  return s;
}

inline void save_checkpoint(std::ostream& os, const Network<float>& net, const Metadata& meta = {}) {
  os.write(kCheckpointMagic, 4);
  io::write_u32(os, kCheckpointVersion);
  io::write_string(os, architecture_to_text(net.architecture()));
  io::write_string(os, metadata_to_text(meta));
  std::vector<std::pair<std::string, const Tensor<float>*>> tensors;
  for (auto* p : net.params()) tensors.emplace_back(p->name, &p->value);
  for (auto& [name, t] : net.buffers()) tensors.emplace_back(name, t);
  io::write_u32(os, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& [name, t] : tensors) {
    io::write_string(os, name);
    io::write_u32(os, static_cast<std::uint32_t>(t->rank()));
    for (std::size_t d : t->shape) io::write_u32(os, static_cast<std::uint32_t>(d));
    for (float v : t->values) io::write_f32(os, v);
  }
  if (!os) throw Error("checkpoint: write failed");
}

inline void save_checkpoint(const std::filesystem::path& path, const Network<float>& net, const Metadata& meta = {}) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path.string() + " for writing");
  save_checkpoint(os, net, meta);
}

struct LoadedModel {
  Network<float> net;
  Metadata metadata;
};

/// Rebuilds the network from the stored architecture, then fills every
/// tensor. Names, order and shapes must match the rebuilt network exactly.
inline LoadedModel load_checkpoint(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string_view(magic, 4) != std::string_view(kCheckpointMagic, 4))
    throw DataError("not a YOHO checkpoint");
  if (std::uint32_t v = io::read_u32(is); v != kCheckpointVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(v));
  Architecture arch = architecture_from_text(io::read_string(is));
  LoadedModel m;
  for (auto& [k, v] : parse_key_values(io::read_string(is))) m.metadata[k] = v;
  m.net = build_network<float>(arch);

  std::vector<std::pair<std::string, Tensor<float>*>> tensors;
  for (auto* p : m.net.params()) tensors.emplace_back(p->name, &p->value);
  for (auto& b : m.net.buffers()) tensors.push_back(b);
  const std::uint32_t count = io::read_u32(is);
  if (count != tensors.size())
    throw ModelMismatchError("checkpoint holds " + std::to_string(count) + " tensors, architecture needs " +
                             std::to_string(tensors.size()));
  for (auto& [name, t] : tensors) {
    std::string stored = io::read_string(is);
    if (stored != name) throw ModelMismatchError("checkpoint tensor '" + stored + "' where '" + name + "' expected");
    const std::uint32_t ndim = io::read_u32(is);
    Shape shape(ndim);
    for (auto& d : shape) d = io::read_u32(is);
    if (shape != t->shape)
      throw ModelMismatchError(name + ": stored shape " + shape_string(shape) + " vs " + shape_string(t->shape));
    for (float& v : t->values) v = io::read_f32(is);
  }
  return m;
}

inline LoadedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("cannot open checkpoint " + path.string());
  return load_checkpoint(is);
}

}  // namespace yoho
