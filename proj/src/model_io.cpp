// Copyright 2026 The spoofkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spoofkit/model_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "spoofkit/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "stack files are little-endian");

namespace spoofkit {

namespace {

constexpr char kMagic[4] = {'S', 'K', 'F', 'S'};

template <class T>
void WriteRaw(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(value));
}

template <class T>
T ReadRaw(std::istream& in) {
  T value;
  in.read(reinterpret_cast<char*>(&value), sizeof(value));
  if (!in) throw DataError("truncated feature stack file");
  return value;
}

std::ifstream OpenIn(const std::string& path, std::ios::openmode mode) {
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot open file: " + path);
  return in;
}

std::ofstream OpenOut(const std::string& path, std::ios::openmode mode) {
  std::ofstream out(path, mode);
  if (!out) throw DataError("cannot open file for writing: " + path);
  return out;
}

void WriteBlocks(std::ostream& out, const std::string& prefix,
                 std::vector<ParamBlock<double>> blocks) {
  char buf[64];
  for (const auto& b : blocks) {
    out << "block " << prefix << b.name << ' ' << b.size << '\n';
    for (long i = 0; i < b.size; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", b.data[i]);
      out << buf << (i + 1 == b.size ? '\n' : ' ');
    }
  }
}

void ReadBlocks(std::istream& in, const std::string& prefix,
                std::vector<ParamBlock<double>> blocks) {
  std::string word, name;
  long size;
  for (auto& b : blocks) {
    if (!(in >> word >> name >> size) || word != "block" ||
        name != prefix + b.name || size != b.size)
      throw DataError("checkpoint: expected block " + prefix + b.name);
    for (long i = 0; i < size; ++i)
      if (!(in >> b.data[i]))
        throw DataError("checkpoint: truncated block " + name);
  }
}

ToyEncoder MakeEncoder(long in_dim, long dim, long layers) {
  ToyEncoder e;
  e.input_proj = Eigen::MatrixXd::Zero(in_dim, dim);
  e.input_bias = Eigen::VectorXd::Zero(dim);
  for (long l = 0; l < layers; ++l) {
    e.layer_w.push_back(Eigen::MatrixXd::Zero(dim, dim));
    e.layer_b.push_back(Eigen::VectorXd::Zero(dim));
  }
  return e;
}

}  // namespace

void SaveFeatureStack(const FeatureStack& stack, std::ostream& out) {
  stack.Validate();
  out.write(kMagic, 4);
  WriteRaw<std::uint32_t>(out, static_cast<std::uint32_t>(stack.NumLayers()));
  WriteRaw<std::uint64_t>(out, static_cast<std::uint64_t>(stack.Frames()));
  WriteRaw<std::uint32_t>(out, static_cast<std::uint32_t>(stack.Dim()));
  WriteRaw<std::uint32_t>(out, 8);  // float64
  for (const auto& layer : stack.layers)
    for (long r = 0; r < layer.rows(); ++r)
      for (long c = 0; c < layer.cols(); ++c) WriteRaw<double>(out, layer(r, c));
}

FeatureStack LoadFeatureStack(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw DataError("not a feature stack file (bad magic)");
  auto num_layers = ReadRaw<std::uint32_t>(in);
  auto frames = ReadRaw<std::uint64_t>(in);
  auto dim = ReadRaw<std::uint32_t>(in);
  auto dtype = ReadRaw<std::uint32_t>(in);
  if (dtype != 4 && dtype != 8)
    throw DataError("feature stack: unsupported dtype code " +
                    std::to_string(dtype));
  FeatureStack stack;
  for (std::uint32_t l = 0; l < num_layers; ++l) {
    Eigen::MatrixXd m(frames, dim);
    for (std::uint64_t r = 0; r < frames; ++r)
      for (std::uint32_t c = 0; c < dim; ++c)
        m(r, c) = dtype == 8 ? ReadRaw<double>(in)
                             : static_cast<double>(ReadRaw<float>(in));
    stack.layers.push_back(std::move(m));
  }
  stack.Validate();
  return stack;
}

void SaveFeatureStackFile(const FeatureStack& stack, const std::string& path) {
  auto out = OpenOut(path, std::ios::binary);
  SaveFeatureStack(stack, out);
}

FeatureStack LoadFeatureStackFile(const std::string& path) {
  auto in = OpenIn(path, std::ios::binary);
  return LoadFeatureStack(in);
}

void SaveCheckpoint(const Checkpoint& ckpt, std::ostream& out) {
  out << "spoofkit-checkpoint 1\n";
  if (ckpt.backend == "wa") {
    if (!ckpt.wa) throw DataError("checkpoint: missing WA model");
    WaModel m = *ckpt.wa;
    out << "wa " << m.layer_weights.size() << ' ' << m.classifier_w.rows()
        << ' ' << m.classifier_w.cols() << ' ' << (m.softmax_weights ? 1 : 0)
        << '\n';
    WriteBlocks(out, "", m.Blocks());
  } else if (ckpt.backend == "mhfa") {
    if (!ckpt.mhfa) throw DataError("checkpoint: missing MHFA model");
    MhfaModel m = *ckpt.mhfa;
    out << "mhfa " << m.key_layer_weights.size() << ' '
        << m.value_projection.rows() << ' ' << m.Heads() << ' '
        << m.value_projection.cols() << ' ' << m.embedding.cols() << ' '
        << m.classifier_w.cols() << '\n';
    WriteBlocks(out, "", m.Blocks());
  } else {
    throw DataError("checkpoint: unknown backend '" + ckpt.backend + "'");
  }
  if (ckpt.encoder) {
    ToyEncoder e = *ckpt.encoder;
    out << "encoder " << e.input_proj.rows() << ' ' << e.input_proj.cols()
        << ' ' << e.NumLayers() << '\n';
    WriteBlocks(out, "", e.Blocks());
    if (ckpt.encoder_init) {
      ToyEncoder e0 = *ckpt.encoder_init;
      out << "encoder_init\n";
      WriteBlocks(out, "init.", e0.Blocks());
    }
  }
}

Checkpoint LoadCheckpoint(std::istream& in) {
  std::string word;
  int version;
  if (!(in >> word >> version) || word != "spoofkit-checkpoint" || version != 1)
    throw DataError("not a spoofkit checkpoint");
  Checkpoint ckpt;
  if (!(in >> ckpt.backend)) throw DataError("checkpoint: missing backend");
  if (ckpt.backend == "wa") {
    long nl, d, c;
    int softmax;
    if (!(in >> nl >> d >> c >> softmax))
      throw DataError("checkpoint: bad WA dims");
    WaModel m;
    m.layer_weights = Eigen::VectorXd::Zero(nl);
    m.classifier_w = Eigen::MatrixXd::Zero(d, c);
    m.classifier_b = Eigen::VectorXd::Zero(c);
    m.softmax_weights = softmax != 0;
    ReadBlocks(in, "", m.Blocks());
    ckpt.wa = std::move(m);
  } else if (ckpt.backend == "mhfa") {
    long nl, d, h, dp, e, c;
    if (!(in >> nl >> d >> h >> dp >> e >> c))
      throw DataError("checkpoint: bad MHFA dims");
    MhfaModel m;
    m.key_layer_weights = Eigen::VectorXd::Zero(nl);
    m.value_layer_weights = Eigen::VectorXd::Zero(nl);
    m.head_queries = Eigen::MatrixXd::Zero(h, d);
    m.value_projection = Eigen::MatrixXd::Zero(d, dp);
    m.embedding = Eigen::MatrixXd::Zero(h * dp, e);
    m.classifier_w = Eigen::MatrixXd::Zero(e, c);
    m.classifier_b = Eigen::VectorXd::Zero(c);
    ReadBlocks(in, "", m.Blocks());
    ckpt.mhfa = std::move(m);
  } else {
    throw DataError("checkpoint: unknown backend '" + ckpt.backend + "'");
  }
  if (in >> word) {
    if (word != "encoder") throw DataError("checkpoint: expected 'encoder'");
    long in_dim, dim, layers;
    if (!(in >> in_dim >> dim >> layers))
      throw DataError("checkpoint: bad encoder dims");
    ToyEncoder e = MakeEncoder(in_dim, dim, layers);
    ReadBlocks(in, "", e.Blocks());
    ckpt.encoder = e;
    if (in >> word) {
      if (word != "encoder_init")
        throw DataError("checkpoint: expected 'encoder_init'");
      ToyEncoder e0 = MakeEncoder(in_dim, dim, layers);
      ReadBlocks(in, "init.", e0.Blocks());
      ckpt.encoder_init = std::move(e0);
    }
  }
  return ckpt;
}

void SaveCheckpointFile(const Checkpoint& ckpt, const std::string& path) {
  auto out = OpenOut(path, std::ios::out);
  SaveCheckpoint(ckpt, out);
}

Checkpoint LoadCheckpointFile(const std::string& path) {
  auto in = OpenIn(path, std::ios::in);
  return LoadCheckpoint(in);
}

}  // namespace spoofkit
