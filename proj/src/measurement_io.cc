// Copyright 2026 The ddrestore Authors.
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

// Measurement container, all integers little-endian:
//
//   "DDRM" | u32 version=1 | u8 kind | u32 len | descriptor bytes | payload
//
//   kind 0 (image):  u32 h, w, c | u8 domain | f64[h*w*c]
//   kind 1 (jpeg):   u32 h, w | u8 subsampling (0=444, 1=420)
//                    | u16[64] luma | u16[64] chroma (raster)
//                    | u8 has_qf | u8 qf
//                    | 3 x (u32 plane_h, plane_w, blocks_y, blocks_x
//                           | f32[blocks*64])
//   kind 2 (levels): u32 h, w, c | u8 bits | f32[h*w*c]
//   kind 3 (linear): u32 h, w, c | u32 m | f64[m]

#include <bit>
#include <cmath>
#include <cstring>

#include "ddr/error.h"
#include "ddr/file_io.h"
#include "ddr/operator.h"

namespace ddr {

namespace {

static_assert(std::endian::native == std::endian::little,
              "container I/O assumes a little-endian host");

constexpr char kMagic[4] = {'D', 'D', 'R', 'M'};
constexpr uint32_t kVersion = 1;

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(v); }
  void U16(uint16_t v) { Raw(&v, 2); }
  void U32(uint64_t v) {
    if (v > UINT32_MAX) throw Error(ErrorCode::kInvalidArgument, "dim too large");
    const uint32_t w = static_cast<uint32_t>(v);
    Raw(&w, 4);
  }
  void F32(double v) {
    const float f = static_cast<float>(v);
    if (static_cast<double>(f) != v) {
      throw Error(ErrorCode::kInvalidArgument,
                  "value not representable as float32");
    }
    Raw(&f, 4);
  }
  void F64(double v) { Raw(&v, 8); }
  void Bytes(const void* p, size_t n) { Raw(p, n); }
  std::vector<uint8_t> Take() { return std::move(out_); }

 private:
  void Raw(const void* p, size_t n) {
    const auto* b = static_cast<const uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  std::vector<uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const uint8_t> in) : in_(in) {}

  uint8_t U8() { return Take(1)[0]; }
  uint16_t U16() { return Load<uint16_t>(); }
  uint32_t U32() { return Load<uint32_t>(); }
  double F32() { return Load<float>(); }
  double F64() { return Load<double>(); }
  std::span<const uint8_t> Take(size_t n) {
    if (n > in_.size() - pos_) {
      throw Error(ErrorCode::kMalformed, "measurement container truncated");
    }
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  // Guards allocations against corrupt counts.
  void Expect(uint64_t count, size_t width) {
    if (count > (in_.size() - pos_) / width) {
      throw Error(ErrorCode::kMalformed, "measurement container truncated");
    }
  }
  bool AtEnd() const { return pos_ == in_.size(); }

 private:
  template <typename T>
  T Load() {
    T v;
    std::memcpy(&v, Take(sizeof(T)).data(), sizeof(T));
    return v;
  }
  std::span<const uint8_t> in_;
  size_t pos_ = 0;
};

void WriteImage(Writer& w, const ImageTensor& img) {
  w.U32(img.height());
  w.U32(img.width());
  w.U32(img.channels());
  w.U8(static_cast<uint8_t>(img.domain()));
  for (double v : img.data()) w.F64(v);
}

ImageTensor ReadImage(Reader& r) {
  const uint64_t h = r.U32(), wd = r.U32(), c = r.U32();
  const uint8_t domain = r.U8();
  if (domain > 2) throw Error(ErrorCode::kMalformed, "bad domain tag");
  r.Expect(h * wd * c, 8);
  std::vector<double> data(h * wd * c);
  for (double& v : data) v = r.F64();
  return ImageTensor(h, wd, c, static_cast<Domain>(domain), std::move(data));
}

void WriteJpeg(Writer& w, const JpegCoefficients& c) {
  c.Validate();
  w.U32(c.height);
  w.U32(c.width);
  w.U8(c.params.subsampling == Subsampling::k444 ? 0 : 1);
  for (uint16_t v : c.params.luma.ToRaster().values) w.U16(v);
  for (uint16_t v : c.params.chroma.ToRaster().values) w.U16(v);
  w.U8(c.params.quality_factor.has_value());
  w.U8(static_cast<uint8_t>(c.params.quality_factor.value_or(0)));
  for (const BlockGrid& g : c.planes) {
    w.U32(g.height);
    w.U32(g.width);
    w.U32(g.blocks_y());
    w.U32(g.blocks_x());
    for (const Block& b : g.blocks) {
      for (double v : b) w.F32(v);
    }
  }
}

JpegCoefficients ReadJpeg(Reader& r) {
  JpegCoefficients c;
  c.height = r.U32();
  c.width = r.U32();
  const uint8_t sub = r.U8();
  if (sub > 1) throw Error(ErrorCode::kMalformed, "bad subsampling tag");
  c.params.subsampling = sub == 0 ? Subsampling::k444 : Subsampling::k420;
  for (auto& v : c.params.luma.values) v = r.U16();
  for (auto& v : c.params.chroma.values) v = r.U16();
  const uint8_t has_qf = r.U8();
  const uint8_t qf = r.U8();
  if (has_qf) c.params.quality_factor = qf;
  for (BlockGrid& g : c.planes) {
    g.height = r.U32();
    g.width = r.U32();
    const uint64_t by = r.U32(), bx = r.U32();
    g.padded_height = by * 8;
    g.padded_width = bx * 8;
    r.Expect(by * bx * 64, 4);
    g.blocks.resize(by * bx);
    for (Block& b : g.blocks) {
      for (double& v : b) v = r.F32();
    }
  }
  try {
    c.Validate();
    c.params.luma.ToRaster();
    c.params.chroma.ToRaster();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformed, e.what());
  }
  return c;
}

}  // namespace

std::vector<uint8_t> SerializeMeasurement(const Measurement& y) {
  Writer w;
  w.Bytes(kMagic, 4);
  w.U32(kVersion);
  w.U8(static_cast<uint8_t>(y.payload.index()));
  w.U32(y.descriptor.size());
  w.Bytes(y.descriptor.data(), y.descriptor.size());
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ImageTensor>) {
          WriteImage(w, p);
        } else if constexpr (std::is_same_v<T, JpegCoefficients>) {
          WriteJpeg(w, p);
        } else if constexpr (std::is_same_v<T, LevelTensor>) {
          w.U32(p.height);
          w.U32(p.width);
          w.U32(p.channels);
          w.U8(static_cast<uint8_t>(p.bits));
          for (double v : p.levels) w.F32(v);
        } else {
          w.U32(p.height);
          w.U32(p.width);
          w.U32(p.channels);
          w.U32(p.values.size());
          for (double v : p.values) w.F64(v);
        }
      },
      y.payload);
  return w.Take();
}

Measurement DeserializeMeasurement(std::span<const uint8_t> bytes) {
  Reader r(bytes);
  const auto magic = r.Take(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kMalformed, "not a measurement container");
  }
  if (r.U32() != kVersion) {
    throw Error(ErrorCode::kMalformed, "unsupported container version");
  }
  const uint8_t kind = r.U8();
  const uint32_t len = r.U32();
  const auto desc = r.Take(len);
  Measurement y;
  y.descriptor.assign(desc.begin(), desc.end());
  switch (kind) {
    case 0:
      y.payload = ReadImage(r);
      break;
    case 1:
      y.payload = ReadJpeg(r);
      break;
    case 2: {
      LevelTensor l;
      l.height = r.U32();
      l.width = r.U32();
      l.channels = r.U32();
      l.bits = r.U8();
      if (l.bits < 1 || l.bits > 8) {
        throw Error(ErrorCode::kMalformed, "bad bit depth");
      }
      const uint64_t n = uint64_t{l.height} * l.width * l.channels;
      r.Expect(n, 4);
      l.levels.resize(n);
      for (double& v : l.levels) v = r.F32();
      y.payload = std::move(l);
      break;
    }
    case 3: {
      LinearMeasurement m;
      m.height = r.U32();
      m.width = r.U32();
      m.channels = r.U32();
      const uint32_t n = r.U32();
      r.Expect(n, 8);
      m.values.resize(n);
      for (double& v : m.values) v = r.F64();
      y.payload = std::move(m);
      break;
    }
    default:
      throw Error(ErrorCode::kMalformed, "unknown measurement kind");
  }
  if (!r.AtEnd()) {
    throw Error(ErrorCode::kMalformed, "trailing bytes after measurement");
  }
  return y;
}

void WriteMeasurementFile(const std::string& path, const Measurement& y) {
  WriteFileAtomically(path, SerializeMeasurement(y));
}

Measurement ReadMeasurementFile(const std::string& path) {
  return DeserializeMeasurement(ReadFileBytes(path));
}

Eigen::MatrixXd ReadMatrixFile(const std::string& path) {
  const std::vector<uint8_t> bytes = ReadFileBytes(path);
  Reader r(bytes);
  const uint64_t rows = r.U32(), cols = r.U32();
  r.Expect(rows * cols, 8);
  Eigen::MatrixXd m(rows, cols);
  for (uint64_t i = 0; i < rows; ++i) {
    for (uint64_t j = 0; j < cols; ++j) m(i, j) = r.F64();
  }
  if (!r.AtEnd()) throw Error(ErrorCode::kMalformed, "trailing bytes in " + path);
  return m;
}

void WriteMatrixFile(const std::string& path, const Eigen::MatrixXd& m) {
  Writer w;
  w.U32(m.rows());
  w.U32(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) w.F64(m(i, j));
  }
  WriteFileAtomically(path, w.Take());
}

}  // namespace ddr
