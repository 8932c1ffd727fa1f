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

#include "ddr/jpeg.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ddr/error.h"

namespace ddr {

const std::array<int, 64> kZigzagToRaster = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

const std::array<int, 64> kRasterToZigzag = [] {
  std::array<int, 64> inv{};
  for (int k = 0; k < 64; ++k) inv[kZigzagToRaster[k]] = k;
  return inv;
}();

QuantTable QuantTable::ToRaster() const {
  QuantTable out;
  out.order = TableOrder::kRaster;
  for (int i = 0; i < 64; ++i) {
    const uint16_t v = order == TableOrder::kRaster
                           ? values[i]
                           : values[kRasterToZigzag[i]];
    if (v == 0) {
      throw Error(ErrorCode::kInvalidArgument, "quantization entry is zero");
    }
    out.values[i] = v;
  }
  return out;
}

const QuantTable& AnnexKLuminance() {
  static const QuantTable table{
      {16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
       14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
       18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
       49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99},
      TableOrder::kRaster};
  return table;
}

const QuantTable& AnnexKChrominance() {
  static const QuantTable table{
      {17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
       24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
       99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
       99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99},
      TableOrder::kRaster};
  return table;
}

QuantTable QuantTableForQf(int qf, const QuantTable& base) {
  if (qf < 1 || qf > 100) {
    throw Error(ErrorCode::kInvalidArgument,
                "quality factor must be in [1, 100], got " +
                    std::to_string(qf));
  }
  const long scale = qf < 50 ? 5000 / qf : 200 - 2 * qf;
  const QuantTable raster = base.ToRaster();
  QuantTable out;
  for (int i = 0; i < 64; ++i) {
    const long v = (raster.values[i] * scale + 50) / 100;
    out.values[i] = static_cast<uint16_t>(std::clamp(v, 1L, 255L));
  }
  return out;
}

std::string_view SubsamplingName(Subsampling s) {
  return s == Subsampling::k444 ? "444" : "420";
}

JpegParams JpegParams::FromQuality(int qf, Subsampling subsampling) {
  JpegParams p;
  p.luma = QuantTableForQf(qf, AnnexKLuminance());
  p.chroma = QuantTableForQf(qf, AnnexKChrominance());
  p.subsampling = subsampling;
  p.quality_factor = qf;
  return p;
}

namespace {

size_t HalfUp(size_t n) { return (n + 1) / 2; }

void ValidateGrid(const BlockGrid& g, size_t h, size_t w, const char* name) {
  const bool ok = g.height == h && g.width == w &&
                  g.padded_height == (h + 7) / 8 * 8 &&
                  g.padded_width == (w + 7) / 8 * 8 &&
                  g.blocks.size() == g.blocks_y() * g.blocks_x();
  if (!ok) {
    throw Error(ErrorCode::kShapeMismatch,
                std::string(name) + " plane expected " + std::to_string(h) +
                    "x" + std::to_string(w) + ", got " +
                    std::to_string(g.height) + "x" + std::to_string(g.width) +
                    " with " + std::to_string(g.blocks.size()) + " blocks");
  }
}

}  // namespace

void JpegCoefficients::Validate() const {
  if (height == 0 || width == 0) {
    throw Error(ErrorCode::kShapeMismatch, "empty coefficient tensor");
  }
  const bool sub = params.subsampling == Subsampling::k420;
  const size_t ch = sub ? HalfUp(height) : height;
  const size_t cw = sub ? HalfUp(width) : width;
  ValidateGrid(planes[0], height, width, "luma");
  ValidateGrid(planes[1], ch, cw, "cb");
  ValidateGrid(planes[2], ch, cw, "cr");
  for (const BlockGrid& g : planes) {
    for (const Block& b : g.blocks) {
      for (double v : b) {
        if (!std::isfinite(v) || v != std::trunc(v)) {
          throw Error(ErrorCode::kInvalidArgument,
                      "coefficient is not integer-valued");
        }
      }
    }
  }
}

namespace {

// kDctBasis[u][x] = c(u) cos((2x + 1) u pi / 16), c(0) = sqrt(1/8), else 1/2.
struct DctBasis {
  double m[8][8];
  DctBasis() {
    for (int u = 0; u < 8; ++u) {
      const double c = u == 0 ? std::sqrt(0.125) : 0.5;
      for (int x = 0; x < 8; ++x) {
        m[u][x] = c * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
    }
  }
};

const DctBasis& Basis() {
  static const DctBasis basis;
  return basis;
}

}  // namespace

Block Dct8x8(const Block& block) {
  const auto& c = Basis().m;
  double tmp[8][8];
  // Columns first: tmp[u][y] = sum_x c[u][x] b[x][y].
  for (int u = 0; u < 8; ++u) {
    for (int y = 0; y < 8; ++y) {
      double s = 0.0;
      for (int x = 0; x < 8; ++x) s += c[u][x] * block[x * 8 + y];
      tmp[u][y] = s;
    }
  }
  Block out;
  for (int u = 0; u < 8; ++u) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y) s += tmp[u][y] * c[v][y];
      out[u * 8 + v] = s;
    }
  }
  return out;
}

Block Idct8x8(const Block& coeffs) {
  const auto& c = Basis().m;
  double tmp[8][8];
  // tmp[x][v] = sum_u c[u][x] F[u][v].
  for (int x = 0; x < 8; ++x) {
    for (int v = 0; v < 8; ++v) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += c[u][x] * coeffs[u * 8 + v];
      tmp[x][v] = s;
    }
  }
  Block out;
  for (int x = 0; x < 8; ++x) {
    for (int y = 0; y < 8; ++y) {
      double s = 0.0;
      for (int v = 0; v < 8; ++v) s += tmp[x][v] * c[v][y];
      out[x * 8 + y] = s;
    }
  }
  return out;
}

Plane Subsample420(const Plane& plane) {
  if (plane.height % 2 != 0 || plane.width % 2 != 0) {
    throw Error(ErrorCode::kInvalidArgument,
                "4:2:0 subsampling needs even dims");
  }
  Plane out(plane.height / 2, plane.width / 2);
  for (size_t y = 0; y < out.height; ++y) {
    for (size_t x = 0; x < out.width; ++x) {
      const double sum = plane.at(2 * y, 2 * x) + plane.at(2 * y, 2 * x + 1) +
                         plane.at(2 * y + 1, 2 * x) +
                         plane.at(2 * y + 1, 2 * x + 1);
      out.at(y, x) = sum * 0.25;
    }
  }
  return out;
}

Plane Upsample420(const Plane& plane) {
  Plane out(plane.height * 2, plane.width * 2);
  for (size_t y = 0; y < out.height; ++y) {
    for (size_t x = 0; x < out.width; ++x) {
      out.at(y, x) = plane.at(y / 2, x / 2);
    }
  }
  return out;
}

Plane UpsampleSmooth(const Plane& plane) {
  const Plane up = Upsample420(plane);
  Plane out(up.height, up.width);
  constexpr double kTap[3] = {0.25, 0.5, 0.25};
  for (size_t y = 0; y < up.height; ++y) {
    for (size_t x = 0; x < up.width; ++x) {
      double s = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        const size_t yy = std::clamp<long>(static_cast<long>(y) + dy, 0,
                                           static_cast<long>(up.height) - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const size_t xx = std::clamp<long>(static_cast<long>(x) + dx, 0,
                                             static_cast<long>(up.width) - 1);
          s += kTap[dy + 1] * kTap[dx + 1] * up.at(yy, xx);
        }
      }
      out.at(y, x) = s;
    }
  }
  return out;
}

namespace {

// Level-shifted plane -> quantized levels. One block per iteration.
BlockGrid ForwardPlane(const Plane& plane, const QuantTable& table) {
  BlockGrid grid = TileBlocks(plane);
  const long n = static_cast<long>(grid.blocks.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    Block& b = grid.blocks[i];
    const Block coeffs = Dct8x8(b);
    for (int k = 0; k < 64; ++k) {
      // std::round ties away from zero.
      b[k] = std::round(coeffs[k] / table.values[k]);
    }
  }
  return grid;
}

Plane InversePlane(const BlockGrid& levels, const QuantTable& table) {
  BlockGrid grid = levels;
  const long n = static_cast<long>(grid.blocks.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    Block& b = grid.blocks[i];
    Block dequant;
    for (int k = 0; k < 64; ++k) dequant[k] = b[k] * table.values[k];
    b = Idct8x8(dequant);
  }
  return UntileBlocks(grid);
}

}  // namespace

JpegCoefficients JpegEncode(const ImageTensor& image,
                            const JpegParams& params) {
  image.RequireDomain(Domain::kByte255);
  if (image.channels() != 3 || image.pixel_count() == 0) {
    throw Error(ErrorCode::kDomainMismatch,
                "JPEG encode needs a non-empty 3-channel image");
  }
  const QuantTable luma = params.luma.ToRaster();
  const QuantTable chroma = params.chroma.ToRaster();

  JpegCoefficients out;
  out.height = image.height();
  out.width = image.width();
  out.params = params;
  out.params.luma = luma;
  out.params.chroma = chroma;

  ImageTensor ycc = RgbToYcbcr(image);
  for (double& v : ycc.data()) v -= 128.0;

  for (size_t c = 0; c < 3; ++c) {
    Plane plane = ExtractChannel(ycc, c);
    if (c > 0 && params.subsampling == Subsampling::k420) {
      plane = Subsample420(PadReplicate(plane, 2 * HalfUp(plane.height),
                                        2 * HalfUp(plane.width)));
    }
    out.planes[c] = ForwardPlane(plane, c == 0 ? luma : chroma);
  }
  return out;
}

ImageTensor JpegDecode(const JpegCoefficients& coeffs) {
  coeffs.Validate();
  const QuantTable luma = coeffs.params.luma.ToRaster();
  const QuantTable chroma = coeffs.params.chroma.ToRaster();
  ImageTensor ycc(coeffs.height, coeffs.width, 3, Domain::kByte255);
  for (size_t c = 0; c < 3; ++c) {
    Plane plane = InversePlane(coeffs.planes[c], c == 0 ? luma : chroma);
    if (c > 0 && coeffs.params.subsampling == Subsampling::k420) {
      plane = coeffs.params.upsampling == ChromaUpsampling::kReplicate
                  ? Upsample420(plane)
                  : UpsampleSmooth(plane);
      plane = Crop(plane, coeffs.height, coeffs.width);
    }
    InsertChannel(plane, c, ycc);
  }
  for (double& v : ycc.data()) v += 128.0;
  return YcbcrToRgb(ycc);
}

}  // namespace ddr
