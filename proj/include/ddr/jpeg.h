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

// The lossy part of baseline JPEG as a pair of maps between images and
// quantized DCT coefficients. Entropy coding is lossless and is not modeled:
// the coefficient tensor itself is the measurement.
//
// Encode:  RGB -> YCbCr -> -128 -> [4:2:0 box average] -> 8x8 tiles -> DCT
//          -> divide by table -> round half away from zero
// Decode:  multiply by table -> IDCT -> untile -> [replicate upsample]
//          -> +128 -> RGB, left unclamped and unrounded
//
// Box-average down / replicate up is the pairing for which down(up(p)) == p,
// so Encode(Decode(Encode(x))) == Encode(x) on block-aligned images.

#ifndef DDR_JPEG_H_
#define DDR_JPEG_H_

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "ddr/image.h"

namespace ddr {

// Zig-zag scan position -> raster index.
extern const std::array<int, 64> kZigzagToRaster;
// Raster index -> zig-zag scan position.
extern const std::array<int, 64> kRasterToZigzag;

enum class TableOrder { kRaster, kZigzag };

struct QuantTable {
  std::array<uint16_t, 64> values{};
  TableOrder order = TableOrder::kRaster;

  // Returns a raster-ordered copy. Throws kInvalidArgument on a zero entry.
  QuantTable ToRaster() const;

  friend bool operator==(const QuantTable&, const QuantTable&) = default;
};

// Luminance and chrominance tables from Annex K of the JPEG standard.
const QuantTable& AnnexKLuminance();
const QuantTable& AnnexKChrominance();

// libjpeg quality scaling: s = qf < 50 ? 5000 / qf : 200 - 2 qf,
// entry' = clamp((entry * s + 50) / 100, 1, 255) in integer arithmetic.
QuantTable QuantTableForQf(int qf, const QuantTable& base);

enum class Subsampling { k444, k420 };

std::string_view SubsamplingName(Subsampling s);

// Chroma upsampler used by the decoder. kSmooth (bilinear) breaks the
// down(up(p)) == p identity; it exists only as a negative control.
enum class ChromaUpsampling { kReplicate, kSmooth };

struct JpegParams {
  QuantTable luma;
  QuantTable chroma;
  Subsampling subsampling = Subsampling::k420;
  std::optional<int> quality_factor;  // absent when tables came from a file
  ChromaUpsampling upsampling = ChromaUpsampling::kReplicate;

  // Annex K tables scaled to `qf`.
  static JpegParams FromQuality(int qf, Subsampling subsampling);

  friend bool operator==(const JpegParams&, const JpegParams&) = default;
};

// Quantized coefficients for the Y, Cb and Cr planes. Each block holds
// integer-valued levels in raster order. `height`/`width` in each grid are the
// pre-padding plane dims: full size for luma, ceil(h/2) x ceil(w/2) for 4:2:0
// chroma.
struct JpegCoefficients {
  size_t height = 0;  // image dims
  size_t width = 0;
  JpegParams params;
  std::array<BlockGrid, 3> planes;

  // Throws kShapeMismatch unless plane geometry agrees with the image dims
  // and subsampling mode, or kInvalidArgument on a non-integer level.
  void Validate() const;

  friend bool operator==(const JpegCoefficients&,
                         const JpegCoefficients&) = default;
};

// Orthonormal 2-D DCT-II on a raster-ordered 8x8 block and its inverse.
Block Dct8x8(const Block& block);
Block Idct8x8(const Block& coeffs);

// 2x2 box average. Dims must be even.
Plane Subsample420(const Plane& plane);
// Pixel replication to 2x dims.
Plane Upsample420(const Plane& plane);
// Replication followed by a 3x3 binomial blur (edge-clamped). Box-averaging
// the result does not give the input back, so a decoder using it breaks
// Enc(Dec(Enc(x))) = Enc(x). Kept as a negative control for verify-op.
// (Centered bilinear would not do: its 2x2 box average is the identity away
// from the border.)
Plane UpsampleSmooth(const Plane& plane);

// Needs a 3-channel Byte255 image. Block loops run under OpenMP; results are
// bitwise independent of the thread count.
JpegCoefficients JpegEncode(const ImageTensor& image, const JpegParams& params);
// Returns a 3-channel Byte255 float image of the original dims.
ImageTensor JpegDecode(const JpegCoefficients& coeffs);

}  // namespace ddr

#endif  // DDR_JPEG_H_
