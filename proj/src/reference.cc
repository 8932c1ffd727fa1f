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

#include "ddr/reference.h"

#include <Eigen/Dense>
#include <cmath>

#include "ddr/error.h"

namespace ddr::reference {

namespace {

size_t HalfUp(size_t n) { return (n + 1) / 2; }

BlockGrid ForwardPlane(const Plane& plane, const QuantTable& table) {
  BlockGrid grid = TileBlocks(plane);
  for (Block& b : grid.blocks) {
    const Block coeffs = Dct8x8(b);
    for (int k = 0; k < 64; ++k) b[k] = std::round(coeffs[k] / table.values[k]);
  }
  return grid;
}

Plane InversePlane(const BlockGrid& levels, const QuantTable& table) {
  BlockGrid grid = levels;
  for (Block& b : grid.blocks) {
    Block dequant;
    for (int k = 0; k < 64; ++k) dequant[k] = b[k] * table.values[k];
    b = Idct8x8(dequant);
  }
  return UntileBlocks(grid);
}

Eigen::Matrix3d ForwardColor() {
  Eigen::Matrix3d m;
  m << 0.299, 0.587, 0.114, -0.168736, -0.331264, 0.5, 0.5, -0.418688,
      -0.081312;
  return m;
}

}  // namespace

JpegCoefficients JpegEncode(const ImageTensor& image,
                            const JpegParams& params) {
  image.RequireDomain(Domain::kByte255);
  if (image.channels() != 3 || image.pixel_count() == 0) {
    throw Error(ErrorCode::kDomainMismatch,
                "JPEG encode needs a non-empty 3-channel image");
  }
  JpegCoefficients out;
  out.height = image.height();
  out.width = image.width();
  out.params = params;
  out.params.luma = params.luma.ToRaster();
  out.params.chroma = params.chroma.ToRaster();

  // Same expression order as the production transform so levels match
  // exactly.
  ImageTensor ycc(image.height(), image.width(), 3, Domain::kByte255);
  for (size_t p = 0; p < image.pixel_count(); ++p) {
    const double r = image.data()[3 * p], g = image.data()[3 * p + 1],
                 b = image.data()[3 * p + 2];
    ycc.data()[3 * p] = 0.299 * r + 0.587 * g + 0.114 * b - 128.0;
    ycc.data()[3 * p + 1] = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b - 128.0;
    ycc.data()[3 * p + 2] = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b - 128.0;
  }
  for (size_t c = 0; c < 3; ++c) {
    Plane plane = ExtractChannel(ycc, c);
    if (c > 0 && params.subsampling == Subsampling::k420) {
      plane = Subsample420(PadReplicate(plane, 2 * HalfUp(plane.height),
                                        2 * HalfUp(plane.width)));
    }
    out.planes[c] =
        ForwardPlane(plane, c == 0 ? out.params.luma : out.params.chroma);
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
  // Eigen's inverse rather than the production cofactor form.
  const Eigen::Matrix3d inv = ForwardColor().inverse();
  ImageTensor rgb(coeffs.height, coeffs.width, 3, Domain::kByte255);
  for (size_t p = 0; p < rgb.pixel_count(); ++p) {
    const Eigen::Vector3d v(ycc.data()[3 * p] + 128.0, ycc.data()[3 * p + 1],
                            ycc.data()[3 * p + 2]);
    const Eigen::Vector3d out = inv * v;
    for (int c = 0; c < 3; ++c) rgb.data()[3 * p + c] = out[c];
  }
  return rgb;
}

ImageTensor GmmDenoise(const GmmPrior& prior, const ImageTensor& x_t,
                       double alpha_t) {
  prior.Validate();
  x_t.RequireDomain(Domain::kSigned11);
  const size_t n = prior.dim();
  if (x_t.size() % n != 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "image size is not a multiple of the prior dimension");
  }
  ImageTensor out(x_t.height(), x_t.width(), x_t.channels(), Domain::kSigned11);
  for (size_t i = 0; i < x_t.size(); i += n) {
    GmmPosteriorMean(prior, x_t.data().subspan(i, n), alpha_t,
                     out.data().subspan(i, n));
  }
  return out;
}

}  // namespace ddr::reference
