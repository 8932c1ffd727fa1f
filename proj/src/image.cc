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

#include "ddr/image.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "ddr/error.h"

namespace ddr {

std::string_view DomainName(Domain domain) {
  switch (domain) {
    case Domain::kUnit01: return "unit01";
    case Domain::kSigned11: return "signed11";
    case Domain::kByte255: return "byte255";
  }
  return "unknown";
}

ImageTensor::ImageTensor(size_t height, size_t width, size_t channels,
                         Domain domain)
    : height_(height),
      width_(width),
      channels_(channels),
      domain_(domain),
      data_(height * width * channels, 0.0) {}

ImageTensor::ImageTensor(size_t height, size_t width, size_t channels,
                         Domain domain, std::vector<double> data)
    : height_(height),
      width_(width),
      channels_(channels),
      domain_(domain),
      data_(std::move(data)) {
  if (data_.size() != height * width * channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "data length " + std::to_string(data_.size()) +
                    " does not match " + std::to_string(height) + "x" +
                    std::to_string(width) + "x" + std::to_string(channels));
  }
}

void ImageTensor::RequireDomain(Domain domain) const {
  if (domain_ != domain) {
    throw Error(ErrorCode::kDomainMismatch,
                "expected " + std::string(DomainName(domain)) + ", got " +
                    std::string(DomainName(domain_)));
  }
}

void ImageTensor::RequireFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kInvalidArgument, "non-finite sample in image");
    }
  }
}

namespace {

// Each domain is an affine image of [0, 1]: v = scale * u + offset.
struct Affine {
  double scale;
  double offset;
};

Affine FromUnit(Domain d) {
  switch (d) {
    case Domain::kUnit01: return {1.0, 0.0};
    case Domain::kSigned11: return {2.0, -1.0};
    case Domain::kByte255: return {255.0, 0.0};
  }
  return {1.0, 0.0};
}

}  // namespace

ImageTensor ConvertDomain(const ImageTensor& image, Domain target) {
  if (image.domain() == target) return image;
  const Affine from = FromUnit(image.domain());
  const Affine to = FromUnit(target);
  std::vector<double> out(image.size());
  auto in = image.data();
  for (size_t i = 0; i < out.size(); ++i) {
    const double unit = (in[i] - from.offset) / from.scale;
    out[i] = unit * to.scale + to.offset;
  }
  return ImageTensor(image.height(), image.width(), image.channels(), target,
                     std::move(out));
}

namespace {

void RequireRgbLike(const ImageTensor& img) {
  img.RequireDomain(Domain::kByte255);
  if (img.channels() != 3) {
    throw Error(ErrorCode::kDomainMismatch,
                "color transform needs 3 channels, got " +
                    std::to_string(img.channels()));
  }
}

}  // namespace

ImageTensor RgbToYcbcr(const ImageTensor& rgb) {
  RequireRgbLike(rgb);
  ImageTensor out(rgb.height(), rgb.width(), 3, Domain::kByte255);
  auto src = rgb.data();
  auto dst = out.data();
  const long n = static_cast<long>(rgb.pixel_count());
#pragma omp parallel for schedule(static)
  for (long p = 0; p < n; ++p) {
    const double r = src[3 * p], g = src[3 * p + 1], b = src[3 * p + 2];
    dst[3 * p] = 0.299 * r + 0.587 * g + 0.114 * b;
    dst[3 * p + 1] = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    dst[3 * p + 2] = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
  }
  return out;
}

namespace {

// Exact inverse of the forward matrix above, computed once in long double.
struct InverseColorMatrix {
  double m[3][3];
  InverseColorMatrix() {
    const long double f[3][3] = {{0.299L, 0.587L, 0.114L},
                                 {-0.168736L, -0.331264L, 0.5L},
                                 {0.5L, -0.418688L, -0.081312L}};
    const long double det =
        f[0][0] * (f[1][1] * f[2][2] - f[1][2] * f[2][1]) -
        f[0][1] * (f[1][0] * f[2][2] - f[1][2] * f[2][0]) +
        f[0][2] * (f[1][0] * f[2][1] - f[1][1] * f[2][0]);
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        // Cofactor transpose.
        const int r0 = (j + 1) % 3, r1 = (j + 2) % 3;
        const int c0 = (i + 1) % 3, c1 = (i + 2) % 3;
        m[i][j] = static_cast<double>(
            (f[r0][c0] * f[r1][c1] - f[r0][c1] * f[r1][c0]) / det);
      }
    }
  }
};

const InverseColorMatrix& InverseColor() {
  static const InverseColorMatrix inv;
  return inv;
}

}  // namespace

ImageTensor YcbcrToRgb(const ImageTensor& ycbcr) {
  RequireRgbLike(ycbcr);
  const auto& inv = InverseColor().m;
  ImageTensor out(ycbcr.height(), ycbcr.width(), 3, Domain::kByte255);
  auto src = ycbcr.data();
  auto dst = out.data();
  const long n = static_cast<long>(ycbcr.pixel_count());
#pragma omp parallel for schedule(static)
  for (long p = 0; p < n; ++p) {
    const double y = src[3 * p];
    const double cb = src[3 * p + 1] - 128.0;
    const double cr = src[3 * p + 2] - 128.0;
    for (int c = 0; c < 3; ++c) {
      dst[3 * p + c] = inv[c][0] * y + inv[c][1] * cb + inv[c][2] * cr;
    }
  }
  return out;
}

ImageTensor QuantizeToBytes(const ImageTensor& image) {
  ImageTensor bytes = ConvertDomain(image, Domain::kByte255);
  for (double& v : bytes.data()) {
    v = std::round(std::clamp(v, 0.0, 255.0));
  }
  return bytes;
}

Plane ExtractChannel(const ImageTensor& image, size_t channel) {
  Plane plane(image.height(), image.width());
  for (size_t y = 0; y < image.height(); ++y) {
    for (size_t x = 0; x < image.width(); ++x) {
      plane.at(y, x) = image.at(y, x, channel);
    }
  }
  return plane;
}

void InsertChannel(const Plane& plane, size_t channel, ImageTensor& image) {
  if (plane.height != image.height() || plane.width != image.width()) {
    throw Error(ErrorCode::kShapeMismatch, "plane does not match image");
  }
  for (size_t y = 0; y < image.height(); ++y) {
    for (size_t x = 0; x < image.width(); ++x) {
      image.at(y, x, channel) = plane.at(y, x);
    }
  }
}

Plane PadReplicate(const Plane& plane, size_t height, size_t width) {
  if (plane.height == 0 || plane.width == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot pad an empty plane");
  }
  Plane out(height, width);
  for (size_t y = 0; y < height; ++y) {
    const size_t sy = std::min(y, plane.height - 1);
    for (size_t x = 0; x < width; ++x) {
      out.at(y, x) = plane.at(sy, std::min(x, plane.width - 1));
    }
  }
  return out;
}

Plane Crop(const Plane& plane, size_t height, size_t width) {
  Plane out(height, width);
  for (size_t y = 0; y < height; ++y) {
    std::copy_n(plane.data.begin() + y * plane.width, width,
                out.data.begin() + y * width);
  }
  return out;
}

BlockGrid TileBlocks(const Plane& plane) {
  if (plane.height == 0 || plane.width == 0) {
    throw Error(ErrorCode::kInvalidArgument, "cannot tile an empty plane");
  }
  BlockGrid grid;
  grid.height = plane.height;
  grid.width = plane.width;
  grid.padded_height = (plane.height + 7) / 8 * 8;
  grid.padded_width = (plane.width + 7) / 8 * 8;
  const Plane padded =
      PadReplicate(plane, grid.padded_height, grid.padded_width);
  grid.blocks.resize(grid.blocks_y() * grid.blocks_x());
  for (size_t by = 0; by < grid.blocks_y(); ++by) {
    for (size_t bx = 0; bx < grid.blocks_x(); ++bx) {
      Block& b = grid.block(by, bx);
      for (size_t i = 0; i < 8; ++i) {
        for (size_t j = 0; j < 8; ++j) {
          b[i * 8 + j] = padded.at(by * 8 + i, bx * 8 + j);
        }
      }
    }
  }
  return grid;
}

Plane UntileBlocks(const BlockGrid& grid) {
  if (grid.blocks.size() != grid.blocks_y() * grid.blocks_x() ||
      grid.height == 0 || grid.width == 0 || grid.height > grid.padded_height ||
      grid.width > grid.padded_width) {
    throw Error(ErrorCode::kShapeMismatch, "inconsistent block grid");
  }
  Plane out(grid.height, grid.width);
  for (size_t y = 0; y < grid.height; ++y) {
    for (size_t x = 0; x < grid.width; ++x) {
      out.at(y, x) = grid.block(y / 8, x / 8)[(y % 8) * 8 + x % 8];
    }
  }
  return out;
}

}  // namespace ddr
