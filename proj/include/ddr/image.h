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

// Image tensors, value domains, color transforms and 8x8 block tiling.

#ifndef DDR_IMAGE_H_
#define DDR_IMAGE_H_

#include <array>
#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ddr {

// Value range a tensor's samples are expressed in. The tag is metadata only;
// operations state which domain they require and reject anything else.
enum class Domain {
  kUnit01,    // [0, 1]
  kSigned11,  // [-1, 1], the sampler's working domain
  kByte255,   // [0, 255], the JPEG pipeline's domain
};

std::string_view DomainName(Domain domain);

// H x W x C image, row-major with interleaved channels.
class ImageTensor {
 public:
  ImageTensor() = default;
  // Zero-filled.
  ImageTensor(size_t height, size_t width, size_t channels, Domain domain);
  // Takes ownership of `data`; its size must equal height * width * channels.
  ImageTensor(size_t height, size_t width, size_t channels, Domain domain,
              std::vector<double> data);

  size_t height() const { return height_; }
  size_t width() const { return width_; }
  size_t channels() const { return channels_; }
  size_t size() const { return data_.size(); }
  size_t pixel_count() const { return height_ * width_; }
  Domain domain() const { return domain_; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double& at(size_t y, size_t x, size_t c) {
    return data_[(y * width_ + x) * channels_ + c];
  }
  double at(size_t y, size_t x, size_t c) const {
    return data_[(y * width_ + x) * channels_ + c];
  }

  bool SameShape(const ImageTensor& other) const {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }

  // Throws kDomainMismatch unless the tensor is in `domain`.
  void RequireDomain(Domain domain) const;
  // Throws kInvalidArgument if any sample is NaN or infinite.
  void RequireFinite() const;

  friend bool operator==(const ImageTensor&, const ImageTensor&) = default;

 private:
  size_t height_ = 0;
  size_t width_ = 0;
  size_t channels_ = 0;
  Domain domain_ = Domain::kUnit01;
  std::vector<double> data_;
};

// Affine map between value domains. Same-domain conversion is an exact copy.
ImageTensor ConvertDomain(const ImageTensor& image, Domain target);

// JFIF full-range BT.601. Input must be 3-channel Byte255; Cb/Cr carry the
// +128 offset and the result is not clamped.
ImageTensor RgbToYcbcr(const ImageTensor& rgb);
ImageTensor YcbcrToRgb(const ImageTensor& ycbcr);

// Export helper: clamp to [0, 255] and round to nearest integer.
ImageTensor QuantizeToBytes(const ImageTensor& image);

// Single-channel sample plane.
struct Plane {
  size_t height = 0;
  size_t width = 0;
  std::vector<double> data;

  Plane() = default;
  Plane(size_t h, size_t w) : height(h), width(w), data(h * w, 0.0) {}

  double& at(size_t y, size_t x) { return data[y * width + x]; }
  double at(size_t y, size_t x) const { return data[y * width + x]; }

  friend bool operator==(const Plane&, const Plane&) = default;
};

Plane ExtractChannel(const ImageTensor& image, size_t channel);
void InsertChannel(const Plane& plane, size_t channel, ImageTensor& image);

// Replicates the last row/column until the plane is `height` x `width`.
Plane PadReplicate(const Plane& plane, size_t height, size_t width);
// Keeps the top-left `height` x `width` region.
Plane Crop(const Plane& plane, size_t height, size_t width);

using Block = std::array<double, 64>;

// A plane cut into 8x8 tiles, stored block-row-major. Blocks hold raster
// (row-major) samples, or coefficients once transformed.
struct BlockGrid {
  size_t height = 0;  // original plane height before padding
  size_t width = 0;
  size_t padded_height = 0;  // multiples of 8
  size_t padded_width = 0;
  std::vector<Block> blocks;

  size_t blocks_y() const { return padded_height / 8; }
  size_t blocks_x() const { return padded_width / 8; }
  Block& block(size_t by, size_t bx) { return blocks[by * blocks_x() + bx]; }
  const Block& block(size_t by, size_t bx) const {
    return blocks[by * blocks_x() + bx];
  }

  friend bool operator==(const BlockGrid&, const BlockGrid&) = default;
};

// Pads partial edge blocks by replicating the last row/column.
BlockGrid TileBlocks(const Plane& plane);
// Reassembles the padded plane and crops back to the original size.
Plane UntileBlocks(const BlockGrid& grid);

}  // namespace ddr

#endif  // DDR_IMAGE_H_
