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

#include "ddr/png_io.h"

#include <png.h>

#include <cstdio>
#include <filesystem>
#include <vector>

#include "ddr/error.h"

namespace ddr {

ImageTensor ReadPng(const std::string& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw Error(ErrorCode::kIo, "cannot read PNG " + path + ": " +
                                    image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<png_byte> buffer(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, buffer.data(), 0, nullptr)) {
    const std::string message = image.message;
    png_image_free(&image);
    throw Error(ErrorCode::kIo, "cannot decode PNG " + path + ": " + message);
  }
  std::vector<double> data(buffer.begin(), buffer.end());
  return ImageTensor(image.height, image.width, 3, Domain::kByte255,
                     std::move(data));
}

void WritePng(const std::string& path, const ImageTensor& image) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument,
                "PNG export supports 1 or 3 channels");
  }
  const ImageTensor bytes = QuantizeToBytes(image);
  std::vector<png_byte> buffer(bytes.size());
  for (size_t i = 0; i < buffer.size(); ++i) {
    buffer[i] = static_cast<png_byte>(bytes.data()[i]);
  }
  png_image out{};
  out.version = PNG_IMAGE_VERSION;
  out.width = static_cast<png_uint_32>(image.width());
  out.height = static_cast<png_uint_32>(image.height());
  out.format = image.channels() == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;

  const std::string tmp = path + ".tmp";
  if (!png_image_write_to_file(&out, tmp.c_str(), 0, buffer.data(), 0,
                               nullptr)) {
    std::remove(tmp.c_str());
    throw Error(ErrorCode::kIo, "cannot write PNG " + path + ": " +
                                    out.message);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot rename to " + path);
}

}  // namespace ddr
