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

// Pixel decode of baseline/progressive JPEG files through libjpeg. Only the
// CLI needs this; the restoration pipeline never touches entropy coding.

#ifndef DDR_JPEG_READER_H_
#define DDR_JPEG_READER_H_

#include <string>

#include "ddr/image.h"

namespace ddr {

// RGB Byte255 pixels. Throws kIo, kNotAJpeg or kMalformed.
ImageTensor ReadJpegPixels(const std::string& path);

}  // namespace ddr

#endif  // DDR_JPEG_READER_H_
