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

#ifndef DDR_JFIF_H_
#define DDR_JFIF_H_

#include <cstdint>
#include <span>
#include <string>

#include "ddr/jpeg.h"

namespace ddr {

// Reads the quantization tables and chroma sampling layout from a JPEG
// interchange stream, stopping at the first SOS (or EOI).
//
// Table id 0 becomes the luma table and id 1 the chroma table; a stream with a
// single table uses it for both. Sampling comes from the first SOF0/1/2
// segment: equal factors on all components (or a single component) give 4:4:4,
// luma 2x2 over chroma 1x1 gives 4:2:0, anything else is rejected. A stream
// without any SOF before SOS/EOI is classified as 4:2:0.
//
// Errors: kNotAJpeg (no SOI), kMissingTables (no DQT before SOS/EOI),
// kMalformed (truncated or inconsistent segment), kUnsupportedSubsampling.
// Never reads outside `bytes`.
JpegParams ParseJfif(std::span<const uint8_t> bytes);

// Reads a whole file and parses it. Throws kIo if unreadable.
JpegParams ParseJfifFile(const std::string& path);

}  // namespace ddr

#endif  // DDR_JFIF_H_
