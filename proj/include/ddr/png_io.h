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

#ifndef DDR_PNG_IO_H_
#define DDR_PNG_IO_H_

#include <string>

#include "ddr/image.h"

namespace ddr {

// Loads any PNG as 8-bit RGB into a Byte255 tensor. Alpha is dropped.
ImageTensor ReadPng(const std::string& path);

// Writes 1- or 3-channel images as 8-bit PNG after converting to Byte255,
// clamping and rounding. The file is written to a temporary name and renamed.
void WritePng(const std::string& path, const ImageTensor& image);

}  // namespace ddr

#endif  // DDR_PNG_IO_H_
