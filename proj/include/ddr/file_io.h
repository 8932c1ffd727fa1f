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

#ifndef DDR_FILE_IO_H_
#define DDR_FILE_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ddr {

// Throws kIo.
std::vector<uint8_t> ReadFileBytes(const std::string& path);

// Writes `path + ".tmp"` then renames over `path`. Throws kIo.
void WriteFileAtomically(const std::string& path,
                         std::span<const uint8_t> bytes);
void WriteFileAtomically(const std::string& path, std::string_view text);

}  // namespace ddr

#endif  // DDR_FILE_IO_H_
