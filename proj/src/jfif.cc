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

#include "ddr/jfif.h"

#include <array>
#include <fstream>
#include <iterator>
#include <optional>
#include <vector>

#include "ddr/error.h"

namespace ddr {

namespace {

constexpr uint8_t kSoi = 0xD8;
constexpr uint8_t kEoi = 0xD9;
constexpr uint8_t kSos = 0xDA;
constexpr uint8_t kDqt = 0xDB;
constexpr uint8_t kTem = 0x01;

bool IsSof(uint8_t m) { return m == 0xC0 || m == 0xC1 || m == 0xC2; }
bool IsRst(uint8_t m) { return m >= 0xD0 && m <= 0xD7; }

[[noreturn]] void Malformed(const std::string& what, size_t offset) {
  throw Error(ErrorCode::kMalformed,
              what + " at offset " + std::to_string(offset));
}

class Parser {
 public:
  explicit Parser(std::span<const uint8_t> bytes) : bytes_(bytes) {}

  JpegParams Run() {
    if (bytes_.size() < 2 || bytes_[0] != 0xFF || bytes_[1] != kSoi) {
      throw Error(ErrorCode::kNotAJpeg, "stream does not start with SOI");
    }
    size_t pos = 2;
    while (true) {
      if (pos >= bytes_.size()) Malformed("stream ends before SOS", pos);
      if (bytes_[pos] != 0xFF) Malformed("expected marker", pos);
      // Fill bytes: any number of 0xFF may precede the marker code.
      while (pos < bytes_.size() && bytes_[pos] == 0xFF) ++pos;
      if (pos >= bytes_.size()) Malformed("stream ends inside marker", pos);
      const uint8_t marker = bytes_[pos++];
      if (marker == kSos || marker == kEoi) break;
      if (marker == kTem || IsRst(marker)) continue;
      if (marker == kSoi || marker == 0x00) Malformed("unexpected marker", pos);

      if (bytes_.size() - pos < 2) Malformed("truncated segment length", pos);
      const size_t length = (size_t{bytes_[pos]} << 8) | bytes_[pos + 1];
      if (length < 2) Malformed("segment length below 2", pos);
      if (length > bytes_.size() - pos) Malformed("segment overruns stream", pos);
      const std::span<const uint8_t> body = bytes_.subspan(pos + 2, length - 2);
      if (marker == kDqt) {
        ReadDqt(body, pos + 2);
      } else if (IsSof(marker) && !subsampling_) {
        ReadSof(body, pos + 2);
      }
      pos += length;
    }
    return Finish();
  }

 private:
  void ReadDqt(std::span<const uint8_t> body, size_t base) {
    size_t i = 0;
    while (i < body.size()) {
      const uint8_t pq = body[i] >> 4;
      const uint8_t tq = body[i] & 0x0F;
      if (pq > 1) Malformed("DQT precision nibble", base + i);
      if (tq > 3) Malformed("DQT table id", base + i);
      ++i;
      const size_t entry_bytes = pq == 0 ? 1 : 2;
      if (body.size() - i < 64 * entry_bytes) {
        Malformed("truncated DQT table", base + i);
      }
      QuantTable table;
      table.order = TableOrder::kZigzag;
      for (int k = 0; k < 64; ++k) {
        uint16_t v = body[i];
        if (entry_bytes == 2) v = static_cast<uint16_t>((v << 8) | body[i + 1]);
        if (v == 0) Malformed("zero quantization entry", base + i);
        table.values[k] = v;
        i += entry_bytes;
      }
      tables_[tq] = table;
    }
  }

  void ReadSof(std::span<const uint8_t> body, size_t base) {
    if (body.size() < 6) Malformed("truncated SOF header", base);
    const size_t components = body[5];
    if (body.size() < 6 + 3 * components) {
      Malformed("truncated SOF components", base);
    }
    if (components == 1) {
      subsampling_ = Subsampling::k444;
      return;
    }
    if (components != 3) {
      throw Error(ErrorCode::kUnsupportedSubsampling,
                  std::to_string(components) + " components");
    }
    std::array<std::pair<int, int>, 3> factors;
    for (size_t c = 0; c < 3; ++c) {
      const uint8_t hv = body[6 + 3 * c + 1];
      factors[c] = {hv >> 4, hv & 0x0F};
    }
    if (factors[0] == factors[1] && factors[1] == factors[2]) {
      subsampling_ = Subsampling::k444;
    } else if (factors[0] == std::pair{2, 2} && factors[1] == std::pair{1, 1} &&
               factors[2] == std::pair{1, 1}) {
      subsampling_ = Subsampling::k420;
    } else {
      throw Error(ErrorCode::kUnsupportedSubsampling,
                  "luma " + std::to_string(factors[0].first) + "x" +
                      std::to_string(factors[0].second) + ", chroma " +
                      std::to_string(factors[1].first) + "x" +
                      std::to_string(factors[1].second));
    }
  }

  JpegParams Finish() const {
    const QuantTable* luma = nullptr;
    for (const auto& t : tables_) {
      if (t) {
        luma = &*t;
        break;
      }
    }
    if (tables_[0]) luma = &*tables_[0];
    if (luma == nullptr) {
      throw Error(ErrorCode::kMissingTables, "no DQT segment before SOS");
    }
    const QuantTable* chroma = tables_[1] ? &*tables_[1] : luma;
    JpegParams params;
    params.luma = luma->ToRaster();
    params.chroma = chroma->ToRaster();
    params.subsampling = subsampling_.value_or(Subsampling::k420);
    return params;
  }

  std::span<const uint8_t> bytes_;
  std::array<std::optional<QuantTable>, 4> tables_;
  std::optional<Subsampling> subsampling_;
};

}  // namespace

JpegParams ParseJfif(std::span<const uint8_t> bytes) {
  return Parser(bytes).Run();
}

JpegParams ParseJfifFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  const std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  return ParseJfif(bytes);
}

}  // namespace ddr
