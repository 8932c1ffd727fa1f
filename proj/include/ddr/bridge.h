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

// Client for an external denoiser process speaking a framed protocol over
// its stdin/stdout.
//
// Frame (all lengths little-endian uint32):
//   header_len | header (UTF-8 "key=value" lines, '\n'-terminated)
//   | payload_len | payload (row-major little-endian float32)
//
// Requests:  op=denoise|echo|lpips, t, alpha, dims=H,W,C, dtype=f32
// Responses: op=result (same dims, or score=<x> for lpips)
//            op=error with message=<text>
// One request is in flight per connection.

#ifndef DDR_BRIDGE_H_
#define DDR_BRIDGE_H_

#include <sys/types.h>

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "ddr/denoiser.h"
#include "ddr/image.h"

namespace ddr {

inline constexpr uint32_t kMaxHeaderBytes = 64 * 1024;
inline constexpr uint32_t kMaxPayloadBytes = 1u << 30;

struct BridgeFrame {
  std::map<std::string, std::string> header;
  std::vector<float> payload;

  const std::string& Get(const std::string& key) const;

  friend bool operator==(const BridgeFrame&, const BridgeFrame&) = default;
};

std::vector<uint8_t> EncodeFrame(const BridgeFrame& frame);
// Parses exactly one frame occupying all of `bytes`. Throws kMalformedFrame.
BridgeFrame DecodeFrame(std::span<const uint8_t> bytes);

// Blocking frame I/O on a file descriptor. A negative timeout waits forever.
// Read throws kTimeout, kMalformedFrame, or kProtocol on EOF.
BridgeFrame ReadFrame(int fd, std::chrono::milliseconds timeout);
void WriteFrame(int fd, const BridgeFrame& frame,
                std::chrono::milliseconds timeout);

std::string FormatDims(size_t h, size_t w, size_t c);

// One child process and its connection. Any failure kills the child and
// leaves the client closed.
class BridgeClient {
 public:
  BridgeClient(const std::string& command, std::chrono::milliseconds timeout);
  ~BridgeClient();
  BridgeClient(const BridgeClient&) = delete;
  BridgeClient& operator=(const BridgeClient&) = delete;

  bool is_open() const { return fd_ >= 0; }

  // Raw round trip.
  BridgeFrame Call(const BridgeFrame& request);

  ImageTensor Echo(const ImageTensor& x);
  ImageTensor Denoise(const ImageTensor& x_t, int t, double alpha_t);
  double Lpips(const ImageTensor& a, const ImageTensor& b);

  void Close();

 private:
  ImageTensor ExpectImage(const BridgeFrame& response, const ImageTensor& like);

  int fd_ = -1;
  pid_t pid_ = -1;
  std::chrono::milliseconds timeout_;
};

// Command used when DDR_BRIDGE_CMD is set, otherwise `fallback`.
std::string ResolveBridgeCommand(const std::string& fallback);

// Pool of bridge processes; each concurrent caller checks out its own
// connection. Broken connections are discarded, not returned.
class BridgeDenoiser final : public Denoiser {
 public:
  explicit BridgeDenoiser(
      std::string command,
      std::chrono::milliseconds timeout = std::chrono::seconds(120));

  ImageTensor Denoise(const ImageTensor& x_t, int t,
                      double alpha_t) const override;
  bool IsConcurrent() const override { return true; }

 private:
  std::unique_ptr<BridgeClient> Checkout() const;
  void Return(std::unique_ptr<BridgeClient> client) const;

  std::string command_;
  std::chrono::milliseconds timeout_;
  mutable std::mutex mu_;
  mutable std::vector<std::unique_ptr<BridgeClient>> idle_;
};

}  // namespace ddr

#endif  // DDR_BRIDGE_H_
