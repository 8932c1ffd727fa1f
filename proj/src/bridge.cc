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

#include "ddr/bridge.h"

#include <errno.h>
#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "ddr/error.h"

extern char** environ;

namespace ddr {

static_assert(std::endian::native == std::endian::little,
              "frame payloads are written in host order");

namespace {

using Clock = std::chrono::steady_clock;

void PutU32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint32_t GetU32(const uint8_t* p) {
  return uint32_t{p[0]} | uint32_t{p[1]} << 8 | uint32_t{p[2]} << 16 |
         uint32_t{p[3]} << 24;
}

std::string FormatHeader(const std::map<std::string, std::string>& header) {
  std::string out;
  for (const auto& [k, v] : header) {
    if (k.empty() || k.find_first_of("=\n") != std::string::npos ||
        v.find('\n') != std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "bad header entry '" + k + "'");
    }
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

std::map<std::string, std::string> ParseHeader(std::string_view text) {
  std::map<std::string, std::string> header;
  while (!text.empty()) {
    const size_t nl = text.find('\n');
    if (nl == std::string_view::npos) {
      throw Error(ErrorCode::kMalformedFrame, "unterminated header line");
    }
    const std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl + 1);
    const size_t eq = line.find('=');
    if (eq == std::string_view::npos || eq == 0) {
      throw Error(ErrorCode::kMalformedFrame,
                  "header line without key: '" + std::string(line) + "'");
    }
    header[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
  }
  return header;
}

void CheckLengths(uint32_t header_len, uint32_t payload_len) {
  if (header_len > kMaxHeaderBytes) {
    throw Error(ErrorCode::kMalformedFrame,
                "header length " + std::to_string(header_len) + " too large");
  }
  if (payload_len > kMaxPayloadBytes || payload_len % 4 != 0) {
    throw Error(ErrorCode::kMalformedFrame,
                "bad payload length " + std::to_string(payload_len));
  }
}

std::vector<float> PayloadFromBytes(const uint8_t* p, size_t n) {
  std::vector<float> out(n / 4);
  if (n) std::memcpy(out.data(), p, n);
  return out;
}

int RemainingMs(Clock::time_point deadline, bool forever) {
  if (forever) return -1;
  const auto left =
      std::chrono::duration_cast<std::chrono::milliseconds>(deadline -
                                                            Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(left.count());
}

void ReadExact(int fd, uint8_t* buf, size_t n, Clock::time_point deadline,
               bool forever) {
  size_t got = 0;
  while (got < n) {
    pollfd pfd{fd, POLLIN, 0};
    const int r = poll(&pfd, 1, RemainingMs(deadline, forever));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kProtocol, std::string("poll: ") + strerror(errno));
    }
    if (r == 0) throw Error(ErrorCode::kTimeout, "no response from bridge");
    const ssize_t k = read(fd, buf + got, n - got);
    if (k < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw Error(ErrorCode::kProtocol, std::string("read: ") + strerror(errno));
    }
    if (k == 0) {
      throw Error(got == 0 && n > 0 ? ErrorCode::kProtocol
                                    : ErrorCode::kMalformedFrame,
                  "bridge closed the connection");
    }
    got += static_cast<size_t>(k);
  }
}

void WriteAll(int fd, const uint8_t* buf, size_t n, Clock::time_point deadline,
              bool forever) {
  size_t sent = 0;
  while (sent < n) {
    pollfd pfd{fd, POLLOUT, 0};
    const int r = poll(&pfd, 1, RemainingMs(deadline, forever));
    if (r < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kProtocol, std::string("poll: ") + strerror(errno));
    }
    if (r == 0) throw Error(ErrorCode::kTimeout, "bridge not accepting input");
    // send() on sockets so a dead peer yields EPIPE instead of SIGPIPE;
    // fall back to write() for pipes and regular files.
    ssize_t k = send(fd, buf + sent, n - sent, MSG_NOSIGNAL);
    if (k < 0 && errno == ENOTSOCK) k = write(fd, buf + sent, n - sent);
    if (k < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      throw Error(ErrorCode::kProtocol,
                  std::string("write: ") + strerror(errno));
    }
    sent += static_cast<size_t>(k);
  }
}

std::vector<float> ToF32(const ImageTensor& x) {
  std::vector<float> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = static_cast<float>(x.data()[i]);
  return out;
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

const std::string& BridgeFrame::Get(const std::string& key) const {
  const auto it = header.find(key);
  if (it == header.end()) {
    throw Error(ErrorCode::kProtocol, "frame lacks '" + key + "'");
  }
  return it->second;
}

std::string FormatDims(size_t h, size_t w, size_t c) {
  return std::to_string(h) + "," + std::to_string(w) + "," + std::to_string(c);
}

std::vector<uint8_t> EncodeFrame(const BridgeFrame& frame) {
  const std::string header = FormatHeader(frame.header);
  const size_t payload_bytes = frame.payload.size() * 4;
  if (header.size() > kMaxHeaderBytes || payload_bytes > kMaxPayloadBytes) {
    throw Error(ErrorCode::kInvalidArgument, "frame too large");
  }
  std::vector<uint8_t> out;
  out.reserve(8 + header.size() + payload_bytes);
  PutU32(out, static_cast<uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  PutU32(out, static_cast<uint32_t>(payload_bytes));
  const size_t at = out.size();
  out.resize(at + payload_bytes);
  if (payload_bytes) std::memcpy(out.data() + at, frame.payload.data(), payload_bytes);
  return out;
}

BridgeFrame DecodeFrame(std::span<const uint8_t> bytes) {
  auto need = [&](size_t pos, size_t n) {
    if (bytes.size() < pos || bytes.size() - pos < n) {
      throw Error(ErrorCode::kMalformedFrame, "truncated frame");
    }
  };
  need(0, 4);
  const uint32_t header_len = GetU32(bytes.data());
  if (header_len > kMaxHeaderBytes) CheckLengths(header_len, 0);
  need(4, header_len);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data() + 4),
                              header_len);
  need(4 + header_len, 4);
  const uint32_t payload_len = GetU32(bytes.data() + 4 + header_len);
  CheckLengths(header_len, payload_len);
  const size_t start = 8 + size_t{header_len};
  need(start, payload_len);
  if (bytes.size() != start + payload_len) {
    throw Error(ErrorCode::kMalformedFrame, "trailing bytes after frame");
  }
  BridgeFrame frame;
  frame.header = ParseHeader(text);
  frame.payload = PayloadFromBytes(bytes.data() + start, payload_len);
  return frame;
}

BridgeFrame ReadFrame(int fd, std::chrono::milliseconds timeout) {
  const bool forever = timeout.count() < 0;
  const auto deadline = Clock::now() + (forever ? std::chrono::milliseconds(0)
                                                : timeout);
  uint8_t len[4];
  ReadExact(fd, len, 4, deadline, forever);
  const uint32_t header_len = GetU32(len);
  if (header_len > kMaxHeaderBytes) CheckLengths(header_len, 0);
  std::string text(header_len, '\0');
  try {
    ReadExact(fd, reinterpret_cast<uint8_t*>(text.data()), header_len, deadline,
              forever);
    ReadExact(fd, len, 4, deadline, forever);
  } catch (const Error& e) {
    // EOF inside a frame is a framing error, not a clean disconnect.
    if (e.code() == ErrorCode::kProtocol) {
      throw Error(ErrorCode::kMalformedFrame, "truncated frame");
    }
    throw;
  }
  const uint32_t payload_len = GetU32(len);
  CheckLengths(header_len, payload_len);
  std::vector<uint8_t> payload(payload_len);
  try {
    ReadExact(fd, payload.data(), payload_len, deadline, forever);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kProtocol) {
      throw Error(ErrorCode::kMalformedFrame, "truncated payload");
    }
    throw;
  }
  BridgeFrame frame;
  frame.header = ParseHeader(text);
  frame.payload = PayloadFromBytes(payload.data(), payload.size());
  return frame;
}

void WriteFrame(int fd, const BridgeFrame& frame,
                std::chrono::milliseconds timeout) {
  const bool forever = timeout.count() < 0;
  const auto deadline = Clock::now() + (forever ? std::chrono::milliseconds(0)
                                                : timeout);
  const std::vector<uint8_t> bytes = EncodeFrame(frame);
  WriteAll(fd, bytes.data(), bytes.size(), deadline, forever);
}

BridgeClient::BridgeClient(const std::string& command,
                           std::chrono::milliseconds timeout)
    : timeout_(timeout) {
  if (command.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty bridge command");
  }
  int sv[2];
  if (socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, sv) != 0) {
    throw Error(ErrorCode::kIo, std::string("socketpair: ") + strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, sv[1], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, sv[1], STDOUT_FILENO);
  const std::string script = "exec " + command;
  const char* argv[] = {"/bin/sh", "-c", script.c_str(), nullptr};
  const int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr,
                             const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(sv[1]);
  if (rc != 0) {
    close(sv[0]);
    pid_ = -1;
    throw Error(ErrorCode::kIo, "spawn '" + command + "': " + strerror(rc));
  }
  fd_ = sv[0];
}

BridgeClient::~BridgeClient() { Close(); }

void BridgeClient::Close() {
  if (fd_ >= 0) {
    close(fd_);
    fd_ = -1;
  }
  if (pid_ > 0) {
    // Give a well-behaved bridge a moment to exit on EOF.
    for (int i = 0; i < 20; ++i) {
      if (waitpid(pid_, nullptr, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    kill(pid_, SIGKILL);
    waitpid(pid_, nullptr, 0);
    pid_ = -1;
  }
}

BridgeFrame BridgeClient::Call(const BridgeFrame& request) {
  if (fd_ < 0) throw Error(ErrorCode::kProtocol, "bridge connection closed");
  try {
    WriteFrame(fd_, request, timeout_);
    BridgeFrame response = ReadFrame(fd_, timeout_);
    const auto op = response.header.find("op");
    if (op == response.header.end()) {
      throw Error(ErrorCode::kMalformedFrame, "response without op");
    }
    if (op->second == "error") {
      const auto msg = response.header.find("message");
      throw Error(ErrorCode::kRemote, msg == response.header.end()
                                          ? std::string("(no message)")
                                          : msg->second);
    }
    if (op->second != "result") {
      throw Error(ErrorCode::kProtocol, "unexpected op '" + op->second + "'");
    }
    return response;
  } catch (const Error& e) {
    // Remote errors leave the stream in sync; everything else does not.
    if (e.code() != ErrorCode::kRemote) Close();
    throw;
  }
}

ImageTensor BridgeClient::ExpectImage(const BridgeFrame& response,
                                      const ImageTensor& like) {
  const std::string want = FormatDims(like.height(), like.width(), like.channels());
  const auto dims = response.header.find("dims");
  const std::string got =
      dims == response.header.end() ? std::string("(none)") : dims->second;
  if (got != want || response.payload.size() != like.size()) {
    Close();
    throw Error(ErrorCode::kProtocol, "expected dims " + want + ", got " + got +
                                          " with " +
                                          std::to_string(response.payload.size()) +
                                          " values");
  }
  std::vector<double> data(response.payload.begin(), response.payload.end());
  for (double v : data) {
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::kProtocol, "bridge returned non-finite values");
    }
  }
  return ImageTensor(like.height(), like.width(), like.channels(),
                     Domain::kSigned11, std::move(data));
}

ImageTensor BridgeClient::Echo(const ImageTensor& x) {
  BridgeFrame req;
  req.header = {{"op", "echo"},
                {"dims", FormatDims(x.height(), x.width(), x.channels())},
                {"dtype", "f32"}};
  req.payload = ToF32(x);
  ImageTensor out = ExpectImage(Call(req), x);
  return ImageTensor(x.height(), x.width(), x.channels(), x.domain(),
                     std::vector<double>(out.data().begin(), out.data().end()));
}

ImageTensor BridgeClient::Denoise(const ImageTensor& x_t, int t,
                                  double alpha_t) {
  x_t.RequireDomain(Domain::kSigned11);
  BridgeFrame req;
  req.header = {{"op", "denoise"},
                {"t", std::to_string(t)},
                {"alpha", FormatDouble(alpha_t)},
                {"dims", FormatDims(x_t.height(), x_t.width(), x_t.channels())},
                {"dtype", "f32"}};
  req.payload = ToF32(x_t);
  return ExpectImage(Call(req), x_t);
}

double BridgeClient::Lpips(const ImageTensor& a, const ImageTensor& b) {
  if (!a.SameShape(b)) {
    throw Error(ErrorCode::kShapeMismatch, "LPIPS inputs differ in shape");
  }
  const ImageTensor sa = ConvertDomain(a, Domain::kSigned11);
  const ImageTensor sb = ConvertDomain(b, Domain::kSigned11);
  BridgeFrame req;
  req.header = {{"op", "lpips"},
                {"dims", FormatDims(a.height(), a.width(), a.channels())},
                {"dtype", "f32"}};
  req.payload = ToF32(sa);
  const std::vector<float> fb = ToF32(sb);
  req.payload.insert(req.payload.end(), fb.begin(), fb.end());
  const BridgeFrame resp = Call(req);
  const std::string& score = resp.Get("score");
  double v = 0.0;
  const auto res = std::from_chars(score.data(), score.data() + score.size(), v);
  if (res.ec != std::errc() || res.ptr != score.data() + score.size()) {
    throw Error(ErrorCode::kProtocol, "bad lpips score '" + score + "'");
  }
  return v;
}

std::string ResolveBridgeCommand(const std::string& fallback) {
  const char* env = std::getenv("DDR_BRIDGE_CMD");
  if (env != nullptr && *env != '\0') return env;
  return fallback;
}

BridgeDenoiser::BridgeDenoiser(std::string command,
                               std::chrono::milliseconds timeout)
    : command_(std::move(command)), timeout_(timeout) {
  if (command_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty bridge command");
  }
}

std::unique_ptr<BridgeClient> BridgeDenoiser::Checkout() const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    if (!idle_.empty()) {
      auto c = std::move(idle_.back());
      idle_.pop_back();
      return c;
    }
  }
  return std::make_unique<BridgeClient>(command_, timeout_);
}

void BridgeDenoiser::Return(std::unique_ptr<BridgeClient> client) const {
  if (!client->is_open()) return;
  std::lock_guard<std::mutex> lock(mu_);
  idle_.push_back(std::move(client));
}

ImageTensor BridgeDenoiser::Denoise(const ImageTensor& x_t, int t,
                                    double alpha_t) const {
  auto client = Checkout();
  ImageTensor out = client->Denoise(x_t, t, alpha_t);
  Return(std::move(client));
  return out;
}

}  // namespace ddr
