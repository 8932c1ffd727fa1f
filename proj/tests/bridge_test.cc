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

#include <gtest/gtest.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <random>

#include "ddr/bridge.h"
#include "ddr/error.h"
#include "ddr/operator.h"
#include "ddr/sampler.h"
#include "ddr/synthetic.h"
#include "test_util.h"

namespace ddr {
namespace {

using namespace std::chrono_literals;
using Bytes = std::vector<uint8_t>;

std::string Fake(const std::string& mode) { return test::FakeBridge() + " " + mode; }

ErrorCode CodeOf(const std::function<void()>& fn, std::string* what = nullptr) {
  try {
    fn();
  } catch (const Error& e) {
    if (what) *what = e.what();
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kDenoiser;
}

Bytes Le32(uint32_t v) {
  return {static_cast<uint8_t>(v), static_cast<uint8_t>(v >> 8),
          static_cast<uint8_t>(v >> 16), static_cast<uint8_t>(v >> 24)};
}

Bytes Concat(std::initializer_list<Bytes> parts) {
  Bytes out;
  for (const Bytes& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

Bytes Text(const std::string& s) { return Bytes(s.begin(), s.end()); }

struct SocketPair {
  int a = -1, b = -1;
  SocketPair() {
    int sv[2];
    EXPECT_EQ(socketpair(AF_UNIX, SOCK_STREAM, 0, sv), 0);
    a = sv[0];
    b = sv[1];
  }
  ~SocketPair() {
    if (a >= 0) close(a);
    if (b >= 0) close(b);
  }
  void Send(const Bytes& bytes) const {
    ASSERT_EQ(write(b, bytes.data(), bytes.size()), static_cast<ssize_t>(bytes.size()));
  }
  void CloseWriter() {
    close(b);
    b = -1;
  }
};

TEST(FrameTest, GoldenBytes) {
  const BridgeFrame f{{{"op", "echo"}, {"dims", "1,1,2"}}, {1.0f, -2.0f}};
  const Bytes want = Concat({Le32(19), Text("dims=1,1,2\nop=echo\n"), Le32(8),
                             {0x00, 0x00, 0x80, 0x3F}, {0x00, 0x00, 0x00, 0xC0}});
  EXPECT_EQ(EncodeFrame(f), want);
  EXPECT_EQ(DecodeFrame(want), f);
}

TEST(FrameTest, EmptyFrame) {
  const BridgeFrame f;
  EXPECT_EQ(EncodeFrame(f), Concat({Le32(0), Le32(0)}));
  EXPECT_EQ(DecodeFrame(EncodeFrame(f)), f);
}

TEST(FrameTest, RoundTripPreservesFloatBits) {
  BridgeFrame f{{{"op", "denoise"}, {"alpha", "0.12345678901234566"}, {"t", "17"}}, {}};
  std::mt19937 rng(80);
  for (int i = 0; i < 1000; ++i) {
    uint32_t bits = rng();
    float v;
    std::memcpy(&v, &bits, 4);
    if (std::isnan(v)) v = 0.5f;
    f.payload.push_back(v);
  }
  f.payload.push_back(-0.0f);
  f.payload.push_back(std::numeric_limits<float>::denorm_min());
  EXPECT_EQ(DecodeFrame(EncodeFrame(f)), f);
}

TEST(FrameTest, MalformedFrames) {
  const Bytes good = EncodeFrame({{{"op", "echo"}}, {1.0f}});
  const auto code = [](const Bytes& b) { return CodeOf([&] { DecodeFrame(b); }); };
  EXPECT_EQ(code({}), ErrorCode::kMalformedFrame);
  for (size_t n = 1; n < good.size(); ++n) {
    EXPECT_EQ(code({good.begin(), good.begin() + n}), ErrorCode::kMalformedFrame) << n;
  }
  Bytes trailing = good;
  trailing.push_back(0);
  EXPECT_EQ(code(trailing), ErrorCode::kMalformedFrame);
  EXPECT_EQ(code(Concat({Le32(8), Text("op=echo\n"), Le32(6), Bytes(6, 0)})),
            ErrorCode::kMalformedFrame);  // payload not a multiple of 4
  EXPECT_EQ(code(Concat({Le32(5), Text("oops\n"), Le32(0)})), ErrorCode::kMalformedFrame);
  EXPECT_EQ(code(Concat({Le32(3), Text("=x\n"), Le32(0)})), ErrorCode::kMalformedFrame);
  EXPECT_EQ(code(Concat({Le32(7), Text("op=echo"), Le32(0)})), ErrorCode::kMalformedFrame);
  EXPECT_EQ(code(Concat({Le32(kMaxHeaderBytes + 1), Bytes(16, 'a')})),
            ErrorCode::kMalformedFrame);
  EXPECT_EQ(code(Concat({Le32(0), Le32(kMaxPayloadBytes + 4)})), ErrorCode::kMalformedFrame);
}

TEST(FrameTest, HeaderValuesMayContainEquals) {
  const BridgeFrame f = DecodeFrame(Concat({Le32(14), Text("message=a=b c\n"), Le32(0)}));
  EXPECT_EQ(f.Get("message"), "a=b c");
  EXPECT_EQ(CodeOf([&] { f.Get("op"); }), ErrorCode::kProtocol);
}

TEST(FrameTest, UnencodableHeaders) {
  EXPECT_EQ(CodeOf([] { EncodeFrame({{{"a=b", "1"}}, {}}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { EncodeFrame({{{"", "1"}}, {}}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { EncodeFrame({{{"k", "two\nlines"}}, {}}); }),
            ErrorCode::kInvalidArgument);
}

TEST(FrameIoTest, ReadWriteOverSocket) {
  SocketPair s;
  const BridgeFrame f{{{"op", "result"}, {"dims", "1,3,1"}}, {0.25f, 0.5f, -1.0f}};
  WriteFrame(s.b, f, 1s);
  WriteFrame(s.b, f, 1s);
  EXPECT_EQ(ReadFrame(s.a, 1s), f);
  EXPECT_EQ(ReadFrame(s.a, -1ms), f);
}

TEST(FrameIoTest, TimeoutOnSilence) {
  SocketPair s;
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(CodeOf([&] { ReadFrame(s.a, 100ms); }), ErrorCode::kTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 2s);
  // A partial frame followed by silence also times out.
  s.Send(Le32(8));
  EXPECT_EQ(CodeOf([&] { ReadFrame(s.a, 100ms); }), ErrorCode::kTimeout);
}

TEST(FrameIoTest, EofBetweenAndInsideFrames) {
  {
    SocketPair s;
    s.CloseWriter();
    EXPECT_EQ(CodeOf([&] { ReadFrame(s.a, 1s); }), ErrorCode::kProtocol);
  }
  {
    SocketPair s;
    s.Send(Concat({Le32(8), Text("op=e")}));
    s.CloseWriter();
    EXPECT_EQ(CodeOf([&] { ReadFrame(s.a, 1s); }), ErrorCode::kMalformedFrame);
  }
  {
    SocketPair s;
    s.Send(Concat({Le32(8), Text("op=echo\n"), Le32(8), Bytes(4, 0)}));
    s.CloseWriter();
    EXPECT_EQ(CodeOf([&] { ReadFrame(s.a, 1s); }), ErrorCode::kMalformedFrame);
  }
  {
    SocketPair s;
    s.Send(Concat({Le32(kMaxHeaderBytes + 1)}));
    EXPECT_EQ(CodeOf([&] { ReadFrame(s.a, 1s); }), ErrorCode::kMalformedFrame);
  }
}

ImageTensor FloatImage(size_t h, size_t w, size_t c, std::mt19937_64& rng) {
  ImageTensor x = test::RandomImage(h, w, c, Domain::kSigned11, rng);
  for (double& v : x.data()) v = static_cast<float>(v);
  return x;
}

TEST(BridgeClientTest, EchoIsBitExact) {
  std::mt19937_64 rng(81);
  BridgeClient client(Fake("echo"), 10s);
  for (int i = 0; i < 3; ++i) {
    const ImageTensor x = FloatImage(7, 5, 3, rng);
    EXPECT_EQ(client.Echo(x), x);
    EXPECT_EQ(client.Denoise(x, 10, 0.5), x);
  }
  EXPECT_TRUE(client.is_open());
}

TEST(BridgeClientTest, RequestHeaders) {
  test::TempDir dir;
  {
    BridgeClient client(Fake("record " + dir.File("req.txt")), 10s);
    client.Denoise(ImageTensor(2, 1, 3, Domain::kSigned11), 250, 0.1);
    client.Echo(ImageTensor(1, 2, 1, Domain::kUnit01));
  }
  std::ifstream in(dir.File("req.txt"));
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(text,
            "alpha=0.1\ndims=2,1,3\ndtype=f32\nop=denoise\nt=250\npayload=6\n\n"
            "dims=1,2,1\ndtype=f32\nop=echo\npayload=2\n\n");
}

TEST(BridgeClientTest, RemoteErrorKeepsConnection) {
  BridgeClient client(Fake("error"), 10s);
  const ImageTensor x(1, 2, 1, Domain::kSigned11);
  std::string what;
  EXPECT_EQ(CodeOf([&] { client.Denoise(x, 42, 0.5); }, &what), ErrorCode::kRemote);
  EXPECT_NE(what.find("model exploded at t=42"), std::string::npos) << what;
  EXPECT_TRUE(client.is_open());
  EXPECT_EQ(CodeOf([&] { client.Denoise(x, 7, 0.5); }, &what), ErrorCode::kRemote);
  EXPECT_NE(what.find("t=7"), std::string::npos) << what;
}

TEST(BridgeClientTest, WrongDimsIsProtocolError) {
  BridgeClient client(Fake("wrong-dims"), 10s);
  std::string what;
  EXPECT_EQ(CodeOf([&] { client.Denoise(ImageTensor(2, 3, 1, Domain::kSigned11), 1, 0.5); },
                   &what),
            ErrorCode::kProtocol);
  EXPECT_NE(what.find("expected dims 2,3,1, got 3,2,1"), std::string::npos) << what;
  EXPECT_FALSE(client.is_open());
  EXPECT_EQ(CodeOf([&] { client.Echo(ImageTensor(2, 3, 1, Domain::kSigned11)); }),
            ErrorCode::kProtocol);
}

TEST(BridgeClientTest, GarbageAndTruncatedReplies) {
  const ImageTensor x(1, 4, 1, Domain::kSigned11);
  for (const char* mode : {"garbage", "truncated"}) {
    BridgeClient client(Fake(mode), 10s);
    EXPECT_EQ(CodeOf([&] { client.Denoise(x, 1, 0.5); }), ErrorCode::kMalformedFrame) << mode;
    EXPECT_FALSE(client.is_open());
  }
}

TEST(BridgeClientTest, CrashedPeerFailsFast) {
  BridgeClient client(Fake("crash"), 10s);
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(CodeOf([&] { client.Denoise(ImageTensor(1, 4, 1, Domain::kSigned11), 1, 0.5); }),
            ErrorCode::kProtocol);
  EXPECT_LT(std::chrono::steady_clock::now() - start, 5s);
}

TEST(BridgeClientTest, MissingExecutable) {
  BridgeClient client("/nonexistent/bridge --flag", 10s);
  EXPECT_EQ(CodeOf([&] { client.Echo(ImageTensor(1, 1, 1, Domain::kSigned11)); }),
            ErrorCode::kProtocol);
}

TEST(BridgeClientTest, HungPeerTimesOut) {
  const auto start = std::chrono::steady_clock::now();
  {
    BridgeClient client(Fake("hang"), 200ms);
    EXPECT_EQ(CodeOf([&] { client.Denoise(ImageTensor(1, 4, 1, Domain::kSigned11), 1, 0.5); }),
              ErrorCode::kTimeout);
    EXPECT_FALSE(client.is_open());
  }
  EXPECT_LT(std::chrono::steady_clock::now() - start, 3s);
}

TEST(BridgeClientTest, Lpips) {
  BridgeClient client(Fake("lpips"), 10s);
  const ImageTensor a(1, 2, 1, Domain::kUnit01, {0.0, 1.0});
  const ImageTensor b(1, 2, 1, Domain::kUnit01, {0.5, 1.0});
  // In Signed11 the halves are (-1, 1) and (0, 1): mean squared diff 0.5.
  EXPECT_EQ(client.Lpips(a, b), 0.5);
  EXPECT_EQ(client.Lpips(a, a), 0.0);
  EXPECT_EQ(CodeOf([&] { client.Lpips(a, ImageTensor(2, 1, 1, Domain::kUnit01)); }),
            ErrorCode::kShapeMismatch);
}

TEST(BridgeClientTest, EmptyCommand) {
  EXPECT_EQ(CodeOf([] { BridgeClient("", 1s); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { BridgeDenoiser(""); }), ErrorCode::kInvalidArgument);
}

TEST(BridgeCommandTest, EnvironmentOverride) {
  unsetenv("DDR_BRIDGE_CMD");
  EXPECT_EQ(ResolveBridgeCommand("python -m bridge"), "python -m bridge");
  setenv("DDR_BRIDGE_CMD", "", 1);
  EXPECT_EQ(ResolveBridgeCommand("python -m bridge"), "python -m bridge");
  setenv("DDR_BRIDGE_CMD", "/opt/b --ckpt x", 1);
  EXPECT_EQ(ResolveBridgeCommand("python -m bridge"), "/opt/b --ckpt x");
  unsetenv("DDR_BRIDGE_CMD");
}

// What the bridge computes, done in-process: f32 in, mixture mean, f32 out.
class FloatGmmDenoiser final : public Denoiser {
 public:
  explicit FloatGmmDenoiser(GmmPrior prior) : prior_(std::move(prior)) {}
  ImageTensor Denoise(const ImageTensor& x, int, double alpha) const override {
    std::vector<double> in(x.size());
    for (size_t i = 0; i < in.size(); ++i) in[i] = static_cast<float>(x.data()[i]);
    std::vector<double> out(in.size());
    const size_t n = prior_.dim();
    for (size_t i = 0; i < in.size(); i += n) {
      GmmPosteriorMean(prior_, std::span(in).subspan(i, n), alpha,
                       std::span(out).subspan(i, n));
    }
    for (double& v : out) v = static_cast<float>(v);
    return ImageTensor(x.height(), x.width(), x.channels(), Domain::kSigned11, out);
  }
  bool IsConcurrent() const override { return true; }

 private:
  GmmPrior prior_;
};

size_t CountLines(const std::string& path) {
  std::ifstream in(path);
  size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

TEST(BridgeDenoiserTest, RestoreMatchesInProcessDenoiser) {
  test::TempDir dir;
  const GmmPrior prior = MakeSyntheticPrior(0);
  std::ofstream(dir.File("prior.json")) << prior.ToJson();
  setenv("DDR_FAKE_BRIDGE_LOG", dir.File("starts.log").c_str(), 1);

  std::mt19937_64 rng(82);
  const ImageTensor truth(1, prior.dim(), 1, Domain::kSigned11, SamplePrior(prior, rng));
  const BitDepthOperator op(4);
  const Measurement y = op.Encode(truth);
  const DiffusionSchedule s = MakeSchedule(1000);
  SamplerConfig cfg;
  cfg.seed = 5;

  const BridgeDenoiser bridge(Fake("gmm " + dir.File("prior.json")), 30s);
  const RestorationResult got = Restore(y, op, bridge, cfg, s);
  const RestorationResult want = Restore(y, op, FloatGmmDenoiser(prior), cfg, s);
  EXPECT_EQ(got.samples, want.samples);
  EXPECT_EQ(got.average, want.average);

  // Connections are pooled: never more processes than chains.
  const size_t starts = CountLines(dir.File("starts.log"));
  EXPECT_GE(starts, 1u);
  EXPECT_LE(starts, static_cast<size_t>(cfg.num_samples));

  // A second run reuses the idle pool.
  Restore(y, op, bridge, cfg, s);
  EXPECT_EQ(CountLines(dir.File("starts.log")), starts);
  unsetenv("DDR_FAKE_BRIDGE_LOG");
}

TEST(BridgeDenoiserTest, FailuresSurfaceWithContext) {
  const BridgeDenoiser bridge(Fake("error"), 10s);
  const BitDepthOperator op(4);
  const ImageTensor x(1, 16, 1, Domain::kSigned11);
  std::string what;
  EXPECT_EQ(CodeOf([&] { Restore(op.Encode(x), op, bridge, SamplerConfig{}, MakeSchedule(1000)); },
                   &what),
            ErrorCode::kRemote);
  EXPECT_NE(what.find("chain "), std::string::npos) << what;
  EXPECT_NE(what.find("at t=300"), std::string::npos) << what;
}

TEST(BridgeDenoiserTest, BrokenConnectionsAreReplaced) {
  test::TempDir dir;
  setenv("DDR_FAKE_BRIDGE_LOG", dir.File("starts.log").c_str(), 1);
  const BridgeDenoiser bridge(Fake("crash"), 10s);
  const ImageTensor x(1, 4, 1, Domain::kSigned11);
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(CodeOf([&] { bridge.Denoise(x, 1, 0.5); }), ErrorCode::kProtocol);
  }
  EXPECT_EQ(CountLines(dir.File("starts.log")), 3u);
  unsetenv("DDR_FAKE_BRIDGE_LOG");
}

}  // namespace
}  // namespace ddr
