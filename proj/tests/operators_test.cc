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

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "ddr/error.h"
#include "ddr/file_io.h"
#include "ddr/operator.h"
#include "test_util.h"

namespace ddr {
namespace {

using test::RandomImage;

Eigen::MatrixXd RandomMatrix(Eigen::Index m, Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> d;
  Eigen::MatrixXd h(m, n);
  for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = d(rng);
  return h;
}

// Pseudo-inverse from an SVD with an explicit cutoff, independent of the
// decomposition the operator uses.
Eigen::MatrixXd SvdPinv(const Eigen::MatrixXd& h) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double cutoff = 1e-12 * s(0) * std::max(h.rows(), h.cols());
  Eigen::MatrixXd sinv = Eigen::MatrixXd::Zero(h.cols(), h.rows());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff) sinv(i, i) = 1.0 / s(i);
  }
  return svd.matrixV() * sinv * svd.matrixU().transpose();
}

ImageTensor Unit01(std::vector<double> v) {
  const size_t n = v.size();
  return ImageTensor(1, n, 1, Domain::kUnit01, std::move(v));
}

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kDenoiser;
}

TEST(BitDepthTest, Examples) {
  LevelTensor l = BitDepthEncode(Unit01({0.7}), 1);
  EXPECT_EQ(l.levels[0], 1.0);
  EXPECT_EQ(BitDepthDecode(l).data()[0], 0.75);

  l = BitDepthEncode(Unit01({0.5}), 3);
  EXPECT_EQ(l.levels[0], 4.0);
  EXPECT_EQ(BitDepthDecode(l).data()[0], 0.5625);

  for (int bits = 1; bits <= 8; ++bits) {
    l = BitDepthEncode(Unit01({1.0, 0.0}), bits);
    EXPECT_EQ(l.levels[0], std::ldexp(1.0, bits) - 1);
    EXPECT_EQ(l.levels[1], 0.0);
  }
}

TEST(BitDepthTest, Errors) {
  EXPECT_EQ(CodeOf([] { BitDepthEncode(ImageTensor(1, 1, 1, Domain::kByte255), 3); }),
            ErrorCode::kDomainMismatch);
  EXPECT_EQ(CodeOf([] { BitDepthEncode(Unit01({0.5}), 0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { BitDepthOperator(9); }), ErrorCode::kInvalidArgument);
}

TEST(BitDepthTest, PropertyOneIsExact) {
  std::mt19937_64 rng(30);
  for (int bits = 1; bits <= 8; ++bits) {
    const BitDepthOperator op(bits);
    std::vector<ImageTensor> corpus;
    for (int i = 0; i < 4; ++i) corpus.push_back(RandomImage(9, 13, 3, Domain::kUnit01, rng));
    const Property1Report r = VerifyProperty1(op, corpus);
    EXPECT_TRUE(r.passed);
    EXPECT_EQ(r.fraction_exact, 1.0);
    EXPECT_EQ(r.max_deviation, 0.0);
  }
}

TEST(BitDepthTest, EightBitResidualIsHalfABin) {
  std::mt19937_64 rng(31);
  std::vector<ImageTensor> corpus{RandomImage(20, 20, 3, Domain::kUnit01, rng)};
  const Property2Report r = VerifyProperty2(BitDepthOperator(8), corpus);
  EXPECT_LE(r.max_abs_residual, std::ldexp(1.0, -9) + 1e-15);
}

TEST(IdentityTest, BothPropertiesTrivial) {
  std::mt19937_64 rng(32);
  std::vector<ImageTensor> corpus{RandomImage(8, 8, 3, Domain::kByte255, rng),
                                  RandomImage(5, 7, 1, Domain::kUnit01, rng)};
  const IdentityOperator op;
  EXPECT_EQ(VerifyProperty1(op, corpus).fraction_exact, 1.0);
  // Byte255 -> Signed11 -> Byte255 is not bit-exact in binary floating point.
  EXPECT_LT(VerifyProperty2(op, corpus).mean_relative_residual, 1e-15);
  std::vector<ImageTensor> native{RandomImage(8, 8, 3, Domain::kSigned11, rng)};
  EXPECT_EQ(VerifyProperty2(op, native).mean_relative_residual, 0.0);
}

TEST(PropertyHarnessTest, EmptyCorpus) {
  const IdentityOperator op;
  EXPECT_EQ(CodeOf([&] { VerifyProperty1(op, {}); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([&] { VerifyProperty2(op, {}); }), ErrorCode::kInvalidArgument);
}

TEST(PropertyHarnessTest, JpegQf10OnRandomImages) {
  std::mt19937_64 rng(33);
  std::vector<ImageTensor> corpus;
  for (int i = 0; i < 50; ++i) corpus.push_back(RandomImage(32, 32, 3, Domain::kByte255, rng));
  const auto op = MakeOperator("jpeg:qf=10");
  const Property1Report r = VerifyProperty1(*op, corpus);
  EXPECT_TRUE(r.passed);
  EXPECT_GE(r.fraction_exact, 0.999);
  EXPECT_LE(r.max_deviation, 1.0);
}

TEST(LinearTest, PseudoInverseMatchesSvdOracle) {
  std::mt19937_64 rng(34);
  for (auto [m, n] : {std::pair{6, 10}, std::pair{10, 6}, std::pair{7, 7}}) {
    const Eigen::MatrixXd h = RandomMatrix(m, n, rng);
    const LinearOperator op(h);
    const Eigen::MatrixXd& p = op.pseudo_inverse();
    EXPECT_LT((p - SvdPinv(h)).norm(), 1e-10 * p.norm());
    EXPECT_LT((h * p * h - h).norm(), 1e-8 * h.norm());
    EXPECT_LT((p * h * p - p).norm(), 1e-8 * p.norm());
  }
}

TEST(LinearTest, RankDeficient) {
  std::mt19937_64 rng(35);
  const Eigen::MatrixXd h = RandomMatrix(8, 3, rng) * RandomMatrix(3, 10, rng);
  const LinearOperator op(h);
  EXPECT_LT((op.pseudo_inverse() - SvdPinv(h)).norm(), 1e-8 * op.pseudo_inverse().norm());
}

TEST(LinearTest, IdentityAndScaledIdentity) {
  const LinearOperator id(Eigen::MatrixXd::Identity(4, 4));
  const ImageTensor x(1, 4, 1, Domain::kSigned11, {0.1, -0.2, 0.3, 0.9});
  EXPECT_LT(test::MaxAbsDiff(id.Decode(id.Encode(x)), x), 1e-15);

  const LinearOperator two(2.0 * Eigen::MatrixXd::Identity(4, 4));
  Measurement y{"linear", LinearMeasurement{1, 4, 1, {2, 4, 6, 8}}};
  const ImageTensor d = two.Decode(y);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(d.data()[i], i + 1.0, 1e-14);
}

TEST(LinearTest, DecodeIsMinimumNorm) {
  std::mt19937_64 rng(36);
  const Eigen::MatrixXd h = RandomMatrix(6, 10, rng);
  const LinearOperator op(h);
  const ImageTensor x = RandomImage(2, 5, 1, Domain::kSigned11, rng);
  const ImageTensor xhat = op.Decode(op.Encode(x));
  EXPECT_EQ(xhat.height(), 2u);
  EXPECT_EQ(xhat.width(), 5u);
  const Eigen::Map<const Eigen::VectorXd> xh(xhat.data().data(), 10);
  const Eigen::Map<const Eigen::VectorXd> xv(x.data().data(), 10);
  EXPECT_LT((h * xh - h * xv).norm(), 1e-10);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(h);
  const Eigen::MatrixXd null = lu.kernel();
  ASSERT_EQ(null.cols(), 4);
  std::normal_distribution<double> d;
  for (int k = 0; k < 100; ++k) {
    Eigen::VectorXd c(null.cols());
    for (auto& v : c) v = d(rng);
    const Eigen::VectorXd alt = xh + null * c;
    ASSERT_LT((h * alt - h * xh).norm(), 1e-9);
    EXPECT_LE(xh.norm(), alt.norm() + 1e-12);
  }
}

TEST(LinearTest, ProjectionResidualIsNullSpaceEnergy) {
  // Orthogonal projection onto the first 5 coordinates of a random basis.
  std::mt19937_64 rng(37);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(RandomMatrix(10, 10, rng));
  const Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd u = q.leftCols(5);
  const LinearOperator op(u * u.transpose());

  std::vector<ImageTensor> corpus;
  std::vector<double> want;
  std::normal_distribution<double> d(0.0, 0.3);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd a(5), b(5);
    for (auto& v : a) v = d(rng);
    for (auto& v : b) v = d(rng);
    const Eigen::VectorXd xv = u * a + q.rightCols(5) * b;
    corpus.emplace_back(1, 10, 1, Domain::kSigned11,
                        std::vector<double>(xv.data(), xv.data() + 10));
    want.push_back(b.norm() / xv.norm());
  }
  const Property2Report r2 = VerifyProperty2(op, corpus);
  ASSERT_EQ(r2.relative_residual.size(), want.size());
  for (size_t i = 0; i < want.size(); ++i) {
    EXPECT_NEAR(r2.relative_residual[i], want[i], 1e-8);
  }
  const Property1Report r1 = VerifyProperty1(op, corpus);
  EXPECT_TRUE(r1.passed);
  EXPECT_LT(r1.max_deviation, 1e-8);
}

TEST(LinearTest, RejectsBadMatrices) {
  EXPECT_EQ(CodeOf([] { LinearOperator(Eigen::MatrixXd(0, 3)); }),
            ErrorCode::kInvalidArgument);
  EXPECT_EQ(CodeOf([] { LinearOperator(Eigen::MatrixXd::Zero(2, 513)); }),
            ErrorCode::kInvalidArgument);
  Eigen::MatrixXd nan = Eigen::MatrixXd::Zero(2, 2);
  nan(0, 1) = std::nan("");
  EXPECT_EQ(CodeOf([&] { LinearOperator{nan}; }), ErrorCode::kInvalidArgument);
  const LinearOperator op(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(CodeOf([&] { op.Encode(ImageTensor(1, 4, 1, Domain::kSigned11)); }),
            ErrorCode::kShapeMismatch);
}

TEST(LinearTest, DecodeFallsBackToRowShape) {
  const LinearOperator op(Eigen::MatrixXd::Identity(6, 6));
  Measurement y{"linear", LinearMeasurement{0, 0, 0, {1, 2, 3, 4, 5, 6}}};
  const ImageTensor d = op.Decode(y);
  EXPECT_EQ(d.height(), 1u);
  EXPECT_EQ(d.width(), 6u);
  EXPECT_EQ(d.channels(), 1u);
}

TEST(MatrixFileTest, RoundTripAndLayout) {
  test::TempDir dir;
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, -6.5;
  WriteMatrixFile(dir.File("h.bin"), m);
  const auto bytes = test::ReadBytes(dir.File("h.bin"));
  ASSERT_EQ(bytes.size(), 8u + 6 * 8);
  EXPECT_EQ(bytes[0], 2);
  EXPECT_EQ(bytes[4], 3);
  double second;
  std::memcpy(&second, bytes.data() + 16, 8);
  EXPECT_EQ(second, 2.0);  // row-major
  EXPECT_EQ(ReadMatrixFile(dir.File("h.bin")), m);

  std::vector<uint8_t> cut(bytes.begin(), bytes.end() - 1);
  WriteFileAtomically(dir.File("cut.bin"), cut);
  EXPECT_EQ(CodeOf([&] { ReadMatrixFile(dir.File("cut.bin")); }), ErrorCode::kMalformed);
  EXPECT_EQ(CodeOf([&] { ReadMatrixFile(dir.File("none.bin")); }), ErrorCode::kIo);
}

TEST(DescriptorTest, Grammar) {
  EXPECT_EQ(MakeOperator("identity")->Descriptor(), "identity");
  EXPECT_EQ(MakeOperator("jpeg:qf=10")->Descriptor(), "jpeg:qf=10:sub=420");
  EXPECT_EQ(MakeOperator("jpeg:qf=10:sub=444")->Descriptor(), "jpeg:qf=10:sub=444");
  EXPECT_EQ(MakeOperator("jpeg:sub=444:qf=7:up=smooth")->Descriptor(),
            "jpeg:qf=7:sub=444:up=smooth");
  EXPECT_EQ(MakeOperator("bits:3")->Descriptor(), "bits:3");

  const std::string file = "jpeg:file=" + test::Fixture("ref_q10_444.jpg");
  const auto op = MakeOperator(file);
  EXPECT_EQ(op->Descriptor(), file);
  const auto* jop = dynamic_cast<const JpegOperator*>(op.get());
  ASSERT_NE(jop, nullptr);
  EXPECT_EQ(jop->params().luma, QuantTableForQf(10, AnnexKLuminance()));

  test::TempDir dir;
  WriteMatrixFile(dir.File("h.bin"), Eigen::MatrixXd::Identity(3, 3));
  EXPECT_EQ(MakeOperator("linear:" + dir.File("h.bin"))->Descriptor(),
            "linear:" + dir.File("h.bin"));
}

TEST(DescriptorTest, Rejections) {
  for (const char* d : {"", "jpeg", "jpeg:", "jpeg:qf=0", "jpeg:qf=101", "jpeg:qf=abc",
                        "jpeg:qf=10:sub=422", "jpeg:qf=10:foo=1", "jpeg:sub=444",
                        "jpeg:qf=10:up=cubic", "jpeg:file=", "bits:0", "bits:9",
                        "bits:", "bits:3x", "blur:3", "IDENTITY"}) {
    EXPECT_EQ(CodeOf([&] { MakeOperator(d); }), ErrorCode::kInvalidArgument) << d;
  }
}

TEST(SerializationTest, RoundTripEveryKind) {
  std::mt19937_64 rng(38);
  const ImageTensor x = RandomImage(17, 21, 3, Domain::kByte255, rng);
  test::TempDir dir;
  WriteMatrixFile(dir.File("h.bin"), RandomMatrix(20, 17 * 3, rng) * 0.1);
  const ImageTensor small = RandomImage(17, 1, 3, Domain::kByte255, rng);

  std::vector<std::pair<std::unique_ptr<MeasurementOperator>, ImageTensor>> cases;
  cases.emplace_back(MakeOperator("identity"), x);
  cases.emplace_back(MakeOperator("jpeg:qf=30"), x);
  cases.emplace_back(MakeOperator("jpeg:qf=80:sub=444"), x);
  cases.emplace_back(MakeOperator("jpeg:file=" + test::Fixture("ref_q50_420.jpg")), x);
  cases.emplace_back(MakeOperator("bits:5"), x);
  cases.emplace_back(MakeOperator("linear:" + dir.File("h.bin")), small);
  for (const auto& [op, img] : cases) {
    const Measurement y = op->Encode(img);
    const std::string path = dir.File("y.meas");
    WriteMeasurementFile(path, y);
    const Measurement back = ReadMeasurementFile(path);
    EXPECT_EQ(back, y) << op->Descriptor();
    EXPECT_EQ(op->Decode(back), op->Decode(y)) << op->Descriptor();
    const auto rebuilt = OperatorForMeasurement(back);
    EXPECT_EQ(rebuilt->Descriptor(), op->Descriptor());
    EXPECT_EQ(rebuilt->Decode(back), op->Decode(y)) << op->Descriptor();
  }
}

TEST(SerializationTest, MalformedContainers) {
  std::mt19937_64 rng(39);
  const auto op = MakeOperator("jpeg:qf=50");
  const std::vector<uint8_t> good =
      SerializeMeasurement(op->Encode(RandomImage(16, 16, 3, Domain::kByte255, rng)));
  const auto code = [](std::vector<uint8_t> b) {
    return CodeOf([&] { DeserializeMeasurement(b); });
  };
  EXPECT_EQ(code({}), ErrorCode::kMalformed);
  auto bad = good;
  bad[0] = 'X';
  EXPECT_EQ(code(bad), ErrorCode::kMalformed);
  bad = good;
  bad[4] = 2;  // version
  EXPECT_EQ(code(bad), ErrorCode::kMalformed);
  bad = good;
  bad[8] = 9;  // kind
  EXPECT_EQ(code(bad), ErrorCode::kMalformed);
  bad = good;
  bad.push_back(0);
  EXPECT_EQ(code(bad), ErrorCode::kMalformed);
  for (size_t n = 0; n < good.size(); n += 97) {
    EXPECT_EQ(code({good.begin(), good.begin() + n}), ErrorCode::kMalformed) << n;
  }
}

TEST(SerializationTest, FlattenCoversEveryValue) {
  const Measurement y{"bits:2", LevelTensor{1, 3, 1, 2, {0, 3, 1}}};
  EXPECT_EQ(FlattenMeasurement(y), (std::vector<double>{0, 3, 1}));
}

}  // namespace
}  // namespace ddr
