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

#include "ddr/operator.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "ddr/error.h"
#include "ddr/jfif.h"

namespace ddr {

namespace {

template <typename T>
const T& PayloadAs(const Measurement& y, const char* op) {
  const T* p = std::get_if<T>(&y.payload);
  if (p == nullptr) {
    throw Error(ErrorCode::kInvalidArgument,
                std::string(op) + " operator got a foreign measurement (" +
                    y.descriptor + ")");
  }
  return *p;
}

}  // namespace

std::vector<double> FlattenMeasurement(const Measurement& y) {
  std::vector<double> out;
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ImageTensor>) {
          out.assign(p.data().begin(), p.data().end());
        } else if constexpr (std::is_same_v<T, JpegCoefficients>) {
          for (const BlockGrid& g : p.planes) {
            for (const Block& b : g.blocks) out.insert(out.end(), b.begin(), b.end());
          }
        } else if constexpr (std::is_same_v<T, LevelTensor>) {
          out = p.levels;
        } else {
          out = p.values;
        }
      },
      y.payload);
  return out;
}

Measurement IdentityOperator::Encode(const ImageTensor& image) const {
  return {Descriptor(), ConvertDomain(image, Domain::kSigned11)};
}

ImageTensor IdentityOperator::Decode(const Measurement& y) const {
  return ConvertDomain(PayloadAs<ImageTensor>(y, "identity"),
                       Domain::kSigned11);
}

JpegOperator::JpegOperator(JpegParams params, std::string descriptor)
    : params_(std::move(params)), descriptor_(std::move(descriptor)) {
  params_.luma = params_.luma.ToRaster();
  params_.chroma = params_.chroma.ToRaster();
  if (descriptor_.empty()) {
    descriptor_ = "jpeg";
    if (params_.quality_factor) {
      descriptor_ += ":qf=" + std::to_string(*params_.quality_factor);
    }
    descriptor_ += ":sub=" + std::string(SubsamplingName(params_.subsampling));
    if (params_.upsampling == ChromaUpsampling::kSmooth) descriptor_ += ":up=smooth";
  }
}

Measurement JpegOperator::Encode(const ImageTensor& image) const {
  return {descriptor_,
          JpegEncode(ConvertDomain(image, Domain::kByte255), params_)};
}

ImageTensor JpegOperator::Decode(const Measurement& y) const {
  JpegCoefficients coeffs = PayloadAs<JpegCoefficients>(y, "jpeg");
  // Decode with this operator's upsampler; tables travel with the data.
  coeffs.params.upsampling = params_.upsampling;
  return ConvertDomain(JpegDecode(coeffs), Domain::kSigned11);
}

LevelTensor BitDepthEncode(const ImageTensor& image, int bits) {
  image.RequireDomain(Domain::kUnit01);
  if (bits < 1 || bits > 8) {
    throw Error(ErrorCode::kInvalidArgument, "bits must be in [1, 8]");
  }
  const double scale = std::ldexp(1.0, bits);
  LevelTensor out{image.height(), image.width(), image.channels(), bits, {}};
  out.levels.resize(image.size());
  auto in = image.data();
  for (size_t i = 0; i < in.size(); ++i) {
    out.levels[i] = std::clamp(std::floor(in[i] * scale), 0.0, scale - 1.0);
  }
  return out;
}

ImageTensor BitDepthDecode(const LevelTensor& levels) {
  if (levels.bits < 1 || levels.bits > 8) {
    throw Error(ErrorCode::kInvalidArgument, "bits must be in [1, 8]");
  }
  const double scale = std::ldexp(1.0, levels.bits);
  std::vector<double> data(levels.levels.size());
  for (size_t i = 0; i < data.size(); ++i) {
    data[i] = (levels.levels[i] + 0.5) / scale;
  }
  return ImageTensor(levels.height, levels.width, levels.channels,
                     Domain::kUnit01, std::move(data));
}

BitDepthOperator::BitDepthOperator(int bits_per_channel)
    : bits_(bits_per_channel) {
  if (bits_ < 1 || bits_ > 8) {
    throw Error(ErrorCode::kInvalidArgument, "bits must be in [1, 8]");
  }
}

std::string BitDepthOperator::Descriptor() const {
  return "bits:" + std::to_string(bits_);
}

Measurement BitDepthOperator::Encode(const ImageTensor& image) const {
  return {Descriptor(),
          BitDepthEncode(ConvertDomain(image, Domain::kUnit01), bits_)};
}

ImageTensor BitDepthOperator::Decode(const Measurement& y) const {
  return ConvertDomain(BitDepthDecode(PayloadAs<LevelTensor>(y, "bits")),
                       Domain::kSigned11);
}

LinearOperator::LinearOperator(Eigen::MatrixXd h, std::string descriptor)
    : h_(std::move(h)), descriptor_(std::move(descriptor)) {
  if (h_.rows() == 0 || h_.cols() == 0) {
    throw Error(ErrorCode::kInvalidArgument, "empty matrix");
  }
  if (h_.cols() > kMaxColumns) {
    throw Error(ErrorCode::kInvalidArgument,
                "dense pseudo-inverse limited to " +
                    std::to_string(kMaxColumns) + " columns");
  }
  if (!h_.allFinite()) {
    throw Error(ErrorCode::kInvalidArgument, "matrix has non-finite entries");
  }
  h_pinv_ = h_.completeOrthogonalDecomposition().pseudoInverse();
  if (descriptor_.empty()) {
    descriptor_ = "linear:" + std::to_string(h_.rows()) + "x" +
                  std::to_string(h_.cols());
  }
}

Measurement LinearOperator::Encode(const ImageTensor& image) const {
  const ImageTensor x = ConvertDomain(image, Domain::kSigned11);
  if (static_cast<Eigen::Index>(x.size()) != h_.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "image has " + std::to_string(x.size()) +
                    " samples, matrix has " + std::to_string(h_.cols()) +
                    " columns");
  }
  const Eigen::Map<const Eigen::VectorXd> xv(x.data().data(), h_.cols());
  const Eigen::VectorXd yv = h_ * xv;
  return {descriptor_, LinearMeasurement{x.height(), x.width(), x.channels(),
                                         {yv.data(), yv.data() + yv.size()}}};
}

ImageTensor LinearOperator::Decode(const Measurement& y) const {
  const auto& m = PayloadAs<LinearMeasurement>(y, "linear");
  if (static_cast<Eigen::Index>(m.values.size()) != h_.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "measurement length mismatch");
  }
  const Eigen::Map<const Eigen::VectorXd> yv(m.values.data(), h_.rows());
  const Eigen::VectorXd xv = h_pinv_ * yv;
  size_t h = m.height, w = m.width, c = m.channels;
  if (h * w * c != static_cast<size_t>(h_.cols())) {
    h = 1;
    w = static_cast<size_t>(h_.cols());
    c = 1;
  }
  return ImageTensor(h, w, c, Domain::kSigned11,
                     {xv.data(), xv.data() + xv.size()});
}

namespace {

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  size_t start = 0;
  while (true) {
    const size_t end = s.find(sep, start);
    parts.push_back(s.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return parts;
}

int ParseInt(const std::string& s, const std::string& what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad integer for " + what + ": '" + s + "'");
  }
  return v;
}

std::unique_ptr<MeasurementOperator> MakeJpeg(const std::string& descriptor) {
  const std::string rest = descriptor.substr(5);  // after "jpeg:"
  if (rest.rfind("file=", 0) == 0) {
    const std::string path = rest.substr(5);
    if (path.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "jpeg:file= needs a path");
    }
    return std::make_unique<JpegOperator>(ParseJfifFile(path), descriptor);
  }
  std::optional<int> qf;
  Subsampling sub = Subsampling::k420;
  ChromaUpsampling up = ChromaUpsampling::kReplicate;
  for (const std::string& kv : Split(rest, ':')) {
    const size_t eq = kv.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidArgument, "expected key=value in '" + kv + "'");
    }
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "qf") {
      qf = ParseInt(value, "qf");
    } else if (key == "sub") {
      if (value == "420") {
        sub = Subsampling::k420;
      } else if (value == "444") {
        sub = Subsampling::k444;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "sub must be 420 or 444");
      }
    } else if (key == "up") {
      if (value == "smooth") {
        up = ChromaUpsampling::kSmooth;
      } else if (value == "replicate") {
        up = ChromaUpsampling::kReplicate;
      } else {
        throw Error(ErrorCode::kInvalidArgument, "up must be replicate or smooth");
      }
    } else {
      throw Error(ErrorCode::kInvalidArgument, "unknown jpeg option '" + key + "'");
    }
  }
  if (!qf) throw Error(ErrorCode::kInvalidArgument, "jpeg descriptor needs qf=");
  JpegParams params = JpegParams::FromQuality(*qf, sub);
  params.upsampling = up;
  return std::make_unique<JpegOperator>(params);
}

}  // namespace

std::unique_ptr<MeasurementOperator> MakeOperator(
    const std::string& descriptor) {
  if (descriptor == "identity") return std::make_unique<IdentityOperator>();
  if (descriptor.rfind("jpeg:", 0) == 0) return MakeJpeg(descriptor);
  if (descriptor.rfind("bits:", 0) == 0) {
    return std::make_unique<BitDepthOperator>(
        ParseInt(descriptor.substr(5), "bits"));
  }
  if (descriptor.rfind("linear:", 0) == 0) {
    const std::string path = descriptor.substr(7);
    return std::make_unique<LinearOperator>(ReadMatrixFile(path), descriptor);
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown operator descriptor '" + descriptor + "'");
}

std::unique_ptr<MeasurementOperator> OperatorForMeasurement(
    const Measurement& y) {
  if (const auto* c = std::get_if<JpegCoefficients>(&y.payload)) {
    return std::make_unique<JpegOperator>(c->params, y.descriptor);
  }
  if (const auto* l = std::get_if<LevelTensor>(&y.payload)) {
    return std::make_unique<BitDepthOperator>(l->bits);
  }
  if (std::holds_alternative<ImageTensor>(y.payload)) {
    return std::make_unique<IdentityOperator>();
  }
  return MakeOperator(y.descriptor);
}

Property1Report VerifyProperty1(const MeasurementOperator& op,
                                std::span<const ImageTensor> corpus) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty corpus");
  }
  const Property1Tolerance tol = op.Tolerance();
  Property1Report report;
  size_t exact = 0;
  for (const ImageTensor& x : corpus) {
    const Measurement y = op.Encode(x);
    const Measurement y2 = op.Encode(op.Decode(y));
    const std::vector<double> a = FlattenMeasurement(y);
    const std::vector<double> b = FlattenMeasurement(y2);
    if (a.size() != b.size()) {
      report.max_deviation = std::numeric_limits<double>::infinity();
      report.values += a.size();
      continue;
    }
    double scale = 1.0;
    if (tol.relative) {
      double max_abs = 0.0;
      for (double v : a) max_abs = std::max(max_abs, std::abs(v));
      scale = max_abs > 0.0 ? max_abs : 1.0;
    }
    for (size_t i = 0; i < a.size(); ++i) {
      const double d = std::abs(a[i] - b[i]);
      if (d == 0.0) ++exact;
      report.max_deviation = std::max(report.max_deviation, d / scale);
    }
    report.values += a.size();
  }
  report.images = corpus.size();
  report.fraction_exact =
      report.values == 0 ? 1.0 : static_cast<double>(exact) / report.values;
  report.passed = report.max_deviation <= tol.max_deviation &&
                  report.fraction_exact >= tol.min_fraction_exact;
  return report;
}

Property2Report VerifyProperty2(const MeasurementOperator& op,
                                std::span<const ImageTensor> corpus) {
  if (corpus.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty corpus");
  }
  Property2Report report;
  report.images = corpus.size();
  for (const ImageTensor& x : corpus) {
    const ImageTensor rec =
        ConvertDomain(op.Decode(op.Encode(x)), x.domain());
    if (!rec.SameShape(x)) {
      throw Error(ErrorCode::kShapeMismatch, "decode changed the image shape");
    }
    double err2 = 0.0, norm2 = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
      const double d = x.data()[i] - rec.data()[i];
      err2 += d * d;
      norm2 += x.data()[i] * x.data()[i];
      report.max_abs_residual = std::max(report.max_abs_residual, std::abs(d));
    }
    report.relative_residual.push_back(
        norm2 > 0.0 ? std::sqrt(err2 / norm2) : std::sqrt(err2));
  }
  double sum = 0.0;
  for (double r : report.relative_residual) sum += r;
  report.mean_relative_residual = sum / report.images;
  return report;
}

}  // namespace ddr
