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

// Measurement operators: an encode map from images to measurements paired
// with a decode map that plays the role of a pseudo-inverse. For a linear H
// the pair is (H, H^+); for JPEG it is (compress, decompress).
//
// Two properties make a decode usable in the restoration update:
//   1. Encode(Decode(Encode(x))) == Encode(x)
//   2. Decode(Encode(x)) is close to x in the least-squares sense.
// VerifyProperty1/VerifyProperty2 measure both over a corpus.

#ifndef DDR_OPERATOR_H_
#define DDR_OPERATOR_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "ddr/image.h"
#include "ddr/jpeg.h"

namespace ddr {

// Per-sample quantization levels in [0, 2^bits - 1], stored as doubles.
struct LevelTensor {
  size_t height = 0;
  size_t width = 0;
  size_t channels = 0;
  int bits = 0;
  std::vector<double> levels;

  friend bool operator==(const LevelTensor&, const LevelTensor&) = default;
};

// y = H x for a flattened image; the image shape is kept for decoding.
struct LinearMeasurement {
  size_t height = 0;
  size_t width = 0;
  size_t channels = 0;
  std::vector<double> values;

  friend bool operator==(const LinearMeasurement&,
                         const LinearMeasurement&) = default;
};

struct Measurement {
  std::string descriptor;
  std::variant<ImageTensor, JpegCoefficients, LevelTensor, LinearMeasurement>
      payload;

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

// All numeric values of a measurement in a fixed order.
std::vector<double> FlattenMeasurement(const Measurement& y);

// How closely Encode(Decode(Encode(x))) must reproduce Encode(x).
struct Property1Tolerance {
  double max_deviation = 0.0;       // largest allowed |difference|
  double min_fraction_exact = 1.0;  // share of values that must match exactly
  bool relative = false;  // deviation divided by the measurement's max-abs
};

class MeasurementOperator {
 public:
  virtual ~MeasurementOperator() = default;

  // Canonical descriptor string, e.g. "jpeg:qf=10:sub=420".
  virtual std::string Descriptor() const = 0;
  // Accepts any domain and converts internally.
  virtual Measurement Encode(const ImageTensor& image) const = 0;
  // Always returns a Signed11 image.
  virtual ImageTensor Decode(const Measurement& y) const = 0;
  virtual Property1Tolerance Tolerance() const = 0;
};

class IdentityOperator final : public MeasurementOperator {
 public:
  std::string Descriptor() const override { return "identity"; }
  Measurement Encode(const ImageTensor& image) const override;
  ImageTensor Decode(const Measurement& y) const override;
  Property1Tolerance Tolerance() const override { return {0.0, 1.0, false}; }
};

class JpegOperator final : public MeasurementOperator {
 public:
  explicit JpegOperator(JpegParams params, std::string descriptor = "");

  const JpegParams& params() const { return params_; }
  std::string Descriptor() const override { return descriptor_; }
  Measurement Encode(const ImageTensor& image) const override;
  ImageTensor Decode(const Measurement& y) const override;
  // Integer levels; a +-1 flip is allowed at exact rounding ties.
  Property1Tolerance Tolerance() const override { return {1.0, 0.999, false}; }

 private:
  JpegParams params_;
  std::string descriptor_;
};

// level = clamp(floor(v * 2^bits), 0, 2^bits - 1) on a Unit01 image.
LevelTensor BitDepthEncode(const ImageTensor& image, int bits);
// Bin centers (level + 0.5) / 2^bits as a Unit01 image.
ImageTensor BitDepthDecode(const LevelTensor& levels);

class BitDepthOperator final : public MeasurementOperator {
 public:
  explicit BitDepthOperator(int bits_per_channel);

  int bits() const { return bits_; }
  std::string Descriptor() const override;
  Measurement Encode(const ImageTensor& image) const override;
  ImageTensor Decode(const Measurement& y) const override;
  Property1Tolerance Tolerance() const override { return {0.0, 1.0, false}; }

 private:
  int bits_;
};

// Dense H acting on the flattened Signed11 image. H^+ is computed once at
// construction from a complete orthogonal decomposition.
class LinearOperator final : public MeasurementOperator {
 public:
  static constexpr Eigen::Index kMaxColumns = 512;

  explicit LinearOperator(Eigen::MatrixXd h, std::string descriptor = "");

  const Eigen::MatrixXd& matrix() const { return h_; }
  const Eigen::MatrixXd& pseudo_inverse() const { return h_pinv_; }

  std::string Descriptor() const override { return descriptor_; }
  Measurement Encode(const ImageTensor& image) const override;
  // Output shape is the one recorded in the measurement, or 1 x n x 1.
  ImageTensor Decode(const Measurement& y) const override;
  Property1Tolerance Tolerance() const override { return {1e-8, 0.0, true}; }

 private:
  Eigen::MatrixXd h_;
  Eigen::MatrixXd h_pinv_;
  std::string descriptor_;
};

// Parses a CLI operator descriptor:
//   identity | jpeg:qf=<1..100>[:sub=420|444][:up=smooth]
//   | jpeg:file=<path.jpg> | bits:<1..8> | linear:<matrix-file>
// Throws kInvalidArgument on bad syntax or ranges.
std::unique_ptr<MeasurementOperator> MakeOperator(const std::string& descriptor);

struct Property1Report {
  size_t images = 0;
  size_t values = 0;
  double max_deviation = 0.0;
  double fraction_exact = 0.0;
  bool passed = false;
};

// Throws kInvalidArgument on an empty corpus.
Property1Report VerifyProperty1(const MeasurementOperator& op,
                                std::span<const ImageTensor> corpus);

struct Property2Report {
  size_t images = 0;
  std::vector<double> relative_residual;  // ||x - D(E(x))|| / ||x|| per image
  double mean_relative_residual = 0.0;
  double max_abs_residual = 0.0;  // largest per-sample residual, x's domain
};

Property2Report VerifyProperty2(const MeasurementOperator& op,
                                std::span<const ImageTensor> corpus);

// Binary measurement container (little-endian); see README for the layout.
std::vector<uint8_t> SerializeMeasurement(const Measurement& y);
Measurement DeserializeMeasurement(std::span<const uint8_t> bytes);
void WriteMeasurementFile(const std::string& path, const Measurement& y);
Measurement ReadMeasurementFile(const std::string& path);

// Rebuilds the operator that produced `y` from the parameters stored in it.
std::unique_ptr<MeasurementOperator> OperatorForMeasurement(
    const Measurement& y);

// Matrix file: uint32 rows, uint32 cols, then rows*cols float64, row-major,
// all little-endian.
Eigen::MatrixXd ReadMatrixFile(const std::string& path);
void WriteMatrixFile(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace ddr

#endif  // DDR_OPERATOR_H_
