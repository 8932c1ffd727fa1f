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

#ifndef DDR_METRICS_H_
#define DDR_METRICS_H_

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "ddr/image.h"
#include "ddr/jpeg.h"

namespace ddr {

// 10 log10(peak^2 / MSE) over all samples; +inf for identical inputs.
double Psnr(const ImageTensor& a, const ImageTensor& b, double peak);

// Mean SSIM with an 11x11 Gaussian window (sigma 1.5), K1 = 0.01,
// K2 = 0.03, over all window positions fully inside the image, computed per
// channel and averaged. Both dims must be >= 11.
double Ssim(const ImageTensor& a, const ImageTensor& b, double peak);

// Evaluation convention: both images are converted to Byte255, clamped and
// rounded, then compared with peak 255.
double EvalPsnr(const ImageTensor& a, const ImageTensor& b);
double EvalSsim(const ImageTensor& a, const ImageTensor& b);

// Empirical zero-order entropy of `symbols`, in total bits.
double EntropyBits(std::span<const double> symbols);

// Rate proxy: summed per-plane entropy bits divided by the image pixel count.
// Not an actual file size.
double Bpp(const JpegCoefficients& coeffs);

struct MetricRow {
  std::string image_id;
  double psnr = 0.0;
  double ssim = 0.0;
  std::optional<double> bpp;
};

struct MetricReport {
  std::vector<MetricRow> rows;

  double MeanPsnr() const;
  double MeanSsim() const;
  // CSV: header "image_id,psnr,ssim,bpp", infinite PSNR as "inf", missing
  // bpp as an empty field, followed by a "mean" row.
  void WriteCsv(std::ostream& out) const;
};

// "inf" for infinities, otherwise shortest round-trip decimal.
std::string FormatNumber(double v);

}  // namespace ddr

#endif  // DDR_METRICS_H_
