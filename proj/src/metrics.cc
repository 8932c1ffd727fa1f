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

#include "ddr/metrics.h"

#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "ddr/error.h"

namespace ddr {

namespace {

void RequireComparable(const ImageTensor& a, const ImageTensor& b) {
  if (!a.SameShape(b)) {
    throw Error(ErrorCode::kShapeMismatch,
                std::to_string(a.height()) + "x" + std::to_string(a.width()) +
                    "x" + std::to_string(a.channels()) + " vs " +
                    std::to_string(b.height()) + "x" +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.channels()));
  }
  if (a.size() == 0) throw Error(ErrorCode::kShapeMismatch, "empty images");
}

}  // namespace

double Psnr(const ImageTensor& a, const ImageTensor& b, double peak) {
  RequireComparable(a, b);
  if (!(peak > 0.0)) throw Error(ErrorCode::kInvalidArgument, "peak must be > 0");
  double sse = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.size());
  return 10.0 * std::log10(peak * peak / mse);
}

namespace {

constexpr int kWindow = 11;

std::array<double, kWindow> GaussianWindow() {
  std::array<double, kWindow> w{};
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kWindow / 2;
    w[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += w[i];
  }
  for (double& v : w) v /= sum;
  return w;
}

// Separable 'valid' filtering of a plane: output is (h-10) x (w-10).
Plane FilterValid(const Plane& p, const std::array<double, kWindow>& w) {
  Plane rows(p.height, p.width - kWindow + 1);
  for (size_t y = 0; y < rows.height; ++y) {
    for (size_t x = 0; x < rows.width; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += w[k] * p.at(y, x + k);
      rows.at(y, x) = s;
    }
  }
  Plane out(p.height - kWindow + 1, rows.width);
  for (size_t y = 0; y < out.height; ++y) {
    for (size_t x = 0; x < out.width; ++x) {
      double s = 0.0;
      for (int k = 0; k < kWindow; ++k) s += w[k] * rows.at(y + k, x);
      out.at(y, x) = s;
    }
  }
  return out;
}

Plane Product(const Plane& a, const Plane& b) {
  Plane out(a.height, a.width);
  for (size_t i = 0; i < a.data.size(); ++i) out.data[i] = a.data[i] * b.data[i];
  return out;
}

}  // namespace

double Ssim(const ImageTensor& a, const ImageTensor& b, double peak) {
  RequireComparable(a, b);
  if (a.height() < kWindow || a.width() < kWindow) {
    throw Error(ErrorCode::kInvalidArgument,
                "SSIM needs images at least 11x11");
  }
  const double c1 = (0.01 * peak) * (0.01 * peak);
  const double c2 = (0.03 * peak) * (0.03 * peak);
  const auto w = GaussianWindow();
  double total = 0.0;
  for (size_t c = 0; c < a.channels(); ++c) {
    const Plane pa = ExtractChannel(a, c);
    const Plane pb = ExtractChannel(b, c);
    const Plane mu_a = FilterValid(pa, w);
    const Plane mu_b = FilterValid(pb, w);
    const Plane e_aa = FilterValid(Product(pa, pa), w);
    const Plane e_bb = FilterValid(Product(pb, pb), w);
    const Plane e_ab = FilterValid(Product(pa, pb), w);
    double sum = 0.0;
    for (size_t i = 0; i < mu_a.data.size(); ++i) {
      const double ma = mu_a.data[i], mb = mu_b.data[i];
      const double va = e_aa.data[i] - ma * ma;
      const double vb = e_bb.data[i] - mb * mb;
      const double cov = e_ab.data[i] - ma * mb;
      sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) /
             ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
    total += sum / static_cast<double>(mu_a.data.size());
  }
  return total / static_cast<double>(a.channels());
}

double EvalPsnr(const ImageTensor& a, const ImageTensor& b) {
  return Psnr(QuantizeToBytes(a), QuantizeToBytes(b), 255.0);
}

double EvalSsim(const ImageTensor& a, const ImageTensor& b) {
  return Ssim(QuantizeToBytes(a), QuantizeToBytes(b), 255.0);
}

double EntropyBits(std::span<const double> symbols) {
  if (symbols.empty()) return 0.0;
  std::unordered_map<double, size_t> counts;
  for (double s : symbols) ++counts[s];
  const double n = static_cast<double>(symbols.size());
  double bits = 0.0;
  for (const auto& [symbol, count] : counts) {
    const double p = count / n;
    bits -= count * std::log2(p);
  }
  return bits;
}

double Bpp(const JpegCoefficients& coeffs) {
  coeffs.Validate();
  double bits = 0.0;
  for (const BlockGrid& g : coeffs.planes) {
    std::vector<double> symbols;
    symbols.reserve(g.blocks.size() * 64);
    for (const Block& b : g.blocks) symbols.insert(symbols.end(), b.begin(), b.end());
    bits += EntropyBits(symbols);
  }
  return bits / static_cast<double>(coeffs.height * coeffs.width);
}

double MetricReport::MeanPsnr() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const MetricRow& r : rows) s += r.psnr;
  return s / rows.size();
}

double MetricReport::MeanSsim() const {
  if (rows.empty()) return 0.0;
  double s = 0.0;
  for (const MetricRow& r : rows) s += r.ssim;
  return s / rows.size();
}

std::string FormatNumber(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void MetricReport::WriteCsv(std::ostream& out) const {
  out << "image_id,psnr,ssim,bpp\n";
  bool all_bpp = !rows.empty();
  double bpp_sum = 0.0;
  for (const MetricRow& r : rows) {
    out << r.image_id << ',' << FormatNumber(r.psnr) << ','
        << FormatNumber(r.ssim) << ',';
    if (r.bpp) {
      out << FormatNumber(*r.bpp);
      bpp_sum += *r.bpp;
    } else {
      all_bpp = false;
    }
    out << '\n';
  }
  out << "mean," << FormatNumber(MeanPsnr()) << ',' << FormatNumber(MeanSsim())
      << ',';
  if (all_bpp) out << FormatNumber(bpp_sum / rows.size());
  out << '\n';
}

}  // namespace ddr
