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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "ddr/denoiser.h"
#include "ddr/error.h"

namespace ddr {

ImageTensor LoopbackDenoiser::Denoise(const ImageTensor& x_t, int /*t*/,
                                      double /*alpha_t*/) const {
  return x_t;
}

void GmmPrior::Validate() const {
  if (components.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "mixture prior has no components");
  }
  const size_t n = dim();
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "zero-dimensional prior");
  double total = 0.0;
  for (const Component& c : components) {
    if (c.mean.size() != n) {
      throw Error(ErrorCode::kInvalidArgument, "component dims disagree");
    }
    if (!(c.weight > 0.0) || !(c.variance > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "weights and variances must be positive");
    }
    for (double m : c.mean) {
      if (!std::isfinite(m)) {
        throw Error(ErrorCode::kInvalidArgument, "non-finite component mean");
      }
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorCode::kInvalidArgument, "weights must sum to 1");
  }
}

GmmPrior GmmPrior::FromJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open prior " + path);
  GmmPrior prior;
  try {
    const nlohmann::json doc = nlohmann::json::parse(in);
    for (const auto& c : doc.at("components")) {
      prior.components.push_back({c.at("weight").get<double>(),
                                  c.at("mean").get<std::vector<double>>(),
                                  c.at("variance").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad prior file " + path + ": " + e.what());
  }
  prior.Validate();
  return prior;
}

std::string GmmPrior::ToJson() const {
  nlohmann::json doc;
  doc["components"] = nlohmann::json::array();
  for (const Component& c : components) {
    doc["components"].push_back(
        {{"weight", c.weight}, {"mean", c.mean}, {"variance", c.variance}});
  }
  return doc.dump(2);
}

std::vector<double> SamplePrior(const GmmPrior& prior, std::mt19937_64& rng) {
  std::vector<double> weights;
  for (const auto& c : prior.components) weights.push_back(c.weight);
  std::discrete_distribution<size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal;
  const auto& c = prior.components[pick(rng)];
  const double sd = std::sqrt(c.variance);
  std::vector<double> x(c.mean.size());
  for (size_t i = 0; i < x.size(); ++i) x[i] = c.mean[i] + sd * normal(rng);
  return x;
}

void GmmPosteriorMean(const GmmPrior& prior, std::span<const double> x_t,
                      double alpha, std::span<double> out) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0, 1]");
  }
  const size_t n = prior.dim();
  const size_t k_count = prior.components.size();
  const double a = std::sqrt(alpha);
  const double v = 1.0 - alpha;

  std::vector<double> log_r(k_count);
  for (size_t k = 0; k < k_count; ++k) {
    const auto& c = prior.components[k];
    const double s = a * a * c.variance + v;
    double d2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double d = x_t[i] - a * c.mean[i];
      d2 += d * d;
    }
    log_r[k] = std::log(c.weight) -
               0.5 * n * std::log(2.0 * std::numbers::pi * s) - 0.5 * d2 / s;
  }
  const double max_log = *std::max_element(log_r.begin(), log_r.end());
  double norm = 0.0;
  for (double& lr : log_r) {
    lr = std::exp(lr - max_log);
    norm += lr;
  }

  std::fill(out.begin(), out.end(), 0.0);
  for (size_t k = 0; k < k_count; ++k) {
    const auto& c = prior.components[k];
    const double r = log_r[k] / norm;
    const double s = a * a * c.variance + v;
    const double gain = a * c.variance / s;
    for (size_t i = 0; i < n; ++i) {
      out[i] += r * (c.mean[i] + gain * (x_t[i] - a * c.mean[i]));
    }
  }
}

GmmDenoiser::GmmDenoiser(GmmPrior prior) : prior_(std::move(prior)) {
  prior_.Validate();
}

ImageTensor GmmDenoiser::Denoise(const ImageTensor& x_t, int /*t*/,
                                 double alpha_t) const {
  x_t.RequireDomain(Domain::kSigned11);
  const size_t n = prior_.dim();
  if (x_t.size() % n != 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "image size " + std::to_string(x_t.size()) +
                    " is not a multiple of the prior dimension " +
                    std::to_string(n));
  }
  if (!(alpha_t > 0.0 && alpha_t <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0, 1]");
  }
  ImageTensor out(x_t.height(), x_t.width(), x_t.channels(), Domain::kSigned11);
  const auto in = x_t.data();
  auto dst = out.data();
  const long chunks = static_cast<long>(x_t.size() / n);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < chunks; ++i) {
    GmmPosteriorMean(prior_, in.subspan(i * n, n), alpha_t,
                     dst.subspan(i * n, n));
  }
  return out;
}

}  // namespace ddr
