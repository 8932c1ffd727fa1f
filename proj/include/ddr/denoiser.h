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

#ifndef DDR_DENOISER_H_
#define DDR_DENOISER_H_

#include <random>
#include <span>
#include <string>
#include <vector>

#include "ddr/image.h"

namespace ddr {

// Maps a noisy sample x_t ~ N(sqrt(alpha_t) x_0, (1 - alpha_t) I) to an
// estimate of x_0. Both sides are Signed11 and share a shape. alpha_t is the
// cumulative product, passed explicitly so denoisers are schedule-agnostic.
class Denoiser {
 public:
  virtual ~Denoiser() = default;
  virtual ImageTensor Denoise(const ImageTensor& x_t, int t,
                              double alpha_t) const = 0;
  // False when calls must not overlap; the sampler then runs chains serially.
  virtual bool IsConcurrent() const = 0;
};

// Returns x_t unchanged.
class LoopbackDenoiser final : public Denoiser {
 public:
  ImageTensor Denoise(const ImageTensor& x_t, int t,
                      double alpha_t) const override;
  bool IsConcurrent() const override { return true; }
};

// Mixture of isotropic Gaussians: sum_k w_k N(mu_k, sigma_k^2 I).
struct GmmPrior {
  struct Component {
    double weight = 0.0;
    std::vector<double> mean;
    double variance = 0.0;
  };
  std::vector<Component> components;

  size_t dim() const {
    return components.empty() ? 0 : components.front().mean.size();
  }
  // Throws kInvalidArgument: empty, mismatched dims, weights not summing to 1
  // (1e-12), non-positive weights or variances.
  void Validate() const;

  // JSON: {"components": [{"weight": w, "mean": [...], "variance": s2}, ...]}
  static GmmPrior FromJsonFile(const std::string& path);
  std::string ToJson() const;
};

// One draw x_0 ~ prior.
std::vector<double> SamplePrior(const GmmPrior& prior, std::mt19937_64& rng);

// Exact posterior mean E[x_0 | x_t] for the mixture prior under
// x_t = sqrt(alpha) x_0 + sqrt(1 - alpha) z. With a = sqrt(alpha),
// v = 1 - alpha and s_k = a^2 sigma_k^2 + v:
//   r_k  ~ w_k N(x_t; a mu_k, s_k I)                (log-space, max-shifted)
//   m_k  = mu_k + (a sigma_k^2 / s_k) (x_t - a mu_k)
//   x0   = sum_k r_k m_k
// alpha must lie in (0, 1].
void GmmPosteriorMean(const GmmPrior& prior, std::span<const double> x_t,
                      double alpha, std::span<double> out);

// Applies the mixture prior independently to each consecutive run of
// prior.dim() samples of the flattened image; the image size must be a
// multiple of the prior dimension. Chunks run under OpenMP.
class GmmDenoiser final : public Denoiser {
 public:
  explicit GmmDenoiser(GmmPrior prior);

  const GmmPrior& prior() const { return prior_; }
  ImageTensor Denoise(const ImageTensor& x_t, int t,
                      double alpha_t) const override;
  bool IsConcurrent() const override { return true; }

 private:
  GmmPrior prior_;
};

}  // namespace ddr

#endif  // DDR_DENOISER_H_
