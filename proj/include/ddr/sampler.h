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

// Noiseless restoration sampling with a generalized pseudo-inverse.
//
// Given the denoiser output f at step t+1, one update is
//
//   x'_t = f - Decode(Encode(f)) + Decode(y)
//   x_t  = sqrt(a_t) (eta_b x'_t + (1 - eta_b) f)
//        + sqrt(1 - a_t) (eta eps + (1 - eta) eps_theta)
//
// where eps ~ N(0, I) and eps_theta = (x_{t+1} - sqrt(a_{t+1}) f) /
// sqrt(1 - a_{t+1}). For a linear H with Decode = H^+ this is the matrix
// form f - H^+ H f + H^+ y.
//
// Chains start at t_init from sqrt(a) Decode(y) + sqrt(1 - a) eps and walk a
// uniformly spaced ladder down to t = 0. The output of a chain is the final
// denoiser estimate.

#ifndef DDR_SAMPLER_H_
#define DDR_SAMPLER_H_

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ddr/denoiser.h"
#include "ddr/image.h"
#include "ddr/operator.h"

namespace ddr {

// alpha_bar[t] = prod_{s <= t} (1 - beta_s), alpha_bar[0] = 1.
struct DiffusionSchedule {
  std::vector<double> beta;       // beta[t - 1] for t = 1..T
  std::vector<double> alpha_bar;  // T + 1 entries

  int num_timesteps() const { return static_cast<int>(beta.size()); }
  double alpha(int t) const { return alpha_bar.at(static_cast<size_t>(t)); }
};

// Linear betas from beta_start to beta_end over T steps.
DiffusionSchedule MakeSchedule(int num_timesteps, double beta_start = 1e-4,
                               double beta_end = 0.02);

struct SamplerConfig {
  double eta = 1.0;
  double eta_b = 0.4;
  int num_steps = 20;
  int t_init = 300;
  int num_samples = 8;
  uint64_t seed = 0;
  int num_timesteps = 1000;

  // Throws kInvalidArgument on out-of-range fields, including ladders that
  // cannot be strictly decreasing (num_steps - 1 > t_init).
  void Validate() const;
};

// eps_theta = (x_next - sqrt(alpha_next) x0_hat) / sqrt(1 - alpha_next).
// Throws kSingularity when alpha_next >= 1.
ImageTensor PredictedNoise(const ImageTensor& x_next, const ImageTensor& x0_hat,
                           double alpha_next);

// One update. All tensors are Signed11; `noise` is a standard normal draw.
ImageTensor DdrmStep(const ImageTensor& x_next, const ImageTensor& x0_hat,
                     const Measurement& y, const MeasurementOperator& op,
                     double alpha_t, double alpha_next,
                     const SamplerConfig& cfg, const ImageTensor& noise);

// Same update with Decode(y) precomputed.
ImageTensor DdrmStepDecoded(const ImageTensor& x_next,
                            const ImageTensor& x0_hat,
                            const ImageTensor& decoded_y,
                            const MeasurementOperator& op, double alpha_t,
                            double alpha_next, const SamplerConfig& cfg,
                            const ImageTensor& noise);

// sqrt(a) Decode(y) + sqrt(1 - a) noise with a = alpha_bar[t_init].
ImageTensor InitFromMeasurement(const Measurement& y,
                                const MeasurementOperator& op,
                                const DiffusionSchedule& schedule, int t_init,
                                const ImageTensor& noise);

// num_steps integers from t_init down to 0, uniformly spaced after rounding;
// a single step yields {t_init}.
std::vector<int> TimestepLadder(const SamplerConfig& cfg);

// Independent normal streams: chain c draws from substream (seed, c).
std::mt19937_64 ChainRng(uint64_t seed, int chain);
ImageTensor GaussianLike(const ImageTensor& shape, std::mt19937_64& rng);

struct RestorationResult {
  std::vector<ImageTensor> samples;  // Unit01, one per chain
  ImageTensor average;               // Unit01
  // ||Encode(final estimate) - y||_2 per chain.
  std::vector<double> consistency_residual;
};

// Called with (chain, t, x_t) every time a chain reaches a ladder step.
using StepObserver = std::function<void(int, int, const ImageTensor&)>;

// Runs cfg.num_samples chains (in parallel when the denoiser allows) and
// averages them. Deterministic given the inputs and cfg.seed.
RestorationResult Restore(const Measurement& y, const MeasurementOperator& op,
                          const Denoiser& denoiser, const SamplerConfig& cfg,
                          const DiffusionSchedule& schedule,
                          const StepObserver& observer = nullptr);

}  // namespace ddr

#endif  // DDR_SAMPLER_H_
