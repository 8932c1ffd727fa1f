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

#include "ddr/sampler.h"

#include <cmath>
#include <exception>
#include <limits>
#include <string>

#include "ddr/error.h"

namespace ddr {

DiffusionSchedule MakeSchedule(int num_timesteps, double beta_start,
                               double beta_end) {
  if (num_timesteps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "schedule needs T >= 1");
  }
  if (!(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end)) {
    throw Error(ErrorCode::kInvalidArgument, "betas must satisfy 0 < start <= end < 1");
  }
  DiffusionSchedule s;
  s.beta.resize(num_timesteps);
  s.alpha_bar.resize(num_timesteps + 1);
  s.alpha_bar[0] = 1.0;
  for (int i = 0; i < num_timesteps; ++i) {
    s.beta[i] = num_timesteps == 1
                    ? beta_start
                    : beta_start + (beta_end - beta_start) * i /
                                       (num_timesteps - 1);
    s.alpha_bar[i + 1] = s.alpha_bar[i] * (1.0 - s.beta[i]);
  }
  return s;
}

void SamplerConfig::Validate() const {
  auto fail = [](const std::string& m) {
    throw Error(ErrorCode::kInvalidArgument, m);
  };
  if (!(eta >= 0.0 && eta <= 1.0)) fail("eta must be in [0, 1]");
  if (!(eta_b >= 0.0 && eta_b <= 1.0)) fail("eta_b must be in [0, 1]");
  if (num_timesteps < 1) fail("timesteps must be >= 1");
  if (num_steps < 1) fail("steps must be >= 1");
  if (t_init < 1 || t_init > num_timesteps) fail("t_init must be in [1, T]");
  if (num_samples < 1) fail("num_samples must be >= 1");
  if (num_steps - 1 > t_init) fail("more steps than timesteps below t_init");
}

namespace {

void RequireSameShape(const ImageTensor& a, const ImageTensor& b,
                      const char* what) {
  if (!a.SameShape(b)) {
    throw Error(ErrorCode::kShapeMismatch, std::string(what) + " shape differs");
  }
}

}  // namespace

ImageTensor PredictedNoise(const ImageTensor& x_next, const ImageTensor& x0_hat,
                           double alpha_next) {
  if (!(alpha_next < 1.0)) {
    throw Error(ErrorCode::kSingularity,
                "predicted noise needs alpha < 1, got " +
                    std::to_string(alpha_next));
  }
  RequireSameShape(x_next, x0_hat, "x0_hat");
  const double a = std::sqrt(alpha_next);
  const double inv_sd = 1.0 / std::sqrt(1.0 - alpha_next);
  ImageTensor eps(x_next.height(), x_next.width(), x_next.channels(),
                  x_next.domain());
  for (size_t i = 0; i < eps.size(); ++i) {
    eps.data()[i] = (x_next.data()[i] - a * x0_hat.data()[i]) * inv_sd;
  }
  return eps;
}

ImageTensor DdrmStepDecoded(const ImageTensor& x_next,
                            const ImageTensor& x0_hat,
                            const ImageTensor& decoded_y,
                            const MeasurementOperator& op, double alpha_t,
                            double alpha_next, const SamplerConfig& cfg,
                            const ImageTensor& noise) {
  x_next.RequireDomain(Domain::kSigned11);
  x0_hat.RequireDomain(Domain::kSigned11);
  decoded_y.RequireDomain(Domain::kSigned11);
  RequireSameShape(x_next, x0_hat, "x0_hat");
  RequireSameShape(x_next, decoded_y, "Decode(y)");
  RequireSameShape(x_next, noise, "noise");

  const ImageTensor reprojected = op.Decode(op.Encode(x0_hat));
  RequireSameShape(x_next, reprojected, "Decode(Encode(f))");

  ImageTensor eps_theta;
  if (cfg.eta < 1.0) eps_theta = PredictedNoise(x_next, x0_hat, alpha_next);

  const double signal = std::sqrt(alpha_t);
  const double sd = std::sqrt(1.0 - alpha_t);
  ImageTensor out(x_next.height(), x_next.width(), x_next.channels(),
                  Domain::kSigned11);
  const auto f = x0_hat.data();
  const auto dec_f = reprojected.data();
  const auto dec_y = decoded_y.data();
  const auto eps = noise.data();
  for (size_t i = 0; i < out.size(); ++i) {
    const double corrected = f[i] - dec_f[i] + dec_y[i];
    const double mean = cfg.eta_b * corrected + (1.0 - cfg.eta_b) * f[i];
    double n = cfg.eta * eps[i];
    if (cfg.eta < 1.0) n += (1.0 - cfg.eta) * eps_theta.data()[i];
    out.data()[i] = signal * mean + sd * n;
  }
  return out;
}

ImageTensor DdrmStep(const ImageTensor& x_next, const ImageTensor& x0_hat,
                     const Measurement& y, const MeasurementOperator& op,
                     double alpha_t, double alpha_next,
                     const SamplerConfig& cfg, const ImageTensor& noise) {
  return DdrmStepDecoded(x_next, x0_hat, op.Decode(y), op, alpha_t, alpha_next,
                         cfg, noise);
}

ImageTensor InitFromMeasurement(const Measurement& y,
                                const MeasurementOperator& op,
                                const DiffusionSchedule& schedule, int t_init,
                                const ImageTensor& noise) {
  if (t_init < 0 || t_init > schedule.num_timesteps()) {
    throw Error(ErrorCode::kInvalidArgument, "t_init outside the schedule");
  }
  const ImageTensor decoded = op.Decode(y);
  RequireSameShape(decoded, noise, "noise");
  const double alpha = schedule.alpha(t_init);
  const double signal = std::sqrt(alpha);
  const double sd = std::sqrt(1.0 - alpha);
  ImageTensor x(decoded.height(), decoded.width(), decoded.channels(),
                Domain::kSigned11);
  for (size_t i = 0; i < x.size(); ++i) {
    x.data()[i] = signal * decoded.data()[i] + sd * noise.data()[i];
  }
  return x;
}

std::vector<int> TimestepLadder(const SamplerConfig& cfg) {
  if (cfg.num_steps < 1) {
    throw Error(ErrorCode::kInvalidArgument, "steps must be >= 1");
  }
  if (cfg.num_steps == 1) return {cfg.t_init};
  if (cfg.num_steps - 1 > cfg.t_init) {
    throw Error(ErrorCode::kInvalidArgument,
                "more steps than timesteps below t_init");
  }
  std::vector<int> ladder(cfg.num_steps);
  const int last = cfg.num_steps - 1;
  for (int i = 0; i < cfg.num_steps; ++i) {
    ladder[i] = static_cast<int>(
        std::lround(static_cast<double>(cfg.t_init) * (last - i) / last));
  }
  return ladder;
}

namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 ChainRng(uint64_t seed, int chain) {
  return std::mt19937_64(
      SplitMix64(SplitMix64(seed) ^ static_cast<uint64_t>(chain)));
}

ImageTensor GaussianLike(const ImageTensor& shape, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  ImageTensor out(shape.height(), shape.width(), shape.channels(),
                  Domain::kSigned11);
  for (double& v : out.data()) v = normal(rng);
  return out;
}

namespace {

double MeasurementDistance(const Measurement& a, const Measurement& b) {
  const std::vector<double> va = FlattenMeasurement(a);
  const std::vector<double> vb = FlattenMeasurement(b);
  if (va.size() != vb.size()) return std::numeric_limits<double>::infinity();
  double s = 0.0;
  for (size_t i = 0; i < va.size(); ++i) s += (va[i] - vb[i]) * (va[i] - vb[i]);
  return std::sqrt(s);
}

struct ChainOutput {
  ImageTensor estimate;
  double residual = 0.0;
};

ChainOutput RunChain(int chain, const Measurement& y,
                     const ImageTensor& decoded_y,
                     const MeasurementOperator& op, const Denoiser& denoiser,
                     const SamplerConfig& cfg,
                     const DiffusionSchedule& schedule,
                     const std::vector<int>& ladder,
                     const StepObserver& observer) {
  std::mt19937_64 rng = ChainRng(cfg.seed, chain);
  ImageTensor x = InitFromMeasurement(y, op, schedule, ladder.front(),
                                      GaussianLike(decoded_y, rng));
  ImageTensor x0_hat;
  for (size_t i = 0; i < ladder.size(); ++i) {
    const int t_next = ladder[i];
    if (observer) observer(chain, t_next, x);
    try {
      x0_hat = denoiser.Denoise(x, t_next, schedule.alpha(t_next));
    } catch (const Error& e) {
      throw Error(e.code(), "chain " + std::to_string(chain) + " at t=" +
                                std::to_string(t_next) + ": " + e.what());
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kDenoiser, "chain " + std::to_string(chain) +
                                            " at t=" + std::to_string(t_next) +
                                            ": " + e.what());
    }
    if (!x0_hat.SameShape(x)) {
      throw Error(ErrorCode::kDenoiser, "denoiser changed the tensor shape");
    }
    x0_hat.RequireFinite();
    if (i + 1 == ladder.size()) break;
    const int t = ladder[i + 1];
    const ImageTensor noise = GaussianLike(x, rng);
    x = DdrmStepDecoded(x, x0_hat, decoded_y, op, schedule.alpha(t),
                        schedule.alpha(t_next), cfg, noise);
  }
  ChainOutput out;
  out.residual = MeasurementDistance(op.Encode(x0_hat), y);
  out.estimate = ConvertDomain(x0_hat, Domain::kUnit01);
  return out;
}

}  // namespace

RestorationResult Restore(const Measurement& y, const MeasurementOperator& op,
                          const Denoiser& denoiser, const SamplerConfig& cfg,
                          const DiffusionSchedule& schedule,
                          const StepObserver& observer) {
  cfg.Validate();
  if (cfg.t_init > schedule.num_timesteps()) {
    throw Error(ErrorCode::kInvalidArgument, "t_init beyond the schedule");
  }
  const std::vector<int> ladder = TimestepLadder(cfg);
  const ImageTensor decoded_y = op.Decode(y);

  const int chains = cfg.num_samples;
  std::vector<ChainOutput> outputs(chains);
  std::vector<std::exception_ptr> errors(chains);
  const bool parallel = denoiser.IsConcurrent() && chains > 1;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int c = 0; c < chains; ++c) {
    try {
      outputs[c] = RunChain(c, y, decoded_y, op, denoiser, cfg, schedule,
                            ladder, observer);
    } catch (...) {
      errors[c] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RestorationResult result;
  const ImageTensor& first = outputs.front().estimate;
  result.average =
      ImageTensor(first.height(), first.width(), first.channels(), Domain::kUnit01);
  for (ChainOutput& o : outputs) {
    for (size_t i = 0; i < o.estimate.size(); ++i) {
      result.average.data()[i] += o.estimate.data()[i];
    }
    result.consistency_residual.push_back(o.residual);
    result.samples.push_back(std::move(o.estimate));
  }
  if (chains == 1) {
    result.average = result.samples.front();
  } else {
    for (double& v : result.average.data()) v /= chains;
  }
  return result;
}

}  // namespace ddr
