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

// Single-threaded versions of the OpenMP kernels. Used as test oracles for
// the parallel paths and as the baseline in the benchmarks.

#ifndef DDR_REFERENCE_H_
#define DDR_REFERENCE_H_

#include "ddr/denoiser.h"
#include "ddr/image.h"
#include "ddr/jpeg.h"

namespace ddr::reference {

JpegCoefficients JpegEncode(const ImageTensor& image, const JpegParams& params);
ImageTensor JpegDecode(const JpegCoefficients& coeffs);

// Chunked mixture posterior mean, same contract as GmmDenoiser::Denoise.
ImageTensor GmmDenoise(const GmmPrior& prior, const ImageTensor& x_t,
                       double alpha_t);

}  // namespace ddr::reference

#endif  // DDR_REFERENCE_H_
