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

// Sampler settings as "key=value" text. Blank lines and '#' comments are
// ignored; unknown keys are rejected. Doubles are written in shortest
// round-trip form so a snapshot reproduces a run bit for bit.

#ifndef DDR_CONFIG_H_
#define DDR_CONFIG_H_

#include <map>
#include <string>

#include "ddr/sampler.h"

namespace ddr {

// Applies the entries of `text` on top of `base`, then validates.
SamplerConfig ParseSamplerConfig(const std::string& text,
                                 SamplerConfig base = {});
SamplerConfig LoadSamplerConfig(const std::string& path,
                                SamplerConfig base = {});

// `extra` entries (operator and denoiser specs, inputs) are written as
// "run.<key>=<value>" lines, which the parser skips.
std::string FormatSamplerConfig(
    const SamplerConfig& cfg,
    const std::map<std::string, std::string>& extra = {});

}  // namespace ddr

#endif  // DDR_CONFIG_H_
