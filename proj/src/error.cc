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

#include "ddr/error.h"

namespace ddr {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kDomainMismatch: return "domain-mismatch";
    case ErrorCode::kShapeMismatch: return "shape-mismatch";
    case ErrorCode::kNotAJpeg: return "not-a-jpeg";
    case ErrorCode::kMissingTables: return "missing-tables";
    case ErrorCode::kMalformed: return "malformed";
    case ErrorCode::kUnsupportedSubsampling: return "unsupported-subsampling";
    case ErrorCode::kSingularity: return "singularity";
    case ErrorCode::kIo: return "io";
    case ErrorCode::kProtocol: return "protocol";
    case ErrorCode::kMalformedFrame: return "malformed-frame";
    case ErrorCode::kTimeout: return "timeout";
    case ErrorCode::kRemote: return "remote";
    case ErrorCode::kDenoiser: return "denoiser";
  }
  return "unknown";
}

}  // namespace ddr
