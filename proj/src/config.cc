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

#include "ddr/config.h"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

#include "ddr/error.h"

namespace ddr {

namespace {

std::string_view Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T ParseNumber(std::string_view key, std::string_view value) {
  T out{};
  const auto res = std::from_chars(value.data(), value.data() + value.size(), out);
  if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "bad value for " + std::string(key) + ": '" +
                    std::string(value) + "'");
  }
  return out;
}

std::string Shortest(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

SamplerConfig ParseSamplerConfig(const std::string& text, SamplerConfig base) {
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::kInvalidArgument,
                  "config line " + std::to_string(line_no) + " has no '='");
    }
    const std::string_view key = Trim(line.substr(0, eq));
    const std::string_view value = Trim(line.substr(eq + 1));
    if (key.starts_with("run.")) continue;
    if (key == "eta") {
      base.eta = ParseNumber<double>(key, value);
    } else if (key == "eta_b") {
      base.eta_b = ParseNumber<double>(key, value);
    } else if (key == "num_steps") {
      base.num_steps = ParseNumber<int>(key, value);
    } else if (key == "t_init") {
      base.t_init = ParseNumber<int>(key, value);
    } else if (key == "num_samples") {
      base.num_samples = ParseNumber<int>(key, value);
    } else if (key == "seed") {
      base.seed = ParseNumber<uint64_t>(key, value);
    } else if (key == "num_timesteps") {
      base.num_timesteps = ParseNumber<int>(key, value);
    } else {
      throw Error(ErrorCode::kInvalidArgument,
                  "unknown config key '" + std::string(key) + "'");
    }
  }
  base.Validate();
  return base;
}

SamplerConfig LoadSamplerConfig(const std::string& path, SamplerConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseSamplerConfig(ss.str(), base);
}

std::string FormatSamplerConfig(
    const SamplerConfig& cfg, const std::map<std::string, std::string>& extra) {
  std::string out;
  out += "eta=" + Shortest(cfg.eta) + "\n";
  out += "eta_b=" + Shortest(cfg.eta_b) + "\n";
  out += "num_steps=" + std::to_string(cfg.num_steps) + "\n";
  out += "t_init=" + std::to_string(cfg.t_init) + "\n";
  out += "num_samples=" + std::to_string(cfg.num_samples) + "\n";
  out += "seed=" + std::to_string(cfg.seed) + "\n";
  out += "num_timesteps=" + std::to_string(cfg.num_timesteps) + "\n";
  if (!extra.empty()) {
    out += "\n";
    for (const auto& [k, v] : extra) out += "run." + k + "=" + v + "\n";
  }
  return out;
}

}  // namespace ddr
