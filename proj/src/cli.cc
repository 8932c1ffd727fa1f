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

#include "ddr/cli.h"

#include <CLI11.hpp>
#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <exception>
#include <filesystem>
#include <json.hpp>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ddr/bridge.h"
#include "ddr/config.h"
#include "ddr/denoiser.h"
#include "ddr/error.h"
#include "ddr/file_io.h"
#include "ddr/jfif.h"
#include "ddr/jpeg.h"
#include "ddr/jpeg_reader.h"
#include "ddr/metrics.h"
#include "ddr/operator.h"
#include "ddr/png_io.h"
#include "ddr/sampler.h"
#include "ddr/synthetic.h"

namespace ddr {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double MsSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// JSON has no infinities or NaNs; PSNR of identical images becomes "inf".
Json JsonNumber(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return nullptr;
  return FormatNumber(v);
}

bool HasExtension(const std::string& path, std::initializer_list<const char*> exts) {
  std::string ext = fs::path(path).extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (const char* e : exts) {
    if (ext == e) return true;
  }
  return false;
}

bool IsJpegPath(const std::string& path) {
  return HasExtension(path, {".jpg", ".jpeg"});
}

ImageTensor ReadImage(const std::string& path) {
  if (IsJpegPath(path)) return ReadJpegPixels(path);
  return ReadPng(path);
}

// Sorted PNG files of a directory.
std::vector<fs::path> ListPngs(const std::string& dir) {
  if (!fs::is_directory(dir)) {
    throw Error(ErrorCode::kInvalidArgument, dir + " is not a directory");
  }
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && HasExtension(entry.path().string(), {".png"})) {
      out.push_back(entry.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct NamedImage {
  std::string id;
  ImageTensor image;
};

std::vector<NamedImage> LoadCorpus(const std::string& dir) {
  std::vector<NamedImage> corpus;
  for (const fs::path& p : ListPngs(dir)) {
    corpus.push_back({p.stem().string(), ReadPng(p.string())});
  }
  if (corpus.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "no PNG images in " + dir);
  }
  return corpus;
}

struct SamplerFlags {
  std::optional<uint64_t> seed;
  std::optional<double> eta;
  std::optional<double> eta_b;
  std::optional<int> steps;
  std::optional<int> t_init;
  std::optional<int> num_samples;
  std::string config_path;

  void Add(CLI::App* app) {
    app->add_option("--seed", seed, "Root random seed");
    app->add_option("--eta", eta, "Fresh-noise weight");
    app->add_option("--eta-b", eta_b, "Measurement-consistency weight");
    app->add_option("--steps", steps, "Number of sampling steps");
    app->add_option("--t-init", t_init, "Starting timestep");
    app->add_option("--num-samples", num_samples, "Chains to average");
    app->add_option("--config", config_path, "key=value sampler config file");
  }

  // Defaults, then the config file, then explicit flags.
  SamplerConfig Resolve() const {
    SamplerConfig cfg;
    if (!config_path.empty()) cfg = LoadSamplerConfig(config_path);
    if (seed) cfg.seed = *seed;
    if (eta) cfg.eta = *eta;
    if (eta_b) cfg.eta_b = *eta_b;
    if (steps) cfg.num_steps = *steps;
    if (t_init) cfg.t_init = *t_init;
    if (num_samples) cfg.num_samples = *num_samples;
    cfg.Validate();
    return cfg;
  }
};

std::unique_ptr<Denoiser> MakeDenoiser(const std::string& spec,
                                       double timeout_s) {
  if (spec == "loopback") return std::make_unique<LoopbackDenoiser>();
  if (spec.starts_with("gmm:")) {
    return std::make_unique<GmmDenoiser>(GmmPrior::FromJsonFile(spec.substr(4)));
  }
  if (spec == "bridge" || spec.starts_with("bridge:")) {
    const std::string cmd =
        ResolveBridgeCommand(spec == "bridge" ? "" : spec.substr(7));
    if (cmd.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "bridge command missing: use bridge:<cmd> or DDR_BRIDGE_CMD");
    }
    if (!(timeout_s > 0)) {
      throw Error(ErrorCode::kInvalidArgument, "bridge timeout must be > 0");
    }
    return std::make_unique<BridgeDenoiser>(
        cmd, std::chrono::milliseconds(static_cast<int64_t>(timeout_s * 1000)));
  }
  throw Error(ErrorCode::kInvalidArgument,
              "unknown denoiser '" + spec + "' (gmm:<json>|bridge:<cmd>|loopback)");
}

Json ConfigJson(const SamplerConfig& cfg) {
  return Json{{"eta", cfg.eta},
              {"eta_b", cfg.eta_b},
              {"num_steps", cfg.num_steps},
              {"t_init", cfg.t_init},
              {"num_samples", cfg.num_samples},
              {"seed", cfg.seed},
              {"num_timesteps", cfg.num_timesteps}};
}

// ---- encode ---------------------------------------------------------------

struct EncodeArgs {
  std::string input;
  std::string op;
  std::string output;
};

int RunEncode(const EncodeArgs& a, std::ostream& out) {
  const auto op = MakeOperator(a.op);
  const ImageTensor image = ReadImage(a.input);
  const Measurement y = op->Encode(image);
  WriteMeasurementFile(a.output, y);
  out << "wrote " << a.output << " (" << y.descriptor << ", "
      << FlattenMeasurement(y).size() << " values)\n";
  return kExitOk;
}

// ---- restore --------------------------------------------------------------

struct RestoreArgs {
  std::string input;
  std::string op;
  std::string denoiser;
  std::string out_dir;
  std::string reference;
  std::string synthetic;
  int trials = 100;
  uint64_t prior_seed = 0;
  double bridge_timeout_s = 120.0;
  SamplerFlags sampler;
};

struct LoadedInput {
  Measurement y;
  std::unique_ptr<MeasurementOperator> op;
  std::vector<std::string> notes;
};

LoadedInput LoadRestoreInput(const RestoreArgs& a) {
  LoadedInput in;
  if (HasExtension(a.input, {".meas"})) {
    in.y = ReadMeasurementFile(a.input);
    in.op = OperatorForMeasurement(in.y);
    if (!a.op.empty() && a.op != in.y.descriptor) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--operator " + a.op + " disagrees with measurement '" +
                      in.y.descriptor + "'");
    }
  } else if (IsJpegPath(a.input)) {
    if (!a.op.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--operator is implied by the tables of a .jpg input");
    }
    const JpegParams params = ParseJfifFile(a.input);
    in.op = std::make_unique<JpegOperator>(params, "jpeg:file=" + a.input);
    in.y = in.op->Encode(ReadJpegPixels(a.input));
    in.notes.push_back(
        "coefficients recovered by re-encoding decoded pixels with the "
        "file's quantization tables; exact only if the original encoder used "
        "the same color transform, chroma filter and DCT conventions");
  } else {
    if (a.op.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "--operator is required for image inputs");
    }
    in.op = MakeOperator(a.op);
    in.y = in.op->Encode(ReadPng(a.input));
  }
  return in;
}

int RunSyntheticRestore(const RestoreArgs& a, std::ostream& out) {
  if (a.synthetic != "gmm16") {
    throw Error(ErrorCode::kInvalidArgument,
                "unknown synthetic problem '" + a.synthetic + "' (gmm16)");
  }
  int bits = 4;
  if (!a.op.empty()) {
    const auto op = MakeOperator(a.op);
    const auto* b = dynamic_cast<const BitDepthOperator*>(op.get());
    if (b == nullptr) {
      throw Error(ErrorCode::kInvalidArgument,
                  "the synthetic problem needs a bits:<n> operator");
    }
    bits = b->bits();
  }
  if (a.trials < 1) throw Error(ErrorCode::kInvalidArgument, "--trials must be >= 1");
  const SamplerConfig cfg = a.sampler.Resolve();
  const auto start = Clock::now();
  const GmmPrior prior = MakeSyntheticPrior(a.prior_seed, 16, 4);
  const SyntheticReport r = RunSynthetic(prior, cfg, a.trials, bits, cfg.seed);
  const double elapsed = MsSince(start);

  out << "synthetic gmm16 bits:" << bits << " trials=" << a.trials
      << " wins=" << r.wins << " psnr_baseline=" << FormatNumber(r.mean_baseline)
      << " psnr_restored=" << FormatNumber(r.mean_restored)
      << " uplift_db=" << FormatNumber(r.mean_uplift()) << "\n";

  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    std::ostringstream csv;
    csv << "trial,psnr_baseline,psnr_restored\n";
    for (size_t i = 0; i < r.trials.size(); ++i) {
      csv << i << ',' << FormatNumber(r.trials[i].psnr_baseline) << ','
          << FormatNumber(r.trials[i].psnr_restored) << '\n';
    }
    WriteFileAtomically((fs::path(a.out_dir) / "synthetic.csv").string(), csv.str());
    const std::string snapshot = FormatSamplerConfig(
        cfg, {{"synthetic", a.synthetic},
              {"operator", "bits:" + std::to_string(bits)},
              {"prior_seed", std::to_string(a.prior_seed)},
              {"trials", std::to_string(a.trials)}});
    WriteFileAtomically((fs::path(a.out_dir) / "config.txt").string(), snapshot);
    Json m{{"command", "restore --synthetic"},
           {"synthetic", a.synthetic},
           {"operator", "bits:" + std::to_string(bits)},
           {"prior_seed", a.prior_seed},
           {"trials", a.trials},
           {"seed", cfg.seed},
           {"config", ConfigJson(cfg)},
           {"config_snapshot", "config.txt"},
           {"wins", r.wins},
           {"mean_psnr_baseline", JsonNumber(r.mean_baseline)},
           {"mean_psnr_restored", JsonNumber(r.mean_restored)},
           {"timings_ms", {{"total", elapsed}}}};
    WriteFileAtomically((fs::path(a.out_dir) / "manifest.json").string(),
                        m.dump(2) + "\n");
  }
  return kExitOk;
}

MetricRow CompareToReference(const std::string& id, const ImageTensor& img,
                             const ImageTensor& reference) {
  MetricRow row;
  row.image_id = id;
  row.psnr = EvalPsnr(img, reference);
  row.ssim = img.height() >= 11 && img.width() >= 11
                 ? EvalSsim(img, reference)
                 : std::numeric_limits<double>::quiet_NaN();
  return row;
}

int RunRestore(const RestoreArgs& a, std::ostream& out) {
  if (!a.synthetic.empty()) return RunSyntheticRestore(a, out);
  if (a.input.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "restore needs an input");
  }
  if (a.out_dir.empty()) throw Error(ErrorCode::kInvalidArgument, "--out is required");
  if (a.denoiser.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--denoiser is required");
  }
  const SamplerConfig cfg = a.sampler.Resolve();
  const auto denoiser = MakeDenoiser(a.denoiser, a.bridge_timeout_s);

  const auto t0 = Clock::now();
  const LoadedInput in = LoadRestoreInput(a);
  const double load_ms = MsSince(t0);

  const auto t1 = Clock::now();
  const DiffusionSchedule schedule = MakeSchedule(cfg.num_timesteps);
  const RestorationResult result = Restore(in.y, *in.op, *denoiser, cfg, schedule);
  const double restore_ms = MsSince(t1);

  const auto t2 = Clock::now();
  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  std::vector<std::string> outputs;
  for (size_t k = 0; k < result.samples.size(); ++k) {
    const std::string name = "sample_" + std::to_string(k) + ".png";
    WritePng((dir / name).string(), result.samples[k]);
    outputs.push_back(name);
  }
  WritePng((dir / "average.png").string(), result.average);
  outputs.push_back("average.png");
  const std::string snapshot =
      FormatSamplerConfig(cfg, {{"input", a.input},
                                {"operator", in.y.descriptor},
                                {"denoiser", a.denoiser}});
  WriteFileAtomically((dir / "config.txt").string(), snapshot);
  outputs.push_back("config.txt");
  const double write_ms = MsSince(t2);

  MetricReport report;
  if (!a.reference.empty()) {
    const ImageTensor reference = ReadImage(a.reference);
    const ImageTensor decoded = in.op->Decode(in.y);
    if (!decoded.SameShape(reference)) {
      throw Error(ErrorCode::kShapeMismatch, "reference shape differs from input");
    }
    report.rows.push_back(CompareToReference("decoded", decoded, reference));
    report.rows.push_back(CompareToReference("sample_0", result.samples[0], reference));
    report.rows.push_back(CompareToReference("average", result.average, reference));
  }

  Json metrics = Json::array();
  for (const MetricRow& r : report.rows) {
    metrics.push_back({{"image_id", r.image_id},
                       {"psnr", JsonNumber(r.psnr)},
                       {"ssim", JsonNumber(r.ssim)}});
  }
  Json manifest{{"command", "restore"},
                {"input", a.input},
                {"reference", a.reference.empty() ? Json(nullptr) : Json(a.reference)},
                {"operator", in.y.descriptor},
                {"denoiser", a.denoiser},
                {"seed", cfg.seed},
                {"config", ConfigJson(cfg)},
                {"config_snapshot", "config.txt"},
                {"outputs", outputs},
                {"consistency_residual", result.consistency_residual},
                {"metrics", metrics},
                {"notes", in.notes},
                {"timings_ms",
                 {{"load", load_ms}, {"restore", restore_ms}, {"write", write_ms}}}};
  WriteFileAtomically((dir / "manifest.json").string(), manifest.dump(2) + "\n");

  out << "restored " << a.input << " with " << in.y.descriptor << " -> "
      << a.out_dir << " (" << result.samples.size() << " samples)\n";
  for (const MetricRow& r : report.rows) {
    out << r.image_id << ": psnr=" << FormatNumber(r.psnr)
        << " ssim=" << FormatNumber(r.ssim) << "\n";
  }
  return kExitOk;
}

// ---- verify-op ------------------------------------------------------------

struct VerifyArgs {
  std::string op;
  std::string corpus;
};

int RunVerify(const VerifyArgs& a, std::ostream& out) {
  const auto op = MakeOperator(a.op);
  std::vector<ImageTensor> images;
  for (auto& n : LoadCorpus(a.corpus)) images.push_back(std::move(n.image));
  const Property1Report p1 = VerifyProperty1(*op, images);
  const Property2Report p2 = VerifyProperty2(*op, images);
  const Property1Tolerance tol = op->Tolerance();
  out << "operator: " << op->Descriptor() << "\n"
      << "images: " << p1.images << "\n"
      << "property1: values=" << p1.values
      << " fraction_exact=" << FormatNumber(p1.fraction_exact)
      << " max_deviation=" << FormatNumber(p1.max_deviation)
      << " (need fraction_exact>=" << FormatNumber(tol.min_fraction_exact)
      << ", max_deviation<=" << FormatNumber(tol.max_deviation)
      << (tol.relative ? " relative" : "") << ") "
      << (p1.passed ? "PASS" : "FAIL") << "\n"
      << "property2: mean_relative_residual="
      << FormatNumber(p2.mean_relative_residual)
      << " max_abs_residual=" << FormatNumber(p2.max_abs_residual) << "\n";
  return p1.passed ? kExitOk : kExitFailure;
}

// ---- rd-curve -------------------------------------------------------------

struct RdArgs {
  std::string corpus;
  std::vector<int> qfs{5, 10, 20, 30, 40, 50, 60, 70, 80, 90, 95};
  std::string sub = "420";
  std::string restorer = "none";
  std::string out;
  double bridge_timeout_s = 120.0;
  SamplerFlags sampler;
};

int RunRdCurve(const RdArgs& a, std::ostream& out) {
  if (a.sub != "420" && a.sub != "444") {
    throw Error(ErrorCode::kInvalidArgument, "--sub must be 420 or 444");
  }
  const Subsampling sub = a.sub == "420" ? Subsampling::k420 : Subsampling::k444;
  if (a.qfs.empty()) throw Error(ErrorCode::kInvalidArgument, "empty --qf list");
  for (int qf : a.qfs) {
    if (qf < 1 || qf > 100) {
      throw Error(ErrorCode::kInvalidArgument, "QF out of range: " + std::to_string(qf));
    }
  }
  const bool restore = a.restorer != "none";
  std::unique_ptr<Denoiser> denoiser;
  SamplerConfig cfg;
  if (restore) {
    denoiser = MakeDenoiser(a.restorer, a.bridge_timeout_s);
    cfg = a.sampler.Resolve();
  }
  const DiffusionSchedule schedule = MakeSchedule(cfg.num_timesteps);
  const std::vector<NamedImage> corpus = LoadCorpus(a.corpus);
  const long n = static_cast<long>(corpus.size());

  std::ostringstream csv;
  csv << "qf,bpp,psnr_jpeg" << (restore ? ",psnr_restored" : "") << "\n";
  for (int qf : a.qfs) {
    const JpegOperator op(JpegParams::FromQuality(qf, sub),
                          "jpeg:qf=" + std::to_string(qf) + ":sub=" + a.sub);
    std::vector<double> bpp(n), psnr_jpeg(n), psnr_restored(n);
    std::vector<std::exception_ptr> errors(n);
    // One job per image; the sampler's chain loop runs inside each job.
#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
      try {
        const Measurement y = op.Encode(corpus[i].image);
        bpp[i] = Bpp(std::get<JpegCoefficients>(y.payload));
        psnr_jpeg[i] = EvalPsnr(op.Decode(y), corpus[i].image);
        if (restore) {
          const RestorationResult r = Restore(y, op, *denoiser, cfg, schedule);
          psnr_restored[i] = EvalPsnr(r.average, corpus[i].image);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    auto mean = [n](const std::vector<double>& v) {
      double s = 0.0;
      for (double x : v) s += x;
      return s / n;
    };
    csv << qf << ',' << FormatNumber(mean(bpp)) << ','
        << FormatNumber(mean(psnr_jpeg));
    if (restore) csv << ',' << FormatNumber(mean(psnr_restored));
    csv << '\n';
  }
  if (a.out.empty()) {
    out << csv.str();
  } else {
    WriteFileAtomically(a.out, csv.str());
    out << "wrote " << a.out << "\n";
  }
  return kExitOk;
}

// ---- metrics --------------------------------------------------------------

struct MetricsArgs {
  std::string restored;
  std::string reference;
  std::string out;
};

int RunMetrics(const MetricsArgs& a, std::ostream& out) {
  const std::vector<fs::path> restored = ListPngs(a.restored);
  const std::vector<fs::path> reference = ListPngs(a.reference);
  if (restored.size() != reference.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "mismatched image counts: " + std::to_string(restored.size()) +
                    " restored vs " + std::to_string(reference.size()) +
                    " reference");
  }
  if (restored.empty()) throw Error(ErrorCode::kInvalidArgument, "no images to compare");
  MetricReport report;
  for (size_t i = 0; i < restored.size(); ++i) {
    if (restored[i].filename() != reference[i].filename()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "unpaired files: " + restored[i].filename().string() + " vs " +
                      reference[i].filename().string());
    }
    const ImageTensor r = ReadPng(restored[i].string());
    const ImageTensor g = ReadPng(reference[i].string());
    report.rows.push_back(CompareToReference(restored[i].stem().string(), r, g));
  }
  std::ostringstream csv;
  report.WriteCsv(csv);
  if (a.out.empty()) {
    out << csv.str();
  } else {
    WriteFileAtomically(a.out, csv.str());
    out << "images=" << report.rows.size()
        << " mean_psnr=" << FormatNumber(report.MeanPsnr())
        << " mean_ssim=" << FormatNumber(report.MeanSsim()) << "\n";
  }
  return kExitOk;
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Diffusion restoration for JPEG and other lossy measurements"};
  app.require_subcommand(1);

  EncodeArgs encode;
  auto* c_encode = app.add_subcommand("encode", "Encode an image into a measurement file");
  c_encode->add_option("input", encode.input, "PNG or JPEG image")->required();
  c_encode->add_option("operator", encode.op, "Operator descriptor")->required();
  c_encode->add_option("output", encode.output, "Measurement file")->required();

  RestoreArgs restore;
  auto* c_restore = app.add_subcommand("restore", "Sample restorations of a measurement");
  c_restore->add_option("input", restore.input, ".meas, .jpg or .png (with --operator)");
  c_restore->add_option("--operator", restore.op, "Operator descriptor");
  c_restore->add_option("--denoiser", restore.denoiser, "gmm:<json> | bridge:<cmd> | loopback");
  c_restore->add_option("--out", restore.out_dir, "Output directory");
  c_restore->add_option("--reference", restore.reference, "Ground truth for metrics");
  c_restore->add_option("--synthetic", restore.synthetic, "Run a built-in problem (gmm16)");
  c_restore->add_option("--trials", restore.trials, "Trials for --synthetic");
  c_restore->add_option("--prior-seed", restore.prior_seed, "Prior seed for --synthetic");
  c_restore->add_option("--bridge-timeout", restore.bridge_timeout_s, "Seconds per bridge call");
  restore.sampler.Add(c_restore);

  VerifyArgs verify;
  auto* c_verify = app.add_subcommand("verify-op", "Check operator properties on a corpus");
  c_verify->add_option("operator", verify.op, "Operator descriptor")->required();
  c_verify->add_option("corpus", verify.corpus, "Directory of PNG images")->required();

  RdArgs rd;
  auto* c_rd = app.add_subcommand("rd-curve", "Rate-distortion table over QF");
  c_rd->add_option("corpus", rd.corpus, "Directory of PNG images")->required();
  c_rd->add_option("--qf", rd.qfs, "Quality factors")->delimiter(',');
  c_rd->add_option("--sub", rd.sub, "Chroma subsampling (420|444)");
  c_rd->add_option("--restorer", rd.restorer, "none | gmm:<json> | bridge:<cmd> | loopback");
  c_rd->add_option("--out", rd.out, "CSV path (stdout if absent)");
  c_rd->add_option("--bridge-timeout", rd.bridge_timeout_s, "Seconds per bridge call");
  rd.sampler.Add(c_rd);

  MetricsArgs metrics;
  auto* c_metrics = app.add_subcommand("metrics", "PSNR/SSIM of paired PNG directories");
  c_metrics->add_option("restored", metrics.restored, "Restored images")->required();
  c_metrics->add_option("reference", metrics.reference, "Reference images")->required();
  c_metrics->add_option("--out", metrics.out, "CSV path (stdout if absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (c_encode->parsed()) return RunEncode(encode, out);
    if (c_restore->parsed()) return RunRestore(restore, out);
    if (c_verify->parsed()) return RunVerify(verify, out);
    if (c_rd->parsed()) return RunRdCurve(rd, out);
    if (c_metrics->parsed()) return RunMetrics(metrics, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ddr
