// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

// swiftnet: command-line front end.
//
// Exit codes: 0 ok, 1 runtime failure, 2 usage or config error, 3 malformed
// input file, 4 causality violation.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "swiftnet/autodiff.h"
#include "swiftnet/causality.h"
#include "swiftnet/config.h"
#include "swiftnet/metrics.h"
#include "swiftnet/model.h"
#include "swiftnet/params.h"
#include "swiftnet/profile.h"
#include "swiftnet/stream.h"
#include "swiftnet/swnv.h"
#include "swiftnet/synth.h"
#include "swiftnet/trainer.h"
#include "swiftnet/wav.h"

namespace sn = swiftnet;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitViolation = 4;

std::pair<sn::SepConfig, sn::TrainConfig> Configs(const std::string& path) {
  if (path.empty()) return {sn::SepConfig{}, sn::TrainConfig{}};
  return sn::LoadConfig(path);
}

sn::Model LoadModel(const std::string& weights, const sn::SepConfig& cfg) {
  return sn::Model::Load(weights, cfg);
}

int Separate(const std::string& weights, const std::string& config, const std::string& mix_path,
             const std::string& visual_path, const std::string& out_path, bool stream,
             double chunk_ms) {
  const auto [cfg, tc] = Configs(config);
  const sn::Model model = LoadModel(weights, cfg);
  const auto mix = sn::wav::Read(mix_path, cfg.stft.sample_rate);
  const sn::Tensor visual = sn::swnv::Read(visual_path);
  if (mix.samples.empty()) throw sn::FormatError(mix_path + ": no samples");
  if (visual.dim(0) != cfg.visual_channels)
    throw sn::FormatError(visual_path + ": " + std::to_string(visual.dim(0)) +
                          " visual channels, model expects " +
                          std::to_string(cfg.visual_channels));
  const int64_t chunk = static_cast<int64_t>(chunk_ms * cfg.stft.sample_rate / 1000.0);
  if (stream && chunk < 1) throw sn::ConfigError("--chunk-ms must cover at least one sample");

  sn::autodiff::NoGradScope no_grad;
  std::vector<double> est;
  if (stream) {
    auto state = sn::StreamState::Open(model);
    state.PushVideo(visual);
    const auto& x = mix.samples;
    for (size_t pos = 0; pos < x.size(); pos += static_cast<size_t>(chunk)) {
      const size_t n = std::min(x.size() - pos, static_cast<size_t>(chunk));
      const auto out = state.Push({x.data() + pos, n});
      est.insert(est.end(), out.begin(), out.end());
    }
    const auto tail = state.Finish();
    est.insert(est.end(), tail.begin(), tail.end());
  } else {
    const sn::Tensor x({1, static_cast<int64_t>(mix.samples.size())}, mix.samples);
    est = sn::Forward(model, x, visual).ToVector();
  }
  sn::wav::Write(out_path, est, cfg.stft.sample_rate);
  std::printf("samples %zu count\nmode %s -\n", est.size(), stream ? "stream" : "batch");
  return kExitOk;
}

int Train(const std::string& config, const std::string& data, const std::string& out,
          const std::string& log_path, int64_t max_steps, uint64_t init_seed) {
  const auto [cfg, tc] = Configs(config);
  const auto examples = sn::synth::LoadCorpus(data);
  for (const auto& ex : examples)
    if (ex.visual.dim(0) != cfg.visual_channels)
      throw sn::FormatError(data + ": visual features have " + std::to_string(ex.visual.dim(0)) +
                            " channels, config expects " + std::to_string(cfg.visual_channels));
  sn::Model model = sn::Model::Create(cfg, init_seed);
  std::ofstream log_file;
  if (!log_path.empty()) {
    log_file.open(log_path);
    if (!log_file) throw sn::Error("cannot write log '" + log_path + "'");
  }
  struct Tee : std::streambuf {
    std::streambuf *a, *b;
    int overflow(int c) override {
      if (c == EOF) return 0;
      a->sputc(static_cast<char>(c));
      if (b) b->sputc(static_cast<char>(c));
      return c;
    }
    int sync() override {
      a->pubsync();
      if (b) b->pubsync();
      return 0;
    }
  } tee;
  tee.a = std::cout.rdbuf();
  tee.b = log_file.is_open() ? log_file.rdbuf() : nullptr;
  std::ostream log(&tee);
  sn::train::Options opt;
  opt.log = &log;
  if (max_steps > 0) opt.max_steps = max_steps;
  sn::train::Train(model, examples, examples, tc, opt);
  sn::SaveWeights(out, model.params);
  std::printf("si_snri %.2f dB\n", sn::train::MeanSiSnri(model, examples));
  return kExitOk;
}

int Profile(const std::string& weights, const std::string& config, double seconds, int reps) {
  const auto [cfg, tc] = Configs(config);
  std::optional<sn::Model> model;
  if (!weights.empty()) model = LoadModel(weights, cfg);
  auto report = sn::profile::Analyze(cfg, static_cast<int64_t>(seconds * cfg.stft.sample_rate));
  if (model) {
    const int64_t counted = sn::profile::CountParams(model->params);
    if (counted != report.params)
      throw sn::FormatError("weight file holds " + std::to_string(counted) +
                            " scalars, layout expects " + std::to_string(report.params));
    if (reps > 0) report.latency_ms = sn::profile::MeasureLatency(*model, seconds, reps);
  }
  std::cout << sn::profile::FormatReport(report);
  return kExitOk;
}

int VerifyCausality(const std::string& weights, const std::string& config, int trials,
                    uint64_t seed, bool verbose) {
  const auto [cfg, tc] = Configs(config);
  if (trials < 1) throw sn::ConfigError("--trials must be >= 1");
  const sn::Model model = LoadModel(weights, cfg);
  const auto rep =
      sn::causality::Verify(sn::causality::ModelFn(model), sn::causality::ModelOptions(cfg, trials, seed));
  std::string text = sn::causality::FormatReport(rep);
  if (!verbose) text = text.substr(0, text.find("trial 0 "));
  std::cout << text;
  return rep.violation() ? kExitViolation : kExitOk;
}

int Metrics(const std::string& est_path, const std::string& ref_path, const std::string& mix_path) {
  const auto est = sn::wav::Read(est_path).samples;
  const auto ref = sn::wav::Read(ref_path).samples;
  if (est.size() != ref.size())
    throw sn::FormatError("estimate has " + std::to_string(est.size()) + " samples, reference " +
                          std::to_string(ref.size()));
  std::printf("si_snr %.2f dB\nsdr %.2f dB\n", sn::metrics::SiSnr(est, ref),
              sn::metrics::Sdr(est, ref));
  if (!mix_path.empty()) {
    const auto mix = sn::wav::Read(mix_path).samples;
    if (mix.size() != ref.size())
      throw sn::FormatError("mixture has " + std::to_string(mix.size()) + " samples, reference " +
                            std::to_string(ref.size()));
    std::printf("si_snri %.2f dB\nsdri %.2f dB\n", sn::metrics::SiSnrImprovement(est, mix, ref),
                sn::metrics::SdrImprovement(est, mix, ref));
  }
  return kExitOk;
}

int Synth(const std::string& spec_path, const std::string& out) {
  const auto spec = spec_path.empty() ? sn::synth::SynthSpec{} : sn::synth::LoadSpec(spec_path);
  const auto entries = sn::synth::Generate(spec, out);
  std::printf("pairs %zu count\nsamples %lld per_file\nvideo_frames %lld per_file\n",
              entries.size(), static_cast<long long>(spec.num_samples()),
              static_cast<long long>(spec.num_video_frames()));
  return kExitOk;
}

int Init(const std::string& config, const std::string& out, uint64_t seed) {
  const auto [cfg, tc] = Configs(config);
  const auto model = sn::Model::Create(cfg, seed);
  sn::SaveWeights(out, model.params);
  std::printf("params %lld count\n", static_cast<long long>(model.params.scalar_count()));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  sn::RetainFreedMemory();
  CLI::App app{"swiftnet: causal audio-visual speech separation"};
  app.require_subcommand(1);

  std::string weights, config, mix, visual, out, est, ref, data, spec, log_path;
  bool stream = false, verbose = false;
  double chunk_ms = 8.0, seconds = 2.0;
  int trials = 100, reps = 3;
  int64_t max_steps = 0;
  uint64_t seed = 1;

  auto* sep = app.add_subcommand("separate", "extract the target speaker");
  sep->add_option("--model", weights, "weight file")->required();
  sep->add_option("--config", config, "key = value config file");
  sep->add_option("--mix", mix, "mixture wav (PCM16 mono 16 kHz)")->required();
  sep->add_option("--visual", visual, "target visual features (.swnv)")->required();
  sep->add_option("--out", out, "estimate wav")->required();
  sep->add_flag("--stream", stream, "run the frame-incremental runtime");
  sep->add_option("--chunk-ms", chunk_ms, "stream chunk length in ms");

  auto* tr = app.add_subcommand("train", "train on a synthetic corpus");
  tr->add_option("--config", config, "key = value config file");
  tr->add_option("--data", data, "corpus directory")->required();
  tr->add_option("--out", out, "output weight file")->required();
  tr->add_option("--log", log_path, "training log file");
  tr->add_option("--max-steps", max_steps, "stop after this many optimizer steps");
  tr->add_option("--init-seed", seed, "weight initialization seed");

  auto* prof = app.add_subcommand("profile", "parameter, MAC and latency report");
  prof->add_option("--model", weights, "weight file (enables latency)");
  prof->add_option("--config", config, "key = value config file");
  prof->add_option("--seconds", seconds, "segment length")->check(CLI::PositiveNumber);
  prof->add_option("--reps", reps, "timed repetitions (0 skips latency)")->check(CLI::NonNegativeNumber);

  auto* caus = app.add_subcommand("verify-causality", "perturbation causality check");
  caus->add_option("--model", weights, "weight file")->required();
  caus->add_option("--config", config, "key = value config file");
  caus->add_option("--trials", trials, "randomized trials");
  caus->add_option("--seed", seed, "trial seed");
  caus->add_flag("--verbose", verbose, "print every trial");

  auto* met = app.add_subcommand("metrics", "SI-SNR and SDR of an estimate");
  met->add_option("--est", est, "estimate wav")->required();
  met->add_option("--ref", ref, "reference wav")->required();
  met->add_option("--mix", mix, "mixture wav (enables improvements)");

  auto* syn = app.add_subcommand("synth", "generate a synthetic corpus");
  syn->add_option("--spec", spec, "synth spec file (key = value)");
  syn->add_option("--out", out, "output directory")->required();

  auto* init = app.add_subcommand("init", "write freshly initialized weights");
  init->add_option("--config", config, "key = value config file");
  init->add_option("--out", out, "output weight file")->required();
  init->add_option("--seed", seed, "initialization seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sep) return Separate(weights, config, mix, visual, out, stream, chunk_ms);
    if (*tr) return Train(config, data, out, log_path, max_steps, seed);
    if (*prof) return Profile(weights, config, seconds, reps);
    if (*caus) return VerifyCausality(weights, config, trials, seed, verbose);
    if (*met) return Metrics(est, ref, mix);
    if (*syn) return Synth(spec, out);
    if (*init) return Init(config, out, seed);
  } catch (const sn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const sn::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const sn::ShapeError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const sn::CausalityError& e) {
    std::cerr << "causality error: " << e.what() << "\n";
    return kExitViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
