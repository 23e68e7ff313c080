// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/synth.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "swiftnet/swnv.h"
#include "swiftnet/wav.h"

namespace swiftnet::synth {
namespace {

namespace fs = std::filesystem;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

enum class Kind { kTone, kNoise, kChirp };

uint64_t PairSeed(uint64_t seed, int index) {
  // splitmix64 step so neighbouring indices get unrelated streams.
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<uint64_t>(index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

std::vector<double> Speaker(Kind kind, double rate_hz, int64_t n, int sr, std::mt19937_64& rng) {
  const double phase = Uniform(rng, 0, kTwoPi);
  std::vector<double> env(n);
  for (int64_t i = 0; i < n; ++i) {
    const double s = 0.5 + 0.5 * std::sin(kTwoPi * rate_hz * i / sr + phase);
    env[i] = 0.05 + 0.95 * s * s;
  }
  std::vector<double> x(n);
  switch (kind) {
    case Kind::kTone: {
      const double f0 = Uniform(rng, 150, 400);
      for (int64_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        x[i] = std::sin(kTwoPi * f0 * t) + 0.5 * std::sin(kTwoPi * 2 * f0 * t) +
               0.25 * std::sin(kTwoPi * 3 * f0 * t);
      }
      break;
    }
    case Kind::kNoise: {
      // Two-pole resonator around a random centre frequency.
      const double fc = Uniform(rng, 600, 2500), r = 0.97;
      const double a1 = 2 * r * std::cos(kTwoPi * fc / sr), a2 = -r * r;
      double y1 = 0, y2 = 0;
      for (int64_t i = 0; i < n; ++i) {
        const double w = Uniform(rng, -1, 1);
        const double y = w + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        x[i] = y;
      }
      break;
    }
    case Kind::kChirp: {
      const double lo = Uniform(rng, 300, 700), hi = lo + Uniform(rng, 800, 1500);
      const double sweep = Uniform(rng, 0.5, 1.0);  // seconds per up-down cycle
      double ph = 0;
      for (int64_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        const double tri = 1.0 - std::abs(2.0 * std::fmod(t / sweep, 1.0) - 1.0);
        ph += kTwoPi * (lo + (hi - lo) * tri) / sr;
        x[i] = std::sin(ph);
      }
      break;
    }
  }
  double peak = 1e-12;
  for (int64_t i = 0; i < n; ++i) {
    x[i] *= env[i];
    peak = std::max(peak, std::abs(x[i]));
  }
  for (auto& v : x) v /= peak;
  return x;
}

double Energy(const std::vector<double>& x) {
  double e = 0;
  for (double v : x) e += v * v;
  return e;
}

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<uint8_t> ReadBytes(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw FormatError("cannot open '" + p.string() + "'");
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace

void SynthSpec::Validate() const {
  if (num_pairs < 1) throw ConfigError("num_pairs must be >= 1");
  if (!(duration_s > 0)) throw ConfigError("duration_s must be positive");
  if (visual_channels < 8 || visual_channels > 512)
    throw ConfigError("visual_channels must be in [8, 512]");
  if (!(snr_min_db <= snr_max_db)) throw ConfigError("snr_min_db must not exceed snr_max_db");
  if (sample_rate != wav::kSampleRate) throw ConfigError("sample_rate must be 16000");
  if (fps < 1 || sample_rate % fps != 0) throw ConfigError("fps must divide the sample rate");
}

int64_t SynthSpec::num_samples() const {
  return static_cast<int64_t>(std::llround(duration_s * sample_rate));
}

int64_t SynthSpec::num_video_frames() const {
  const int64_t per = sample_rate / fps;
  return (num_samples() + per - 1) / per;
}

SynthSpec ParseSpec(const std::string& text) {
  SynthSpec s;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = Trim(line.substr(0, eq)), value = Trim(line.substr(eq + 1));
    try {
      size_t used = 0;
      if (key == "num_pairs") {
        s.num_pairs = std::stoi(value, &used);
      } else if (key == "duration_s") {
        s.duration_s = std::stod(value, &used);
      } else if (key == "visual_channels") {
        s.visual_channels = std::stoll(value, &used);
      } else if (key == "snr_min_db") {
        s.snr_min_db = std::stod(value, &used);
      } else if (key == "snr_max_db") {
        s.snr_max_db = std::stod(value, &used);
      } else if (key == "seed") {
        s.seed = std::stoull(value, &used);
      } else if (key == "sample_rate") {
        s.sample_rate = std::stoi(value, &used);
      } else if (key == "fps") {
        s.fps = std::stoi(value, &used);
      } else {
        throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      }
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw ConfigError("line " + std::to_string(lineno) + ": bad value '" + value + "' for '" +
                        key + "'");
    }
  }
  s.Validate();
  return s;
}

SynthSpec LoadSpec(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open synth spec '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ParseSpec(ss.str());
}

Tensor VisualFeatures(const std::vector<double>& wave, int64_t channels, int sample_rate,
                      int fps) {
  const int64_t per = sample_rate / fps;
  const int64_t frames = (static_cast<int64_t>(wave.size()) + per - 1) / per;
  std::vector<double> z(frames);
  for (int64_t v = 0; v < frames; ++v) {
    double e = 0;
    int64_t count = 0;
    for (int64_t i = v * per; i < std::min<int64_t>((v + 1) * per, wave.size()); ++i, ++count)
      e += wave[i] * wave[i];
    const double rms = std::sqrt(e / std::max<int64_t>(count, 1));
    z[v] = (std::log(rms + 1e-4) + 2.5) / 1.5;
  }
  // Fixed projection, shared by every corpus.
  std::mt19937_64 proj(0x5157f7ULL);
  std::vector<double> a(channels * 3), b(channels);
  for (auto& x : a) x = Uniform(proj, -1.5, 1.5);
  for (auto& x : b) x = Uniform(proj, -1.0, 1.0);
  Tensor out({channels, frames});
  for (int64_t c = 0; c < channels; ++c)
    for (int64_t v = 0; v < frames; ++v) {
      double s = b[c];
      for (int64_t j = 0; j < 3; ++j) s += a[c * 3 + j] * z[std::max<int64_t>(v - j, 0)];
      out.mutable_ptr()[c * frames + v] = std::tanh(s);
    }
  return out;
}

Pair GeneratePair(const SynthSpec& spec, int index) {
  spec.Validate();
  std::mt19937_64 rng(PairSeed(spec.seed, index));
  const int64_t n = spec.num_samples();
  Kind kinds[3] = {Kind::kTone, Kind::kNoise, Kind::kChirp};
  std::shuffle(std::begin(kinds), std::end(kinds), rng);
  // Disjoint envelope-rate bands; which band the target gets alternates.
  double r1 = Uniform(rng, 1.5, 3.0), r2 = Uniform(rng, 4.5, 7.0);
  if (index % 2 == 1) std::swap(r1, r2);
  std::vector<double> s1 = Speaker(kinds[0], r1, n, spec.sample_rate, rng);
  std::vector<double> s2 = Speaker(kinds[1], r2, n, spec.sample_rate, rng);

  Pair p;
  p.snr_db = Uniform(rng, spec.snr_min_db, spec.snr_max_db);
  const double g2 = std::sqrt(Energy(s1) / Energy(s2) * std::pow(10.0, -p.snr_db / 10.0));
  double peak = 1e-12;
  for (int64_t i = 0; i < n; ++i) {
    s2[i] *= g2;
    peak = std::max(peak, std::abs(s1[i] + s2[i]));
  }
  const double scale = 0.7 / peak;
  p.target.resize(n);
  p.interferer.resize(n);
  p.mix.resize(n);
  for (int64_t i = 0; i < n; ++i) {
    // Quantize each source so the stored mixture is their exact sum.
    const int a = wav::ToPcm(s1[i] * scale), b = wav::ToPcm(s2[i] * scale);
    p.target[i] = a / 32768.0;
    p.interferer[i] = b / 32768.0;
    p.mix[i] = (a + b) / 32768.0;
  }
  p.target_visual = VisualFeatures(p.target, spec.visual_channels, spec.sample_rate, spec.fps);
  p.interferer_visual =
      VisualFeatures(p.interferer, spec.visual_channels, spec.sample_rate, spec.fps);
  return p;
}

std::vector<ManifestEntry> Generate(const SynthSpec& spec, const std::string& out_dir) {
  spec.Validate();
  const fs::path root(out_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec || !fs::is_directory(root)) throw Error("cannot create output directory '" + out_dir + "'");
  std::vector<ManifestEntry> entries;
  std::ostringstream manifest;
  manifest << "# name mix target interferer target_visual interferer_visual snr_db\n";
  for (int i = 0; i < spec.num_pairs; ++i) {
    const Pair p = GeneratePair(spec, i);
    char name[32];
    std::snprintf(name, sizeof(name), "pair_%03d", i);
    fs::create_directories(root / name, ec);
    if (ec) throw Error("cannot create '" + (root / name).string() + "'");
    ManifestEntry e;
    e.name = name;
    e.mix = std::string(name) + "/mix.wav";
    e.target = std::string(name) + "/target.wav";
    e.interferer = std::string(name) + "/interferer.wav";
    e.target_visual = std::string(name) + "/target.swnv";
    e.interferer_visual = std::string(name) + "/interferer.swnv";
    e.snr_db = p.snr_db;
    wav::Write((root / e.mix).string(), p.mix, spec.sample_rate);
    wav::Write((root / e.target).string(), p.target, spec.sample_rate);
    wav::Write((root / e.interferer).string(), p.interferer, spec.sample_rate);
    swnv::Write((root / e.target_visual).string(), p.target_visual);
    swnv::Write((root / e.interferer_visual).string(), p.interferer_visual);
    char snr[32];
    std::snprintf(snr, sizeof(snr), "%.6f", e.snr_db);
    manifest << e.name << " " << e.mix << " " << e.target << " " << e.interferer << " "
             << e.target_visual << " " << e.interferer_visual << " " << snr << "\n";
    entries.push_back(e);
  }
  std::ofstream f(root / "manifest.txt");
  f << manifest.str();
  if (!f) throw Error("cannot write manifest in '" + out_dir + "'");
  return entries;
}

std::vector<ManifestEntry> ReadManifest(const std::string& dir) {
  std::ifstream f(fs::path(dir) / "manifest.txt");
  if (!f) throw FormatError("no manifest.txt in '" + dir + "'");
  std::vector<ManifestEntry> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream in(line);
    ManifestEntry e;
    if (!(in >> e.name >> e.mix >> e.target >> e.interferer >> e.target_visual >>
          e.interferer_visual >> e.snr_db))
      throw FormatError("malformed manifest line: " + line);
    out.push_back(e);
  }
  if (out.empty()) throw FormatError("manifest in '" + dir + "' lists no pairs");
  return out;
}

std::vector<Example> ExamplesFromPair(const Pair& p) {
  const int64_t n = static_cast<int64_t>(p.mix.size());
  Tensor mix({1, n}, p.mix);
  return {{mix, Tensor({1, n}, p.target), p.target_visual},
          {mix, Tensor({1, n}, p.interferer), p.interferer_visual}};
}

std::vector<Example> LoadCorpus(const std::string& dir) {
  std::vector<Example> out;
  const fs::path root(dir);
  for (const auto& e : ReadManifest(dir)) {
    Pair p;
    p.mix = wav::Read((root / e.mix).string()).samples;
    p.target = wav::Read((root / e.target).string()).samples;
    p.interferer = wav::Read((root / e.interferer).string()).samples;
    p.target_visual = swnv::Parse(ReadBytes(root / e.target_visual));
    p.interferer_visual = swnv::Parse(ReadBytes(root / e.interferer_visual));
    if (p.mix.size() != p.target.size() || p.mix.size() != p.interferer.size())
      throw FormatError(e.name + ": waveform lengths differ");
    for (const auto& ex : ExamplesFromPair(p)) out.push_back(ex);
  }
  return out;
}

}  // namespace swiftnet::synth
