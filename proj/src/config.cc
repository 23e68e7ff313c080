// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/config.h"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace swiftnet {
namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

int64_t ParseInt(const std::string& key, const std::string& v) {
  int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError("key '" + key + "' expects an integer, got '" + v + "'");
  return out;
}

double ParseDouble(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "' expects a number, got '" + v + "'");
}

bool ParseBool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("key '" + key + "' expects true/false, got '" + v + "'");
}

using Setter = std::function<void(SepConfig&, TrainConfig&, const std::string& key,
                                  const std::string& value)>;

const std::map<std::string, Setter>& Setters() {
  static const auto* table = [] {
    auto* m = new std::map<std::string, Setter>;
    auto int_key = [m](const char* name, int64_t SepConfig::*field) {
      (*m)[name] = [field](SepConfig& s, TrainConfig&, const std::string& k,
                           const std::string& v) { s.*field = ParseInt(k, v); };
    };
    int_key("audio_channels", &SepConfig::audio_channels);
    int_key("enc_channels", &SepConfig::enc_channels);
    int_key("visual_channels", &SepConfig::visual_channels);
    int_key("lightvid_channels", &SepConfig::lightvid_channels);
    int_key("lightvid_sru_hidden", &SepConfig::lightvid_sru_hidden);
    int_key("groups", &SepConfig::groups);
    int_key("repeats", &SepConfig::repeats);
    int_key("heads", &SepConfig::heads);
    int_key("hid_freq", &SepConfig::hid_freq);
    int_key("hid_time", &SepConfig::hid_time);
    int_key("unfold_kernel", &SepConfig::unfold_kernel);
    int_key("ffn_hidden", &SepConfig::ffn_hidden);
    int_key("dec_kernel_time", &SepConfig::dec_kernel_time);
    int_key("dec_kernel_freq", &SepConfig::dec_kernel_freq);
    (*m)["use_bias"] = [](SepConfig& s, TrainConfig&, const std::string& k,
                          const std::string& v) { s.use_bias = ParseBool(k, v); };
    (*m)["time_bidirectional"] = [](SepConfig& s, TrainConfig&, const std::string& k,
                                    const std::string& v) {
      s.time_bidirectional = ParseBool(k, v);
    };
    (*m)["win_len"] = [](SepConfig& s, TrainConfig&, const std::string& k,
                         const std::string& v) { s.stft.win_len = ParseInt(k, v); };
    (*m)["hop"] = [](SepConfig& s, TrainConfig&, const std::string& k, const std::string& v) {
      s.stft.hop = ParseInt(k, v);
    };
    (*m)["sample_rate"] = [](SepConfig& s, TrainConfig&, const std::string& k,
                             const std::string& v) { s.stft.sample_rate = ParseInt(k, v); };
    (*m)["video_fps"] = [](SepConfig& s, TrainConfig&, const std::string& k,
                           const std::string& v) { s.video_fps = ParseInt(k, v); };

    (*m)["lr"] = [](SepConfig&, TrainConfig& t, const std::string& k, const std::string& v) {
      t.lr = ParseDouble(k, v);
    };
    (*m)["weight_decay"] = [](SepConfig&, TrainConfig& t, const std::string& k,
                              const std::string& v) { t.weight_decay = ParseDouble(k, v); };
    (*m)["plateau_patience"] = [](SepConfig&, TrainConfig& t, const std::string& k,
                                  const std::string& v) { t.plateau_patience = ParseInt(k, v); };
    (*m)["lr_decay"] = [](SepConfig&, TrainConfig& t, const std::string& k,
                          const std::string& v) { t.lr_decay = ParseDouble(k, v); };
    (*m)["epochs"] = [](SepConfig&, TrainConfig& t, const std::string& k, const std::string& v) {
      t.epochs = ParseInt(k, v);
    };
    (*m)["batch_size"] = [](SepConfig&, TrainConfig& t, const std::string& k,
                            const std::string& v) { t.batch_size = ParseInt(k, v); };
    (*m)["seed"] = [](SepConfig&, TrainConfig& t, const std::string& k, const std::string& v) {
      const int64_t s = ParseInt(k, v);
      if (s < 0) throw ConfigError("seed must be non-negative");
      t.seed = static_cast<uint64_t>(s);
    };
    (*m)["grad_clip"] = [](SepConfig&, TrainConfig& t, const std::string& k,
                           const std::string& v) { t.grad_clip = ParseDouble(k, v); };
    (*m)["crop_seconds"] = [](SepConfig&, TrainConfig& t, const std::string& k,
                              const std::string& v) { t.crop_seconds = ParseDouble(k, v); };
    return m;
  }();
  return *table;
}

}  // namespace

void SepConfig::Validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(audio_channels >= 1 && enc_channels >= 2 && visual_channels >= 1 &&
              lightvid_channels >= 1 && lightvid_sru_hidden >= 1,
          "channel widths must be positive");
  require(enc_channels % 2 == 0, "enc_channels must be even (real/imaginary halves)");
  require(groups >= 1, "groups must be >= 1");
  require(repeats >= 1, "repeats must be >= 1");
  require(unfold_kernel >= 1, "unfold_kernel must be >= 1");
  const int64_t unfolded = unfold_kernel * audio_channels;
  require(unfolded % groups == 0, "groups " + std::to_string(groups) + " must divide " +
                                      std::to_string(unfolded) + " unfolded channels");
  require(hid_freq % groups == 0 && hid_time % groups == 0,
          "groups must divide hid_freq and hid_time");
  require(heads >= 1 && audio_channels % heads == 0, "heads must divide audio_channels");
  require(ffn_hidden >= 1, "ffn_hidden must be >= 1");
  require(dec_kernel_time >= 1 && dec_kernel_freq >= 1 && dec_kernel_freq % 2 == 1,
          "decoder kernel must be positive with an odd frequency extent");
  require(video_fps >= 1, "video_fps must be >= 1");
  stft.Validate();
  frames_per_video();
}

int64_t SepConfig::frames_per_video() const {
  const int64_t samples_per_video = stft.sample_rate / video_fps;
  if (stft.sample_rate % video_fps != 0 || samples_per_video % stft.hop != 0)
    throw ConfigError("video frame period must be a whole number of STFT hops");
  return samples_per_video / stft.hop;
}

SepConfig SepConfig::Toy() {
  SepConfig c;
  c.audio_channels = 16;
  c.enc_channels = 32;
  c.visual_channels = 32;
  c.lightvid_channels = 16;
  c.lightvid_sru_hidden = 16;
  c.groups = 2;
  c.repeats = 2;
  c.heads = 4;
  c.hid_freq = 8;
  c.hid_time = 16;
  c.ffn_hidden = 32;
  return c;
}

void TrainConfig::Validate() const {
  if (!(lr > 0)) throw ConfigError("lr must be positive");
  if (weight_decay < 0) throw ConfigError("weight_decay must be non-negative");
  if (plateau_patience < 1) throw ConfigError("plateau_patience must be >= 1");
  if (!(lr_decay > 0 && lr_decay <= 1)) throw ConfigError("lr_decay must be in (0, 1]");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (crop_seconds < 0) throw ConfigError("crop_seconds must be non-negative");
}

std::pair<SepConfig, TrainConfig> ParseConfig(const std::string& text) {
  SepConfig sep;
  TrainConfig train;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    auto it = Setters().find(key);
    if (it == Setters().end())
      throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (value.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty value");
    it->second(sep, train, key, value);
  }
  sep.Validate();
  train.Validate();
  return {sep, train};
}

std::pair<SepConfig, TrainConfig> LoadConfig(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ParseConfig(ss.str());
}

std::string FormatConfig(const SepConfig& s, const TrainConfig& t) {
  std::ostringstream o;
  o.precision(17);
  o << "audio_channels = " << s.audio_channels << "\n"
    << "enc_channels = " << s.enc_channels << "\n"
    << "visual_channels = " << s.visual_channels << "\n"
    << "lightvid_channels = " << s.lightvid_channels << "\n"
    << "lightvid_sru_hidden = " << s.lightvid_sru_hidden << "\n"
    << "groups = " << s.groups << "\n"
    << "repeats = " << s.repeats << "\n"
    << "heads = " << s.heads << "\n"
    << "hid_freq = " << s.hid_freq << "\n"
    << "hid_time = " << s.hid_time << "\n"
    << "unfold_kernel = " << s.unfold_kernel << "\n"
    << "ffn_hidden = " << s.ffn_hidden << "\n"
    << "dec_kernel_time = " << s.dec_kernel_time << "\n"
    << "dec_kernel_freq = " << s.dec_kernel_freq << "\n"
    << "use_bias = " << (s.use_bias ? "true" : "false") << "\n"
    << "time_bidirectional = " << (s.time_bidirectional ? "true" : "false") << "\n"
    << "win_len = " << s.stft.win_len << "\n"
    << "hop = " << s.stft.hop << "\n"
    << "sample_rate = " << s.stft.sample_rate << "\n"
    << "video_fps = " << s.video_fps << "\n"
    << "lr = " << t.lr << "\n"
    << "weight_decay = " << t.weight_decay << "\n"
    << "plateau_patience = " << t.plateau_patience << "\n"
    << "lr_decay = " << t.lr_decay << "\n"
    << "epochs = " << t.epochs << "\n"
    << "batch_size = " << t.batch_size << "\n"
    << "seed = " << t.seed << "\n"
    << "grad_clip = " << t.grad_clip << "\n"
    << "crop_seconds = " << t.crop_seconds << "\n";
  return o.str();
}

}  // namespace swiftnet
