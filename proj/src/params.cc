// Copyright 2026 The swiftnet-cpp Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "swiftnet/params.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace swiftnet {
namespace {

static_assert(std::endian::native == std::endian::little, "weight files assume little-endian");

class LayoutBuilder {
 public:
  explicit LayoutBuilder(bool use_bias) : use_bias_(use_bias) {}

  // Weight with uniform init scaled by 1/sqrt(fan_in).
  void Weight(const std::string& name, Shape shape, int64_t fan_in) {
    specs_.push_back({name, std::move(shape), InitKind::kUniform,
                      1.0 / std::sqrt(static_cast<double>(fan_in))});
  }
  void Bias(const std::string& name, Shape shape, double value = 0.0) {
    if (!use_bias_) return;
    specs_.push_back({name, std::move(shape), value == 0.0 ? InitKind::kZeros : InitKind::kConstant,
                      value});
  }
  void Const(const std::string& name, Shape shape, double value) {
    specs_.push_back({name, std::move(shape), InitKind::kConstant, value});
  }
  void Sru(const std::string& prefix, int64_t d_in, int64_t d_hid) {
    Weight(prefix + ".w", {d_in, d_hid}, d_in);
    Weight(prefix + ".w_f", {d_in, d_hid}, d_in);
    Weight(prefix + ".w_r", {d_in, d_hid}, d_in);
    specs_.push_back({prefix + ".v_f", {d_hid}, InitKind::kUniform, 0.5});
    specs_.push_back({prefix + ".v_r", {d_hid}, InitKind::kUniform, 0.5});
    specs_.push_back({prefix + ".b_f", {d_hid}, InitKind::kZeros, 0.0});
    specs_.push_back({prefix + ".b_r", {d_hid}, InitKind::kZeros, 0.0});
    if (d_in != d_hid) Weight(prefix + ".proj", {d_in, d_hid}, d_in);
  }
  std::vector<ParamSpec> Take() { return std::move(specs_); }

 private:
  bool use_bias_;
  std::vector<ParamSpec> specs_;
};

template <class T>
void WriteRaw(std::ofstream& f, const T& v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
bool ReadRaw(std::ifstream& f, T& v) {
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<size_t>(f.gcount()) == sizeof(T);
}

}  // namespace

std::vector<ParamSpec> ParamLayout(const SepConfig& cfg) {
  cfg.Validate();
  const int64_t ca = cfg.audio_channels, ce = cfg.enc_channels, cv = cfg.visual_channels;
  const int64_t ch = cfg.lightvid_channels, hs = cfg.lightvid_sru_hidden;
  const int64_t g = cfg.groups, k = cfg.unfold_kernel;
  const int64_t hf = cfg.hid_freq, ht = cfg.hid_time, unfolded = k * ca;
  const int64_t time_dirs = cfg.time_bidirectional ? 2 : 1;
  LayoutBuilder b(cfg.use_bias);

  b.Weight("enc.conv.w", {ce, 3, 1, 1}, 3);
  b.Bias("enc.conv.b", {ce});
  b.Const("enc.norm.gain", {ce, 1, 1}, 1.0);
  b.Bias("enc.norm.bias", {ce, 1, 1});
  b.Const("enc.prelu", {ce, 1, 1}, 0.25);
  b.Weight("bottleneck.w", {ca, ce, 1, 1}, ce);
  b.Bias("bottleneck.b", {ca});

  b.Const("lv.dw.scale", {cv, 1}, 1.0);
  b.Bias("lv.dw.bias", {cv, 1});
  b.Const("lv.norm.gain", {cv, 1}, 1.0);
  b.Bias("lv.norm.bias", {cv, 1});
  b.Weight("lv.down.w", {ch, cv, 1}, cv);
  b.Bias("lv.down.b", {ch});
  b.Sru("lv.sru", ch, hs);
  b.Weight("lv.up.w", {cv, hs, 1}, hs);
  b.Bias("lv.up.b", {cv});

  b.Weight("ftgs.down.w", {ca, ca, 1, 1}, ca);
  b.Bias("ftgs.down.b", {ca});
  for (int64_t i = 0; i < g; ++i) {
    const std::string p = "ftgs.freq.g" + std::to_string(i);
    b.Sru(p + ".fwd", unfolded / g, hf / g);
    b.Sru(p + ".bwd", unfolded / g, hf / g);
  }
  b.Weight("ftgs.freq.fold.w", {2 * hf, ca, 1, k}, 2 * hf);
  b.Bias("ftgs.freq.fold.b", {ca});
  for (int64_t i = 0; i < g; ++i) {
    const std::string p = "ftgs.time.g" + std::to_string(i);
    b.Sru(p + ".fwd", unfolded / g, ht / g);
    if (cfg.time_bidirectional) b.Sru(p + ".bwd", unfolded / g, ht / g);
  }
  b.Weight("ftgs.time.fold.w", {time_dirs * ht, ca, k, 1}, time_dirs * ht);
  b.Bias("ftgs.time.fold.b", {ca});
  for (const char* m : {"q", "k", "v", "o"}) {
    b.Weight(std::string("ftgs.attn.") + m + ".w", {ca, ca}, ca);
    b.Bias(std::string("ftgs.attn.") + m + ".b", {ca});
  }
  b.Weight("ftgs.ffn.w1", {cfg.ffn_hidden, ca}, ca);
  b.Bias("ftgs.ffn.b1", {cfg.ffn_hidden});
  b.Const("ftgs.ffn.prelu", {cfg.ffn_hidden}, 0.25);
  b.Weight("ftgs.ffn.w2", {ca, cfg.ffn_hidden}, cfg.ffn_hidden);
  b.Bias("ftgs.ffn.b2", {ca});
  b.Weight("ftgs.gate.w", {ca, ca, 1, 1}, ca);
  b.Bias("ftgs.gate.b", {ca});

  b.Weight("saf.w", {2 * ca, cv, 1}, cv);
  b.Bias("saf.b", {2 * ca});  // gamma half set to 1 in InitParams

  b.Const("mask.prelu", {ca, 1, 1}, 0.25);
  b.Weight("mask.conv.w", {ce, ca, 1, 1}, ca);
  b.Bias("mask.conv.b", {ce});
  b.Weight("mask.real.w", {ce / 2, ce, 1, 1}, ce);
  b.Bias("mask.real.b", {ce / 2});
  b.Weight("mask.imag.w", {ce / 2, ce, 1, 1}, ce);
  b.Bias("mask.imag.b", {ce / 2});

  b.Weight("dec.w", {ce, 2, cfg.dec_kernel_time, cfg.dec_kernel_freq}, ce);
  b.Bias("dec.b", {2});
  return b.Take();
}

const Tensor& ModelParams::at(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  return values_[it->second];
}

void ModelParams::set(const std::string& name, Tensor value) {
  auto it = index_.find(name);
  if (it == index_.end()) throw Error("unknown parameter '" + name + "'");
  if (value.shape() != values_[it->second].shape())
    throw ShapeError("parameter '" + name + "' is " + ShapeString(values_[it->second].shape()) +
                     ", got " + ShapeString(value.shape()));
  values_[it->second] = std::move(value);
}

void ModelParams::add(const std::string& name, Tensor value) {
  if (contains(name)) throw Error("duplicate parameter '" + name + "'");
  index_[name] = names_.size();
  names_.push_back(name);
  values_.push_back(std::move(value));
}

int64_t ModelParams::scalar_count() const { return scalar_count(""); }

int64_t ModelParams::scalar_count(const std::string& prefix) const {
  int64_t n = 0;
  for (size_t i = 0; i < names_.size(); ++i)
    if (names_[i].compare(0, prefix.size(), prefix) == 0) n += values_[i].numel();
  return n;
}

ModelParams ModelParams::Watched(autodiff::Tape& tape) const {
  ModelParams out = *this;
  for (auto& v : out.values_) v = tape.Watch(v);
  return out;
}

ModelParams ModelParams::Clone() const {
  ModelParams out = *this;
  for (auto& v : out.values_) v = v.clone();
  return out;
}

ModelParams InitParams(const SepConfig& cfg, uint64_t seed) {
  std::mt19937_64 rng(seed);
  ModelParams params;
  for (const ParamSpec& spec : ParamLayout(cfg)) {
    Tensor t(spec.shape);
    double* p = t.mutable_ptr();
    switch (spec.init) {
      case InitKind::kZeros:
        break;
      case InitKind::kOnes:
        std::fill(p, p + t.numel(), 1.0);
        break;
      case InitKind::kConstant:
        std::fill(p, p + t.numel(), spec.value);
        break;
      case InitKind::kUniform: {
        std::uniform_real_distribution<double> dist(-spec.value, spec.value);
        for (int64_t i = 0; i < t.numel(); ++i) p[i] = dist(rng);
        break;
      }
    }
    params.add(spec.name, t);
  }
  if (params.contains("saf.b")) {
    Tensor b({2 * cfg.audio_channels});
    std::fill(b.mutable_ptr(), b.mutable_ptr() + cfg.audio_channels, 1.0);
    params.set("saf.b", b);
  }
  // Decoder starts as a pass-through of the first real and imaginary channel.
  Tensor dec(params.at("dec.w").shape());
  const int64_t kt = cfg.dec_kernel_time, kf = cfg.dec_kernel_freq, mid = kf / 2;
  dec.mutable_ptr()[((0 * 2 + 0) * kt + 0) * kf + mid] = 1.0;
  dec.mutable_ptr()[(((cfg.enc_channels / 2) * 2 + 1) * kt + 0) * kf + mid] = 1.0;
  params.set("dec.w", dec);
  return params;
}

sru::SruCell CellFrom(const ModelParams& params, const std::string& prefix) {
  sru::SruCell c;
  c.w = params.at(prefix + ".w");
  c.w_f = params.at(prefix + ".w_f");
  c.w_r = params.at(prefix + ".w_r");
  c.v_f = params.at(prefix + ".v_f");
  c.v_r = params.at(prefix + ".v_r");
  c.b_f = params.at(prefix + ".b_f");
  c.b_r = params.at(prefix + ".b_r");
  c.d_in = c.w.dim(0);
  c.d_hid = c.w.dim(1);
  if (c.has_proj()) c.proj = params.at(prefix + ".proj");
  return c;
}

sru::GroupedSru GroupedFrom(const ModelParams& params, const std::string& prefix, int64_t groups,
                            sru::Direction direction) {
  sru::GroupedSru g;
  g.groups = groups;
  g.direction = direction;
  for (int64_t i = 0; i < groups; ++i) {
    const std::string p = prefix + ".g" + std::to_string(i);
    g.forward.push_back(CellFrom(params, p + ".fwd"));
    if (direction == sru::Direction::kBi) g.backward.push_back(CellFrom(params, p + ".bwd"));
  }
  return g;
}

void SaveWeights(const std::string& path, const ModelParams& params) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write weights to '" + path + "'");
  f.write("SWNW", 4);
  WriteRaw(f, kWeightsVersion);
  for (const std::string& name : params.names()) {
    const Tensor& t = params.at(name);
    if (name.size() > 0xFFFF) throw FormatError("parameter name too long: " + name);
    WriteRaw(f, static_cast<uint16_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    WriteRaw(f, static_cast<uint8_t>(t.rank()));
    for (int64_t d : t.shape()) WriteRaw(f, static_cast<uint32_t>(d));
    f.write(reinterpret_cast<const char*>(t.ptr()),
            static_cast<std::streamsize>(t.numel() * sizeof(double)));
  }
  if (!f) throw FormatError("write failed for '" + path + "'");
}

ModelParams ReadWeightsFile(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open weights '" + path + "'");
  char magic[4];
  f.read(magic, 4);
  if (f.gcount() != 4 || std::memcmp(magic, "SWNW", 4) != 0)
    throw FormatError("'" + path + "' is not a SWNW weight file");
  uint32_t version = 0;
  if (!ReadRaw(f, version)) throw FormatError("truncated SWNW header");
  if (version != kWeightsVersion)
    throw FormatError("unsupported SWNW version " + std::to_string(version));
  ModelParams params;
  while (f.peek() != std::char_traits<char>::eof()) {
    uint16_t len = 0;
    if (!ReadRaw(f, len)) throw FormatError("truncated SWNW record header");
    std::string name(len, '\0');
    f.read(name.data(), len);
    uint8_t rank = 0;
    if (f.gcount() != len || !ReadRaw(f, rank)) throw FormatError("truncated SWNW record name");
    Shape shape(rank);
    for (auto& d : shape) {
      uint32_t v = 0;
      if (!ReadRaw(f, v)) throw FormatError("truncated SWNW dims for '" + name + "'");
      if (v == 0) throw FormatError("zero dimension in '" + name + "'");
      d = v;
    }
    Tensor t(shape);
    const auto bytes = static_cast<std::streamsize>(t.numel() * sizeof(double));
    f.read(reinterpret_cast<char*>(t.mutable_ptr()), bytes);
    if (f.gcount() != bytes)
      throw FormatError("payload length mismatch for '" + name + "': expected " +
                        std::to_string(bytes) + " bytes, got " + std::to_string(f.gcount()));
    if (params.contains(name)) throw FormatError("duplicate record '" + name + "'");
    params.add(name, t);
  }
  return params;
}

ModelParams LoadWeights(const std::string& path, const SepConfig& cfg) {
  ModelParams file = ReadWeightsFile(path);
  ModelParams out;
  for (const ParamSpec& spec : ParamLayout(cfg)) {
    if (!file.contains(spec.name))
      throw FormatError("weights '" + path + "' lack parameter '" + spec.name + "'");
    const Tensor& t = file.at(spec.name);
    if (t.shape() != spec.shape)
      throw FormatError("parameter '" + spec.name + "' has shape " + ShapeString(t.shape()) +
                        ", config expects " + ShapeString(spec.shape));
    out.add(spec.name, t);
  }
  if (out.size() != file.size())
    for (const std::string& n : file.names())
      if (!out.contains(n)) throw FormatError("unexpected parameter '" + n + "' in '" + path + "'");
  return out;
}

}  // namespace swiftnet
