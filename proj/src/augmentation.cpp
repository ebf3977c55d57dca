// Copyright 2026 The spoofkit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spoofkit/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "spoofkit/errors.hpp"

namespace spoofkit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double MeanSquare(const std::vector<double>& x) {
  double acc = 0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : acc / static_cast<double>(x.size());
}

double Peak(const std::vector<double>& x) {
  double peak = 0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

// Linear-phase windowed-sinc low-pass, odd tap count, Hamming window.
std::vector<double> LowPassKernel(double cutoff_hz, int sample_rate,
                                  int taps = 101) {
  const double fc = cutoff_hz / sample_rate;
  const int mid = taps / 2;
  std::vector<double> h(taps);
  double sum = 0;
  for (int i = 0; i < taps; ++i) {
    int k = i - mid;
    double sinc = k == 0 ? 2 * fc
                         : std::sin(2 * std::numbers::pi * fc * k) /
                               (std::numbers::pi * k);
    double window =
        0.54 - 0.46 * std::cos(2 * std::numbers::pi * i / (taps - 1));
    h[i] = sinc * window;
    sum += h[i];
  }
  for (double& v : h) v /= sum;  // unity DC gain
  return h;
}

// Delay-compensated same-length convolution.
std::vector<double> FilterSame(const std::vector<double>& x,
                               const std::vector<double>& h) {
  const long n = static_cast<long>(x.size());
  const long k = static_cast<long>(h.size());
  const long mid = k / 2;
  std::vector<double> y(n, 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0;
    for (long j = 0; j < k; ++j) {
      long src = i + mid - j;
      if (src >= 0 && src < n) acc += h[j] * x[src];
    }
    y[i] = acc;
  }
  return y;
}

std::vector<double> Quantize(const std::vector<double>& x, int bits) {
  const double levels = static_cast<double>((1 << (bits - 1)) - 1);
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double clamped = std::clamp(x[i], -1.0, 1.0);
    y[i] = std::round(clamped * levels) / levels;
  }
  return y;
}

// Notch cascade for RawBoost coloration; returns the impulse response.
std::vector<double> NotchCascade(const RawBoostParams& p, int sample_rate,
                                 std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int notches = std::uniform_int_distribution<int>(1, p.max_notches)(rng);
  std::vector<double> h{1.0};  // identity
  for (int b = 0; b < notches; ++b) {
    double center = p.min_center_hz +
                    unit(rng) * (p.max_center_hz - p.min_center_hz);
    double bw = p.min_bw_hz + unit(rng) * (p.max_bw_hz - p.min_bw_hz);
    double gain =
        p.min_notch_gain + unit(rng) * (p.max_notch_gain - p.min_notch_gain);
    double lo = std::max(10.0, center - bw / 2);
    double hi = std::min(sample_rate / 2.0 - 10.0, center + bw / 2);
    // band-pass = lp(hi) - lp(lo); notch = delta - gain * band-pass
    std::vector<double> lp_hi = LowPassKernel(hi, sample_rate, 65);
    std::vector<double> lp_lo = LowPassKernel(lo, sample_rate, 65);
    std::vector<double> notch(65);
    for (int i = 0; i < 65; ++i) notch[i] = -gain * (lp_hi[i] - lp_lo[i]);
    notch[32] += 1.0;
    // compose: h := h * notch (full convolution)
    std::vector<double> composed(h.size() + notch.size() - 1, 0.0);
    for (std::size_t i = 0; i < h.size(); ++i)
      for (std::size_t j = 0; j < notch.size(); ++j)
        composed[i + j] += h[i] * notch[j];
    h = std::move(composed);
  }
  return h;
}

std::uint32_t ReadU32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return b[0] | (b[1] << 8) | (b[2] << 16) |
         (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint16_t ReadU16(std::istream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

void WriteU32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 4);
}

void WriteU16(std::ostream& out, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff)};
  out.write(reinterpret_cast<char*>(b), 2);
}

}  // namespace

Waveform ReadWav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open WAV file: " + path);
  char tag[4];
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "RIFF", 4) != 0)
    throw DataError(path + ": not a RIFF file");
  ReadU32(in);  // riff size
  in.read(tag, 4);
  if (!in || std::memcmp(tag, "WAVE", 4) != 0)
    throw DataError(path + ": not a WAVE file");

  Waveform wave;
  int channels = 0, bits = 0;
  bool got_fmt = false;
  while (in.read(tag, 4)) {
    std::uint32_t size = ReadU32(in);
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      std::uint16_t format = ReadU16(in);
      channels = ReadU16(in);
      wave.sample_rate = static_cast<int>(ReadU32(in));
      ReadU32(in);  // byte rate
      ReadU16(in);  // block align
      bits = ReadU16(in);
      if (size > 16) in.ignore(size - 16);
      if (format != 1) throw DataError(path + ": only PCM WAV is supported");
      got_fmt = true;
    } else if (std::memcmp(tag, "data", 4) == 0) {
      if (!got_fmt) throw DataError(path + ": data chunk before fmt");
      if (channels != 1) throw DataError(path + ": only mono is supported");
      if (bits != 16) throw DataError(path + ": only 16-bit PCM is supported");
      std::uint32_t count = size / 2;
      wave.samples.resize(count);
      for (std::uint32_t i = 0; i < count; ++i) {
        std::int16_t s = static_cast<std::int16_t>(ReadU16(in));
        wave.samples[i] = static_cast<double>(s) / 32768.0;
      }
      if (!in) throw DataError(path + ": truncated data chunk");
      return wave;
    } else {
      in.ignore(size + (size & 1));
    }
  }
  throw DataError(path + ": no data chunk");
}

void WriteWav(const Waveform& wave, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open file for writing: " + path);
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(wave.samples.size() * 2);
  out.write("RIFF", 4);
  WriteU32(out, 36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  WriteU32(out, 16);
  WriteU16(out, 1);  // PCM
  WriteU16(out, 1);  // mono
  WriteU32(out, static_cast<std::uint32_t>(wave.sample_rate));
  WriteU32(out, static_cast<std::uint32_t>(wave.sample_rate * 2));
  WriteU16(out, 2);
  WriteU16(out, 16);
  out.write("data", 4);
  WriteU32(out, data_size);
  for (double v : wave.samples) {
    double clamped = std::clamp(v, -1.0, 1.0);
    std::int16_t s = static_cast<std::int16_t>(
        std::lround(clamped * 32767.0));
    WriteU16(out, static_cast<std::uint16_t>(s));
  }
}

WaveBank WaveBank::LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open bank manifest: " + path);
  WaveBank bank;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream iss(line);
    std::string id, file;
    if (!(iss >> id >> file))
      throw DataError("bank manifest: expected 'id<TAB>path': " + line);
    bank.ids.push_back(id);
    bank.waves.push_back(ReadWav(file));
  }
  return bank;
}

WaveBank WaveBank::LoadDirectory(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.path().extension() == ".wav")
      paths.push_back(entry.path().string());
  std::sort(paths.begin(), paths.end());
  WaveBank bank;
  for (const std::string& p : paths) {
    bank.ids.push_back(fs::path(p).stem().string());
    bank.waves.push_back(ReadWav(p));
  }
  return bank;
}

Waveform MixNoise(const Waveform& wave, const Waveform& noise, double snr_db,
                  double* clip_scale) {
  if (clip_scale) *clip_scale = 1.0;
  if (snr_db == kInf) return wave;
  if (wave.samples.empty()) throw DataError("empty input waveform");
  if (noise.samples.empty()) throw DataError("empty noise waveform");
  const std::size_t n = wave.samples.size();
  std::vector<double> looped(n);
  for (std::size_t i = 0; i < n; ++i)
    looped[i] = noise.samples[i % noise.samples.size()];
  const double p_wave = MeanSquare(wave.samples);
  const double p_noise = MeanSquare(looped);
  if (p_wave == 0.0)
    throw DataError("silent input: target SNR is undefined");
  if (p_noise == 0.0) throw DataError("silent noise");
  const double gain = std::sqrt(p_wave / (p_noise * std::pow(10.0, snr_db / 10.0)));
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    out.samples[i] = wave.samples[i] + gain * looped[i];
  double peak = Peak(out.samples);
  if (peak > 1.0) {
    double scale = 1.0 / peak;
    for (double& v : out.samples) v *= scale;
    if (clip_scale) *clip_scale = scale;
  }
  return out;
}

Waveform ApplyRir(const Waveform& wave, const Waveform& rir) {
  if (rir.samples.empty()) throw DataError("empty impulse response");
  if (Peak(rir.samples) == 0.0) throw DataError("all-zero impulse response");
  const long n = static_cast<long>(wave.samples.size());
  const long k = static_cast<long>(rir.samples.size());
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.assign(n, 0.0);
  for (long i = 0; i < n; ++i) {
    double acc = 0;
    long jmax = std::min(k - 1, i);
    for (long j = 0; j <= jmax; ++j)
      acc += rir.samples[j] * wave.samples[i - j];
    out.samples[i] = acc;
  }
  double in_peak = Peak(wave.samples);
  double out_peak = Peak(out.samples);
  if (out_peak > 0.0 && in_peak > 0.0) {
    double scale = in_peak / out_peak;
    for (double& v : out.samples) v *= scale;
  }
  return out;
}

const std::vector<CodecChain>& DefaultCodecChains() {
  static const CodecStage kMp3High{7600.0, 12};
  static const CodecStage kMp3Low{4000.0, 8};
  static const CodecStage kOggHigh{7600.0, 12};
  static const CodecStage kOggLow{4000.0, 8};
  static const std::vector<CodecChain> chains = {
      {"mp3-high", {kMp3High}},
      {"mp3-low", {kMp3Low}},
      {"ogg-high", {kOggHigh}},
      {"ogg-low", {kOggLow}},
      {"mp3-high>ogg-high", {kMp3High, kOggHigh}},
      {"mp3-low>ogg-low", {kMp3Low, kOggLow}},
      {"mp3-high>ogg-low", {kMp3High, kOggLow}},
      {"ogg-high>mp3-low", {kOggHigh, kMp3Low}},
  };
  return chains;
}

Waveform SimCodec(const Waveform& wave, const CodecChain& chain) {
  if (chain.stages.empty() || chain.stages.size() > 2)
    throw DataError("codec chain must have 1 or 2 stages");
  Waveform out = wave;
  for (const CodecStage& stage : chain.stages) {
    std::vector<double> h = LowPassKernel(stage.cutoff_hz, out.sample_rate);
    // band-limit, re-quantize, band-limit again so the quantization noise
    // stays inside the simulated bandwidth
    out.samples = FilterSame(out.samples, h);
    out.samples = Quantize(out.samples, stage.bits);
    out.samples = FilterSame(out.samples, h);
  }
  return out;
}

Waveform RawBoost(const Waveform& wave, RawBoostVariant variant,
                  const RawBoostParams& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  switch (variant) {
    case RawBoostVariant::kConvolutive: {
      std::vector<double> h = NotchCascade(params, wave.sample_rate, rng);
      Waveform out;
      out.sample_rate = wave.sample_rate;
      out.samples = FilterSame(wave.samples, h);
      double p_in = MeanSquare(wave.samples);
      double p_out = MeanSquare(out.samples);
      if (p_out > 0 && p_in > 0) {
        double scale = std::sqrt(p_in / p_out);
        for (double& v : out.samples) v *= scale;
      }
      return out;
    }
    case RawBoostVariant::kImpulsive: {
      const long n = static_cast<long>(wave.samples.size());
      double percent = params.min_impulse_percent +
                       unit(rng) * (params.max_impulse_percent -
                                    params.min_impulse_percent);
      long count = std::max<long>(
          1, static_cast<long>(std::llround(n * percent / 100.0)));
      count = std::min(count, n);
      // distinct positions via partial shuffle
      std::vector<long> positions(n);
      std::iota(positions.begin(), positions.end(), 0L);
      for (long i = 0; i < count; ++i) {
        long j = std::uniform_int_distribution<long>(i, n - 1)(rng);
        std::swap(positions[i], positions[j]);
      }
      double sd = std::sqrt(MeanSquare(wave.samples));
      Waveform out = wave;
      for (long i = 0; i < count; ++i) {
        double gain = params.min_impulse_gain +
                      unit(rng) * (params.max_impulse_gain -
                                   params.min_impulse_gain);
        double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
        out.samples[positions[i]] += sign * gain * sd;
      }
      return out;
    }
    case RawBoostVariant::kStationary: {
      double snr = params.min_snr_db +
                   unit(rng) * (params.max_snr_db - params.min_snr_db);
      std::normal_distribution<double> gauss(0.0, 1.0);
      Waveform noise;
      noise.sample_rate = wave.sample_rate;
      noise.samples.resize(wave.samples.size());
      for (double& v : noise.samples) v = gauss(rng);
      std::vector<double> h = NotchCascade(params, wave.sample_rate, rng);
      noise.samples = FilterSame(noise.samples, h);
      return MixNoise(wave, noise, snr);
    }
    case RawBoostVariant::kSeries12: {
      Waveform colored =
          RawBoost(wave, RawBoostVariant::kConvolutive, params, rng);
      return RawBoost(colored, RawBoostVariant::kImpulsive, params, rng);
    }
  }
  throw DataError("unknown RawBoost variant");
}

AugmentPlan SamplePlan(std::mt19937_64& rng, long num_noises, long num_rirs,
                       long num_chains) {
  AugmentPlan plan;
  int branch = std::uniform_int_distribution<int>(0, 3)(rng);
  plan.stage1 = static_cast<Stage1>(branch);
  bool needs_noise =
      plan.stage1 == Stage1::kNoise || plan.stage1 == Stage1::kNoiseAndRir;
  bool needs_rir =
      plan.stage1 == Stage1::kRir || plan.stage1 == Stage1::kNoiseAndRir;
  if (needs_noise) {
    if (num_noises < 1) throw DataError("noise branch selected but noise bank is empty");
    plan.snr_db = std::uniform_real_distribution<double>(0.0, 15.0)(rng);
    plan.noise_id = std::uniform_int_distribution<long>(0, num_noises - 1)(rng);
  }
  if (needs_rir) {
    if (num_rirs < 1) throw DataError("rir branch selected but rir bank is empty");
    plan.rir_id = std::uniform_int_distribution<long>(0, num_rirs - 1)(rng);
  }
  long stage2 = std::uniform_int_distribution<long>(0, num_chains)(rng);
  plan.chain_id = stage2 - 1;  // 0 => none
  return plan;
}

Waveform ApplyPlan(const Waveform& wave, AugmentPlan& plan,
                   const WaveBank& noise_bank, const WaveBank& rir_bank,
                   const std::vector<CodecChain>& chains) {
  Waveform out = wave;
  plan.clip_scale = 1.0;
  if (plan.stage1 == Stage1::kNoise || plan.stage1 == Stage1::kNoiseAndRir) {
    if (plan.noise_id < 0 ||
        plan.noise_id >= static_cast<long>(noise_bank.waves.size()))
      throw DataError("plan references noise id out of range");
    out = MixNoise(out, noise_bank.waves[plan.noise_id], plan.snr_db,
                   &plan.clip_scale);
  }
  if (plan.stage1 == Stage1::kRir || plan.stage1 == Stage1::kNoiseAndRir) {
    if (plan.rir_id < 0 ||
        plan.rir_id >= static_cast<long>(rir_bank.waves.size()))
      throw DataError("plan references rir id out of range");
    out = ApplyRir(out, rir_bank.waves[plan.rir_id]);
  }
  if (plan.chain_id >= 0) {
    if (plan.chain_id >= static_cast<long>(chains.size()))
      throw DataError("plan references codec chain out of range");
    out = SimCodec(out, chains[plan.chain_id]);
  }
  return out;
}

std::string AugmentPlan::ToString() const {
  static const char* kNames[] = {"none", "noise", "rir", "noise+rir"};
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s %.17g %ld %ld %ld %.17g",
                kNames[static_cast<int>(stage1)], snr_db, noise_id, rir_id,
                chain_id, clip_scale);
  return buf;
}

AugmentPlan AugmentPlan::Parse(const std::string& line) {
  std::istringstream iss(line);
  std::string stage1;
  AugmentPlan plan;
  if (!(iss >> stage1 >> plan.snr_db >> plan.noise_id >> plan.rir_id >>
        plan.chain_id >> plan.clip_scale))
    throw DataError("bad augmentation plan line: " + line);
  if (stage1 == "none") {
    plan.stage1 = Stage1::kNone;
  } else if (stage1 == "noise") {
    plan.stage1 = Stage1::kNoise;
  } else if (stage1 == "rir") {
    plan.stage1 = Stage1::kRir;
  } else if (stage1 == "noise+rir") {
    plan.stage1 = Stage1::kNoiseAndRir;
  } else {
    throw DataError("bad stage-1 token in plan: " + stage1);
  }
  return plan;
}

Waveform Crop(const Waveform& wave, double seconds, std::mt19937_64& rng) {
  const long n = static_cast<long>(wave.samples.size());
  const long target = std::lround(seconds * wave.sample_rate);
  if (n == 0) throw DataError("cannot crop an empty waveform");
  long hi = n >= target ? n - target : n - 1;
  long start =
      hi <= 0 ? 0 : std::uniform_int_distribution<long>(0, hi)(rng);
  Waveform out;
  out.sample_rate = wave.sample_rate;
  out.samples.resize(target);
  for (long i = 0; i < target; ++i)
    out.samples[i] = wave.samples[(start + i) % n];
  return out;
}

}  // namespace spoofkit
