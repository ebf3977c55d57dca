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

#ifndef SPOOFKIT_AUGMENTATION_HPP
#define SPOOFKIT_AUGMENTATION_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace spoofkit {

// Mono PCM at a fixed 16 kHz. Samples nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

// RIFF PCM16 mono read/write.
Waveform ReadWav(const std::string& path);
void WriteWav(const Waveform& wave, const std::string& path);

// Directory of WAV files, or a `id<TAB>path` manifest, indexed at startup.
struct WaveBank {
  std::vector<std::string> ids;
  std::vector<Waveform> waves;

  static WaveBank LoadManifest(const std::string& path);
  static WaveBank LoadDirectory(const std::string& dir);
};

// Additive noise at a target SNR in dB, powers measured as mean square over
// the overlap; the noise is looped or cropped to the signal length. A
// +inf target is the no-op sentinel. If the mixture would clip, it is
// rescaled to peak 1 and the scale is returned through clip_scale.
Waveform MixNoise(const Waveform& wave, const Waveform& noise, double snr_db,
                  double* clip_scale = nullptr);

// Full linear convolution truncated to the input length, then
// peak-normalized to the input's peak.
Waveform ApplyRir(const Waveform& wave, const Waveform& rir);

// Codec simulation: per stage a low-pass at the simulated bandwidth and a
// uniform re-quantization at the simulated bit depth (high quality:
// 7.6 kHz / 12 bit, low quality: 4 kHz / 8 bit).
struct CodecStage {
  double cutoff_hz;
  int bits;
};

struct CodecChain {
  std::string name;
  std::vector<CodecStage> stages;  // 1 or 2
};

// Four single-codec settings plus the four predefined trans-codec chains.
const std::vector<CodecChain>& DefaultCodecChains();

Waveform SimCodec(const Waveform& wave, const CodecChain& chain);

enum class RawBoostVariant { kConvolutive, kImpulsive, kStationary, kSeries12 };

struct RawBoostParams {
  // convolutive: multiband notch coloration
  int max_notches = 5;
  double min_center_hz = 20, max_center_hz = 8000;
  double min_bw_hz = 100, max_bw_hz = 1000;
  double min_notch_gain = 0.2, max_notch_gain = 1.0;
  // impulsive: signal-dependent sparse impulses
  double min_impulse_percent = 0.1, max_impulse_percent = 1.0;
  double min_impulse_gain = 0.5, max_impulse_gain = 2.0;
  // stationary: colored additive noise
  double min_snr_db = 10.0, max_snr_db = 40.0;
};

Waveform RawBoost(const Waveform& wave, RawBoostVariant variant,
                  const RawBoostParams& params, std::mt19937_64& rng);

// The per-sample online policy: stage 1 uniform over {none, noise, rir,
// both}; stage 2 uniform over {none} + the codec chains. A plan fully
// determines the augmentation, so logged plans replay bitwise.
enum class Stage1 { kNone, kNoise, kRir, kNoiseAndRir };

struct AugmentPlan {
  Stage1 stage1 = Stage1::kNone;
  double snr_db = 0.0;
  long noise_id = -1;
  long rir_id = -1;
  long chain_id = -1;      // -1 = no codec stage
  double clip_scale = 1.0; // filled in by ApplyPlan when the guard fires

  std::string ToString() const;
  static AugmentPlan Parse(const std::string& line);
};

AugmentPlan SamplePlan(std::mt19937_64& rng, long num_noises, long num_rirs,
                       long num_chains);

Waveform ApplyPlan(const Waveform& wave, AugmentPlan& plan,
                   const WaveBank& noise_bank, const WaveBank& rir_bank,
                   const std::vector<CodecChain>& chains);

// Random fixed-length crop; shorter inputs wrap-pad.
Waveform Crop(const Waveform& wave, double seconds, std::mt19937_64& rng);

}  // namespace spoofkit

#endif  // SPOOFKIT_AUGMENTATION_HPP
