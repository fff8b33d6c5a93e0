// include/unitdsr/dsp.h

// Copyright 2026  The unitdsr Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef UNITDSR_DSP_H_
#define UNITDSR_DSP_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "unitdsr/matrix.h"

namespace unitdsr {

inline constexpr int kCanonicalSampleRate = 16000;
inline constexpr double kCanonicalHopMs = 20.0;

/// Mono audio.  Samples are nominally in [-1, 1]; every op in this header
/// that produces a Waveform hard-clips to that range and reports it.
struct Waveform {
  std::vector<double> samples;
  int sample_rate_hz = kCanonicalSampleRate;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate_hz;
  }
  /// Throws DomainError on a non-positive rate or a non-finite sample.
  void Validate() const;
};

double MeanSquare(const std::vector<double>& x);
double Rms(const std::vector<double>& x);

/// Clips every sample to [-1, 1] and returns the number of samples touched.
/// A non-zero count is logged as a warning naming `context`.
std::size_t ClipToUnitRange(Waveform* w, std::string_view context);

/// Removes sub-threshold audio from both ends.  The peak level is the largest
/// mean-square over `window_ms` analysis windows spaced `hop_ms` apart; the
/// kept span runs from the first to the last `hop_ms` block whose level is
/// above peak + `threshold_db_rel_peak`.  Interior samples are untouched.
/// Throws AllSilentError if nothing is above threshold.
Waveform TrimSilence(const Waveform& w, double threshold_db_rel_peak = -40.0,
                     double window_ms = 25.0, double hop_ms = 10.0);

/// Resampling-based speed change: time and pitch scale together and the
/// output has round(N / ratio) samples at the input's sample rate.
/// ratio < 1 slows speech down.  Throws DomainError outside [0.25, 4].
Waveform SpeedPerturb(const Waveform& w, double ratio);

/// Adds white Gaussian noise whose realised mean-square is exactly
/// MeanSquare(w) / 10^(snr_db / 10).  Pure in (w, snr_db, seed).
/// Throws ZeroSignalError for an all-zero input.
Waveform AddNoiseAtSnr(const Waveform& w, double snr_db, std::uint64_t seed,
                       std::size_t* num_clipped = nullptr);

enum class FeatureSource { kStandinLogmel, kExternalSsl };

std::string ToString(FeatureSource source);
FeatureSource ParseFeatureSource(std::string_view name);

struct FeatureConfig {
  FeatureSource mode = FeatureSource::kStandinLogmel;
  int n_mels = 80;
  double window_ms = 25.0;
  double hop_ms = kCanonicalHopMs;
  double log_floor = 1e-10;
  /// external_ssl only: directory holding `<utterance_id>.feat` files and the
  /// backbone layer the features were taken from (metadata).
  std::string external_dir;
  std::optional<int> ssl_layer = 11;

  void Validate() const;
};

struct FrameFeatures {
  Matrix frames;  // T x D
  double frame_hop_ms = kCanonicalHopMs;
  double frame_window_ms = 25.0;
  FeatureSource source = FeatureSource::kStandinLogmel;
  std::optional<int> layer_index;

  int NumFrames() const { return static_cast<int>(frames.rows()); }
  int Dim() const { return static_cast<int>(frames.cols()); }
};

/// Number of frames the stand-in front end emits for `num_samples` samples.
int NumFrames(std::size_t num_samples, int window_samples, int hop_samples);

/// Stand-in mode: Hann-windowed log-mel energies, T = floor((N - win)/hop) + 1.
/// External mode: loads `<cfg.external_dir>/<utterance_id>.feat` verbatim.
/// Throws TooShortError, FeatureFileError, DomainError.
FrameFeatures ExtractFeatures(const Waveform& w, const FeatureConfig& cfg,
                              std::string_view utterance_id = {});

// Spectral helpers shared with the vocoder's reconstruction loss.

/// HTK-style triangular mel filterbank, n_mels x (n_fft / 2 + 1).
Matrix MelFilterbank(int n_mels, int n_fft, int sample_rate,
                     double fmin_hz = 0.0, double fmax_hz = -1.0);

/// Real DFT bases for frames of `frame_len` samples zero-padded to `n_fft`,
/// each frame_len x (n_fft / 2 + 1), with `window` folded in when non-empty.
struct DftBasis {
  Matrix cos_part;
  Matrix sin_part;
};
DftBasis MakeDftBasis(int frame_len, int n_fft,
                      const std::vector<double>& window = {});

std::vector<double> HannWindow(int length);

// External SSL feature files: "UDSF" magic, u32 version = 1, u32 T, u32 D,
// f32 hop_ms, then T*D f32 values, row-major, all little-endian.
void WriteFeatureFile(const std::string& path, const FrameFeatures& f);
FrameFeatures ReadFeatureFile(const std::string& path);

// WAV I/O.  Reads mono 16-bit PCM or 32-bit float; rejects anything else.
Waveform ReadWav(const std::string& path);
void WriteWav(const std::string& path, const Waveform& w);

}  // namespace unitdsr

#endif  // UNITDSR_DSP_H_
