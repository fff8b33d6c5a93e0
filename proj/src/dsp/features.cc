// src/dsp/features.cc

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

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <tuple>

#include "unitdsr/dsp.h"
#include "unitdsr/errors.h"

namespace unitdsr {

std::string ToString(FeatureSource source) {
  return source == FeatureSource::kStandinLogmel ? "logmel" : "external";
}

FeatureSource ParseFeatureSource(std::string_view name) {
  if (name == "logmel" || name == "standin_logmel")
    return FeatureSource::kStandinLogmel;
  if (name == "external" || name == "external_ssl")
    return FeatureSource::kExternalSsl;
  throw DomainError("unknown feature mode '" + std::string(name) + "'");
}

void FeatureConfig::Validate() const {
  if (!(hop_ms > 0.0)) throw DomainError("FeatureConfig: hop_ms must be > 0");
  if (!(window_ms >= hop_ms))
    throw DomainError("FeatureConfig: window_ms must be >= hop_ms");
  if (n_mels < 1) throw DomainError("FeatureConfig: n_mels must be >= 1");
  if (!(log_floor > 0.0))
    throw DomainError("FeatureConfig: log_floor must be > 0");
}

int NumFrames(std::size_t num_samples, int window_samples, int hop_samples) {
  if (num_samples < static_cast<std::size_t>(window_samples)) return 0;
  return static_cast<int>((num_samples - window_samples) / hop_samples) + 1;
}

std::vector<double> HannWindow(int length) {
  std::vector<double> w(length);
  if (length == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < length; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (length - 1));
  return w;
}

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

int NextPow2(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

struct StandinFrontEnd {
  DftBasis basis;
  Matrix mel;  // n_mels x bins, stored transposed for frames * mel^T
};

std::shared_ptr<const StandinFrontEnd> GetFrontEnd(int win, int n_fft,
                                                  int n_mels, int rate) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int, int>,
                  std::shared_ptr<const StandinFrontEnd>>
      cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(win, n_fft, n_mels, rate);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto fe = std::make_shared<StandinFrontEnd>();
  fe->basis = MakeDftBasis(win, n_fft, HannWindow(win));
  fe->mel = MelFilterbank(n_mels, n_fft, rate);
  cache.emplace(key, fe);
  return fe;
}

}  // namespace

Matrix MelFilterbank(int n_mels, int n_fft, int sample_rate, double fmin_hz,
                     double fmax_hz) {
  if (fmax_hz <= 0.0) fmax_hz = sample_rate / 2.0;
  const int bins = n_fft / 2 + 1;
  const double mel_lo = HzToMel(fmin_hz), mel_hi = HzToMel(fmax_hz);
  std::vector<double> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i)
    edges[i] = MelToHz(mel_lo + (mel_hi - mel_lo) * i / (n_mels + 1));

  Matrix fb = Matrix::Zero(n_mels, bins);
  for (int m = 0; m < n_mels; ++m) {
    const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
    for (int k = 0; k < bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      const double up = (f - left) / (center - left);
      const double down = (right - f) / (right - center);
      fb(m, k) = std::max(0.0, std::min(up, down));
    }
  }
  return fb;
}

DftBasis MakeDftBasis(int frame_len, int n_fft,
                      const std::vector<double>& window) {
  const int bins = n_fft / 2 + 1;
  DftBasis b;
  b.cos_part.resize(frame_len, bins);
  b.sin_part.resize(frame_len, bins);
  for (int n = 0; n < frame_len; ++n) {
    const double wn = window.empty() ? 1.0 : window[n];
    for (int k = 0; k < bins; ++k) {
      // Reduce n*k modulo n_fft before scaling to keep the phase exact.
      const long long r = (static_cast<long long>(n) * k) % n_fft;
      const double phase = 2.0 * std::numbers::pi * r / n_fft;
      b.cos_part(n, k) = wn * std::cos(phase);
      b.sin_part(n, k) = -wn * std::sin(phase);
    }
  }
  return b;
}

FrameFeatures ExtractFeatures(const Waveform& w, const FeatureConfig& cfg,
                              std::string_view utterance_id) {
  cfg.Validate();
  if (cfg.mode == FeatureSource::kExternalSsl) {
    if (utterance_id.empty())
      throw FeatureFileError("external features need an utterance id");
    const std::string path =
        (cfg.external_dir.empty() ? std::string(".") : cfg.external_dir) +
        "/" + std::string(utterance_id) + ".feat";
    FrameFeatures f = ReadFeatureFile(path);
    if (std::abs(f.frame_hop_ms - kCanonicalHopMs) > 1e-6) {
      std::ostringstream os;
      os << path << ": hop_ms " << f.frame_hop_ms << " != "
         << kCanonicalHopMs;
      throw FeatureFileError(os.str());
    }
    f.layer_index = cfg.ssl_layer;
    return f;
  }

  if (w.sample_rate_hz != kCanonicalSampleRate) {
    std::ostringstream os;
    os << "ExtractFeatures: expected " << kCanonicalSampleRate
       << " Hz input, got " << w.sample_rate_hz;
    throw DomainError(os.str());
  }
  const int win =
      static_cast<int>(std::lround(cfg.window_ms * w.sample_rate_hz / 1000.0));
  const int hop =
      static_cast<int>(std::lround(cfg.hop_ms * w.sample_rate_hz / 1000.0));
  const int num_frames = NumFrames(w.size(), win, hop);
  if (num_frames < 1) {
    std::ostringstream os;
    os << "ExtractFeatures: " << w.size() << " samples is shorter than the "
       << win << "-sample window";
    throw TooShortError(os.str());
  }
  const int n_fft = NextPow2(win);
  auto fe = GetFrontEnd(win, n_fft, cfg.n_mels, w.sample_rate_hz);

  Matrix frames(num_frames, win);
  for (int t = 0; t < num_frames; ++t)
    for (int n = 0; n < win; ++n)
      frames(t, n) = w.samples[static_cast<std::size_t>(t) * hop + n];
  const Matrix re = frames * fe->basis.cos_part;
  const Matrix im = frames * fe->basis.sin_part;
  const Matrix power = re.cwiseProduct(re) + im.cwiseProduct(im);
  Matrix mel = power * fe->mel.transpose();
  for (Eigen::Index i = 0; i < mel.size(); ++i)
    mel.data()[i] = std::log(std::max(mel.data()[i], cfg.log_floor));

  FrameFeatures out;
  out.frames = std::move(mel);
  out.frame_hop_ms = cfg.hop_ms;
  out.frame_window_ms = cfg.window_ms;
  out.source = FeatureSource::kStandinLogmel;
  return out;
}

}  // namespace unitdsr
