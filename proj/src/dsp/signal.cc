// src/dsp/signal.cc

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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "unitdsr/dsp.h"
#include "unitdsr/errors.h"
#include "unitdsr/log.h"

namespace unitdsr {

void Waveform::Validate() const {
  if (sample_rate_hz <= 0)
    throw DomainError("waveform sample rate must be positive");
  for (double s : samples)
    if (!std::isfinite(s)) throw DomainError("waveform has non-finite sample");
}

double MeanSquare(const std::vector<double>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc / static_cast<double>(x.size());
}

double Rms(const std::vector<double>& x) { return std::sqrt(MeanSquare(x)); }

std::size_t ClipToUnitRange(Waveform* w, std::string_view context) {
  std::size_t clipped = 0;
  for (double& s : w->samples) {
    if (s > 1.0) {
      s = 1.0;
      ++clipped;
    } else if (s < -1.0) {
      s = -1.0;
      ++clipped;
    }
  }
  if (clipped > 0) {
    std::ostringstream os;
    os << context << ": hard-clipped " << clipped << " of " << w->size()
       << " samples to [-1, 1]";
    LogWarning(os.str());
  }
  return clipped;
}

namespace {

double BlockMeanSquare(const std::vector<double>& x, std::size_t begin,
                       std::size_t end) {
  double acc = 0.0;
  for (std::size_t i = begin; i < end; ++i) acc += x[i] * x[i];
  return acc / static_cast<double>(end - begin);
}

int MsToSamples(double ms, int rate) {
  return static_cast<int>(std::lround(ms * rate / 1000.0));
}

}  // namespace

Waveform TrimSilence(const Waveform& w, double threshold_db_rel_peak,
                     double window_ms, double hop_ms) {
  if (w.empty()) throw DomainError("TrimSilence: empty waveform");
  const int win = std::max(1, MsToSamples(window_ms, w.sample_rate_hz));
  const int hop = std::max(1, MsToSamples(hop_ms, w.sample_rate_hz));
  const std::size_t n = w.size();

  double peak = 0.0;
  if (n <= static_cast<std::size_t>(win)) {
    peak = BlockMeanSquare(w.samples, 0, n);
  } else {
    for (std::size_t s = 0; s + win <= n; s += hop)
      peak = std::max(peak, BlockMeanSquare(w.samples, s, s + win));
  }
  if (peak <= 0.0) throw AllSilentError("TrimSilence: waveform is all zeros");
  const double threshold = peak * std::pow(10.0, threshold_db_rel_peak / 10.0);

  const std::size_t num_blocks = (n + hop - 1) / hop;
  std::size_t first = num_blocks, last = 0;
  for (std::size_t b = 0; b < num_blocks; ++b) {
    const std::size_t begin = b * hop, end = std::min(n, begin + hop);
    if (BlockMeanSquare(w.samples, begin, end) > threshold) {
      if (first == num_blocks) first = b;
      last = b;
    }
  }
  if (first == num_blocks)
    throw AllSilentError("TrimSilence: no block above threshold");

  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  const std::size_t begin = first * hop;
  const std::size_t end = std::min(n, (last + 1) * hop);
  out.samples.assign(w.samples.begin() + begin, w.samples.begin() + end);
  return out;
}

Waveform SpeedPerturb(const Waveform& w, double ratio) {
  if (!(ratio >= 0.25 && ratio <= 4.0)) {
    std::ostringstream os;
    os << "SpeedPerturb: ratio " << ratio << " outside [0.25, 4]";
    throw DomainError(os.str());
  }
  if (ratio == 1.0) return w;

  const std::size_t n_in = w.size();
  const auto n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) / ratio));
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples.assign(n_out, 0.0);

  // Hann-windowed sinc interpolator; the cutoff drops below the input
  // Nyquist when speeding up so the decimation does not alias.
  constexpr int kZeroCrossings = 16;
  const double cutoff = std::min(1.0, 1.0 / ratio);
  const double half_width = kZeroCrossings / cutoff;
  const double pi = std::numbers::pi;
  // sin and cos of the kernel arguments advance by fixed angles per tap, so
  // they are carried by rotation rather than recomputed.
  const double sinc_step = pi * cutoff;
  const double taper_step = pi / half_width;
  const double rs = std::sin(sinc_step), rc = std::cos(sinc_step);
  const double ts = std::sin(taper_step), tc = std::cos(taper_step);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double t = static_cast<double>(i) * ratio;
    const long lo = std::max(0L, static_cast<long>(std::ceil(t - half_width)));
    const long hi = std::min(static_cast<long>(n_in) - 1,
                             static_cast<long>(std::floor(t + half_width)));
    if (lo > hi) continue;
    const double x0 = t - static_cast<double>(lo);
    double s_sin = std::sin(sinc_step * x0), s_cos = std::cos(sinc_step * x0);
    double t_sin = std::sin(taper_step * x0), t_cos = std::cos(taper_step * x0);
    double acc = 0.0;
    for (long j = lo; j <= hi; ++j) {
      const double x = t - static_cast<double>(j);
      const double arg = sinc_step * x;
      const double sinc = (x == 0.0) ? 1.0 : s_sin / arg;
      const double taper = 0.5 + 0.5 * t_cos;
      acc += w.samples[j] * cutoff * sinc * taper;
      // Angles decrease by one step for the next tap.
      const double ns = s_sin * rc - s_cos * rs;
      s_cos = s_cos * rc + s_sin * rs;
      s_sin = ns;
      const double nt = t_sin * tc - t_cos * ts;
      t_cos = t_cos * tc + t_sin * ts;
      t_sin = nt;
    }
    out.samples[i] = acc;
  }
  ClipToUnitRange(&out, "SpeedPerturb");
  return out;
}

Waveform AddNoiseAtSnr(const Waveform& w, double snr_db, std::uint64_t seed,
                       std::size_t* num_clipped) {
  const double signal_power = MeanSquare(w.samples);
  if (signal_power <= 0.0)
    throw ZeroSignalError("AddNoiseAtSnr: input has zero RMS");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> noise(w.size());
  for (double& v : noise) v = gauss(rng);
  double mean = 0.0;
  for (double v : noise) mean += v;
  mean /= static_cast<double>(noise.size());
  for (double& v : noise) v -= mean;

  // Scale the realisation itself so the requested SNR holds exactly.
  const double target_power = signal_power / std::pow(10.0, snr_db / 10.0);
  const double realised = MeanSquare(noise);
  const double gain = realised > 0.0 ? std::sqrt(target_power / realised) : 0.0;

  Waveform out = w;
  for (std::size_t i = 0; i < out.size(); ++i) out.samples[i] += gain * noise[i];
  const std::size_t clipped = ClipToUnitRange(&out, "AddNoiseAtSnr");
  if (num_clipped) *num_clipped = clipped;
  return out;
}

}  // namespace unitdsr
