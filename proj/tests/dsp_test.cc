// tests/dsp_test.cc

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

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "test_util.h"
#include "unitdsr/dsp.h"
#include "unitdsr/errors.h"
#include "unitdsr/random.h"

using namespace unitdsr;

namespace {

constexpr double kPi = std::numbers::pi;

Waveform Sine(double seconds, double hz, double amp = 1.0, int rate = 16000) {
  Waveform w;
  w.sample_rate_hz = rate;
  w.samples.resize(static_cast<std::size_t>(std::lround(seconds * rate)));
  for (std::size_t i = 0; i < w.size(); ++i)
    w.samples[i] = amp * std::sin(2 * kPi * hz * i / rate);
  return w;
}

Waveform Pad(const Waveform& w, std::size_t lead, std::size_t trail,
             double noise_amp = 0.0, std::uint64_t seed = 1) {
  Waveform out;
  out.sample_rate_hz = w.sample_rate_hz;
  out.samples.assign(lead, 0.0);
  out.samples.insert(out.samples.end(), w.samples.begin(), w.samples.end());
  out.samples.insert(out.samples.end(), trail, 0.0);
  if (noise_amp > 0.0) {
    Rng rng(seed);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (i < lead || i >= lead + w.size())
        out.samples[i] = noise_amp * (2 * UniformDouble(rng) - 1);
  }
  return out;
}

// Independent boundary scan: peak over every 25 ms window, then the first
// and last 10 ms block above peak - 40 dB, computed in plain loops.
std::pair<std::size_t, std::size_t> OracleTrimBounds(const std::vector<double>& x,
                                                     int win, int hop,
                                                     double db) {
  auto ms = [&](std::size_t b, std::size_t e) {
    double a = 0;
    for (std::size_t i = b; i < e; ++i) a += x[i] * x[i];
    return a / (e - b);
  };
  double peak = 0;
  for (std::size_t s = 0; s + win <= x.size(); s += hop) peak = std::max(peak, ms(s, s + win));
  const double thr = peak * std::pow(10.0, db / 10);
  std::size_t first = SIZE_MAX, last = 0;
  for (std::size_t s = 0; s < x.size(); s += hop) {
    if (ms(s, std::min(x.size(), s + hop)) > thr) {
      if (first == SIZE_MAX) first = s;
      last = std::min(x.size(), s + hop);
    }
  }
  return {first, last};
}

// Naive DFT magnitude peak, in Hz.
double PeakFrequency(const Waveform& w, std::size_t n) {
  double best = -1, best_hz = 0;
  for (std::size_t k = 1; k < n / 2; ++k) {
    double re = 0, im = 0;
    for (std::size_t i = 0; i < n; ++i) {
      re += w.samples[i] * std::cos(2 * kPi * k * i / n);
      im -= w.samples[i] * std::sin(2 * kPi * k * i / n);
    }
    const double mag = re * re + im * im;
    if (mag > best) {
      best = mag;
      best_hz = static_cast<double>(k) * w.sample_rate_hz / n;
    }
  }
  return best_hz;
}

double MeasuredSnrDb(const Waveform& clean, const Waveform& noisy) {
  double s = 0, e = 0;
  for (std::size_t i = 0; i < clean.size(); ++i) {
    s += clean.samples[i] * clean.samples[i];
    const double d = noisy.samples[i] - clean.samples[i];
    e += d * d;
  }
  return 10 * std::log10(s / e);
}

}  // namespace

TEST(TrimSilence, ZeroPaddedSineKeepsSineSpan) {
  Waveform sine = Sine(1.0, 440.0);
  for (std::size_t i = 0; i < sine.size(); ++i)
    sine.samples[i] = std::sin(2 * kPi * 440.0 * i / 16000 + kPi / 4);
  const Waveform w = Pad(sine, 8000, 4800);
  const Waveform t = TrimSilence(w);
  std::size_t lead = 0, trail = 0;
  while (lead < t.size() && t.samples[lead] == 0.0) ++lead;
  while (trail < t.size() && t.samples[t.size() - 1 - trail] == 0.0) ++trail;
  const std::size_t hop = 160;
  EXPECT_LE(lead, hop);
  EXPECT_LE(trail, hop);
  EXPECT_EQ(t.size() - lead - trail, sine.size());
  EXPECT_EQ(t.samples[lead], sine.samples[0]);
}

TEST(TrimSilence, UnpaddedSineIsUnchanged) {
  const Waveform sine = Sine(1.0, 440.0);
  const Waveform t = TrimSilence(sine);
  EXPECT_EQ(t.samples, sine.samples);
}

TEST(TrimSilence, BoundaryNoiseMatchesFrameScanOracle) {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    // Speech-like: AM-modulated harmonic burst.
    Waveform core;
    const std::size_t n = 6000 + UniformIndex(rng, 10000);
    core.samples.resize(n);
    const double f0 = 100 + 150 * UniformDouble(rng);
    for (std::size_t i = 0; i < n; ++i) {
      const double env = std::sin(kPi * i / n);
      double v = 0;
      for (int h = 1; h <= 5; ++h) v += std::sin(2 * kPi * h * f0 * i / 16000) / h;
      core.samples[i] = 0.4 * env * v;
    }
    const std::size_t lead = UniformIndex(rng, 5000), trail = UniformIndex(rng, 5000);
    const Waveform w = Pad(core, lead, trail, 1e-3 * 0.4, 100 + trial);  // ~-60 dB
    const Waveform t = TrimSilence(w);
    const auto [b, e] = OracleTrimBounds(w.samples, 400, 160, -40.0);
    ASSERT_EQ(t.size(), e - b) << "trial " << trial;
    for (std::size_t i = 0; i < t.size(); ++i) ASSERT_EQ(t.samples[i], w.samples[b + i]);
  }
}

TEST(TrimSilence, IdempotentOnRandomPaddedSignals) {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    Waveform core = Sine(0.05 + 0.5 * UniformDouble(rng), 80 + 2000 * UniformDouble(rng),
                         0.05 + 0.9 * UniformDouble(rng));
    for (double& s : core.samples) s *= 0.5 + 0.5 * UniformDouble(rng);
    const Waveform w = Pad(core, UniformIndex(rng, 3000), UniformIndex(rng, 3000),
                           UniformDouble(rng) < 0.5 ? 1e-4 : 0.0, trial);
    const Waveform once = TrimSilence(w);
    const Waveform twice = TrimSilence(once);
    ASSERT_EQ(once.samples, twice.samples) << "trial " << trial;
  }
}

TEST(TrimSilence, AllSilentThrows) {
  Waveform w;
  w.samples.assign(4000, 0.0);
  EXPECT_THROW(TrimSilence(w), AllSilentError);
  EXPECT_THROW(TrimSilence(Waveform{}), DomainError);
}

TEST(SpeedPerturb, IdentityAndLengthArithmetic) {
  const Waveform w = Sine(1.0, 300.0, 0.5);
  EXPECT_EQ(SpeedPerturb(w, 1.0).samples, w.samples);
  const Waveform slow = SpeedPerturb(w, 0.5);
  EXPECT_LE(std::abs(static_cast<long>(slow.size()) - 32000), 2);
  EXPECT_EQ(slow.sample_rate_hz, 16000);
}

TEST(SpeedPerturb, ToneFrequencyScalesWithRatio) {
  const Waveform w = Sine(1.0, 400.0, 0.5);
  const Waveform fast = SpeedPerturb(w, 1.25);
  // 4096-point naive DFT: bin width 3.9 Hz.
  const double peak_in = PeakFrequency(w, 4096);
  const double peak_out = PeakFrequency(fast, 4096);
  EXPECT_NEAR(peak_in, 400.0, 4.0);
  EXPECT_NEAR(peak_out, 500.0, 4.0);
}

TEST(SpeedPerturb, LengthLawOverRandomPairs) {
  Rng rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    Waveform w;
    w.samples.resize(1 + UniformIndex(rng, 4000));
    for (double& s : w.samples) s = 0.3 * (2 * UniformDouble(rng) - 1);
    const double ratio = 0.25 + 3.75 * UniformDouble(rng);
    const Waveform out = SpeedPerturb(w, ratio);
    const long expect = std::lround(static_cast<double>(w.size()) / ratio);
    ASSERT_LE(std::abs(static_cast<long>(out.size()) - expect), 2) << ratio;
  }
}

TEST(SpeedPerturb, RejectsOutOfDomainRatio) {
  const Waveform w = Sine(0.1, 300.0);
  EXPECT_THROW(SpeedPerturb(w, 0.2), DomainError);
  EXPECT_THROW(SpeedPerturb(w, 4.5), DomainError);
}

TEST(AddNoise, HugeSnrLeavesSignalIntact) {
  const Waveform w = Sine(1.0, 200.0, 0.5);
  const Waveform out = AddNoiseAtSnr(w, 200.0, 1);
  std::vector<double> diff(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) diff[i] = out.samples[i] - w.samples[i];
  EXPECT_LT(Rms(diff), 1e-6 * Rms(w.samples));
}

TEST(AddNoise, SeededDeterminism) {
  const Waveform w = Sine(0.5, 200.0, 0.3);
  EXPECT_EQ(AddNoiseAtSnr(w, 10.0, 42).samples, AddNoiseAtSnr(w, 10.0, 42).samples);
  EXPECT_NE(AddNoiseAtSnr(w, 10.0, 42).samples, AddNoiseAtSnr(w, 10.0, 43).samples);
}

TEST(AddNoise, ZeroDbOnTenSeconds) {
  const Waveform w = Sine(10.0, 220.0, 0.2);
  EXPECT_NEAR(MeasuredSnrDb(w, AddNoiseAtSnr(w, 0.0, 5)), 0.0, 0.1);
}

TEST(AddNoise, PowerLawAcrossSnrs) {
  const Waveform w = Sine(5.0, 330.0, 0.15);
  for (double snr : {0.0, 5.0, 10.0, 15.0, 20.0, 30.0})
    EXPECT_NEAR(MeasuredSnrDb(w, AddNoiseAtSnr(w, snr, 9)), snr, 0.1) << snr;
}

TEST(AddNoise, ClippingIsCounted) {
  const Waveform w = Sine(1.0, 220.0, 0.99);
  std::size_t clipped = 0;
  const Waveform out = AddNoiseAtSnr(w, 0.0, 1, &clipped);
  EXPECT_GT(clipped, 0u);
  for (double s : out.samples) ASSERT_LE(std::abs(s), 1.0);
}

TEST(AddNoise, ZeroSignalThrows) {
  Waveform w;
  w.samples.assign(100, 0.0);
  EXPECT_THROW(AddNoiseAtSnr(w, 10.0, 1), ZeroSignalError);
}

TEST(ExtractFeatures, FrameCountForOneSecond) {
  const FrameFeatures f = ExtractFeatures(Sine(1.0, 300.0), FeatureConfig{});
  EXPECT_EQ(f.NumFrames(), 49);
  EXPECT_EQ(f.Dim(), 80);
}

TEST(ExtractFeatures, SilenceHitsTheLogFloor) {
  Waveform w;
  w.samples.assign(8000, 0.0);
  FeatureConfig cfg;
  const FrameFeatures f = ExtractFeatures(w, cfg);
  for (Eigen::Index i = 0; i < f.frames.size(); ++i)
    ASSERT_EQ(f.frames.data()[i], std::log(cfg.log_floor));
}

TEST(ExtractFeatures, MatchesDirectFilterbankOracle) {
  FeatureConfig cfg;
  const Waveform tone = Sine(0.5, 250.0, 0.5);
  Waveform noise;
  noise.samples.resize(8000);
  Rng rng(5);
  for (double& s : noise.samples) s = 0.5 * (2 * UniformDouble(rng) - 1);

  for (const Waveform* w : std::initializer_list<const Waveform*>{&tone, &noise}) {
    const FrameFeatures f = ExtractFeatures(*w, cfg);
    const Matrix oracle = testing_util::OracleLogMel(*w, 400, 320, 512, 80, cfg.log_floor);
    ASSERT_EQ(oracle.rows(), f.NumFrames());
    for (Eigen::Index i = 0; i < oracle.size(); ++i)
      ASSERT_NEAR(f.frames.data()[i], oracle.data()[i], 1e-6);
  }

  // Share of energy in the lowest 20 bands: the tone concentrates there.
  auto low_share = [](const FrameFeatures& f) {
    const Matrix e = f.frames.array().exp().matrix();
    return e.leftCols(20).sum() / e.sum();
  };
  const double tone_low = low_share(ExtractFeatures(tone, cfg));
  const double noise_low = low_share(ExtractFeatures(noise, cfg));
  EXPECT_GT(tone_low, 0.9);
  EXPECT_LT(noise_low, 0.3);
}

TEST(ExtractFeatures, FrameCountLawOnRandomLengths) {
  Rng rng(17);
  FeatureConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    Waveform w;
    w.samples.resize(400 + UniformIndex(rng, 20000));
    for (double& s : w.samples) s = 0.5 * (2 * UniformDouble(rng) - 1);
    const FrameFeatures f = ExtractFeatures(w, cfg);
    ASSERT_EQ(f.NumFrames(), static_cast<int>((w.size() - 400) / 320) + 1);
    ASSERT_TRUE(f.frames.allFinite());
  }
}

TEST(ExtractFeatures, TooShortAndWrongRate) {
  Waveform w;
  w.samples.assign(399, 0.1);
  EXPECT_THROW(ExtractFeatures(w, FeatureConfig{}), TooShortError);
  Waveform w8 = Sine(1.0, 100.0, 0.5, 8000);
  EXPECT_THROW(ExtractFeatures(w8, FeatureConfig{}), DomainError);
  FeatureConfig bad;
  bad.window_ms = 10;
  EXPECT_THROW(ExtractFeatures(Sine(1.0, 100.0), bad), DomainError);
}

TEST(FeatureFile, RoundTripAndValidation) {
  const auto dir = testing_util::TempDir("featfile");
  FrameFeatures f;
  f.frames = Matrix::Random(7, 3);
  f.frame_hop_ms = 20.0;
  WriteFeatureFile((dir / "utt1.feat").string(), f);

  FeatureConfig cfg;
  cfg.mode = FeatureSource::kExternalSsl;
  cfg.external_dir = dir.string();
  const FrameFeatures g = ExtractFeatures(Waveform{}, cfg, "utt1");
  ASSERT_EQ(g.NumFrames(), 7);
  ASSERT_EQ(g.Dim(), 3);
  EXPECT_EQ(g.source, FeatureSource::kExternalSsl);
  EXPECT_EQ(g.layer_index, 11);
  for (Eigen::Index i = 0; i < f.frames.size(); ++i)
    EXPECT_EQ(g.frames.data()[i], static_cast<double>(static_cast<float>(f.frames.data()[i])));

  EXPECT_THROW(ExtractFeatures(Waveform{}, cfg, "missing"), FeatureFileError);

  f.frame_hop_ms = 10.0;
  WriteFeatureFile((dir / "utt2.feat").string(), f);
  EXPECT_THROW(ExtractFeatures(Waveform{}, cfg, "utt2"), FeatureFileError);

  std::ofstream((dir / "utt3.feat").string(), std::ios::binary) << "UDSF\x01";
  EXPECT_THROW(ExtractFeatures(Waveform{}, cfg, "utt3"), FeatureFileError);
}

TEST(Wav, RoundTripAndStereoRejection) {
  const auto dir = testing_util::TempDir("wav");
  const Waveform w = Sine(0.1, 440.0, 0.5);
  const std::string path = (dir / "a.wav").string();
  WriteWav(path, w);
  const Waveform r = ReadWav(path);
  ASSERT_EQ(r.size(), w.size());
  EXPECT_EQ(r.sample_rate_hz, 16000);
  for (std::size_t i = 0; i < w.size(); ++i) ASSERT_NEAR(r.samples[i], w.samples[i], 1.0 / 32767);

  // Patch the channel count to 2.
  std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
  f.seekp(22);
  const char two[2] = {2, 0};
  f.write(two, 2);
  f.close();
  EXPECT_THROW(ReadWav(path), AudioFormatError);
}
