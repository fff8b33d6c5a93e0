// src/toy/toy_corpus.cc

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

#include "unitdsr/toy_corpus.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "unitdsr/errors.h"
#include "unitdsr/random.h"

namespace unitdsr {

namespace {

struct Phone {
  bool voiced;
  std::array<double, 3> formants;   // Hz; for noise phones the band centres
  std::array<double, 3> gains;
  double bandwidth;
  double base_ms;
};

// Eight vowels, a nasal and three noise phones.
const std::array<Phone, 12> kPhones = {{
    {true, {280, 2250, 2900}, {1.0, 0.5, 0.3}, 90, 150},
    {true, {450, 2000, 2600}, {1.0, 0.6, 0.3}, 90, 150},
    {true, {730, 1100, 2450}, {1.0, 0.8, 0.3}, 100, 160},
    {true, {500, 850, 2400}, {1.0, 0.7, 0.2}, 90, 150},
    {true, {320, 800, 2250}, {1.0, 0.5, 0.2}, 80, 150},
    {true, {660, 1700, 2400}, {1.0, 0.7, 0.3}, 100, 160},
    {true, {490, 1350, 1700}, {1.0, 0.7, 0.5}, 90, 150},
    {true, {600, 1200, 2500}, {1.0, 0.6, 0.3}, 100, 150},
    {true, {250, 1000, 2200}, {1.0, 0.15, 0.1}, 60, 110},
    {false, {5200, 6200, 7000}, {1.0, 0.8, 0.5}, 700, 120},
    {false, {2600, 3200, 3900}, {1.0, 0.8, 0.4}, 500, 120},
    {false, {900, 1600, 2600}, {0.6, 0.6, 0.4}, 600, 100},
}};

constexpr int kNumVowels = 8;
constexpr double kNeutral[3] = {500, 1500, 2500};

const char* kWords[] = {
    "able",   "baker",  "charlie", "delta",  "echo",    "foxtrot", "golf",
    "hotel",  "india",  "juliet",  "kilo",   "lima",    "mike",    "nova",
    "oscar",  "papa",   "quebec",  "romeo",  "sierra",  "tango",   "union",
    "victor", "whisky", "xray",    "yankee", "zulu",    "amber",   "bravo",
    "cedar",  "dune",   "ember",   "fable",  "garnet",  "harbor",  "island",
    "jasper", "kestrel", "lantern", "meadow", "nectar"};

double Resonance(double f, double centre, double bw) {
  const double x = (f - centre) / bw;
  return 1.0 / (1.0 + x * x);
}

struct Segment {
  int phone;       // -1 for a pause
  std::size_t length;
  std::array<double, 3> formants;
};

}  // namespace

std::vector<ToySpeaker> DefaultToySpeakers() {
  std::vector<ToySpeaker> s;
  s.push_back({"LJ", false, 1.00, 210, 1.00, 0.50});
  s.push_back({"VP1", false, 0.88, 120, 0.95, 0.45});
  s.push_back({"VP2", false, 1.10, 220, 1.05, 0.55});
  s.push_back({"VP3", false, 0.94, 145, 1.10, 0.50});
  s.push_back({"CF02", false, 1.18, 190, 1.00, 0.50});
  s.push_back({"CM01", false, 1.18 * 0.86, 115, 1.05, 0.45});
  s.push_back({"CM04", false, 1.18 * 0.93, 135, 0.95, 0.55});
  ToySpeaker f02{"F02", true, 1.18 * 1.04, 175, 1.35, 0.40};
  f02.centralize = 0.2;
  f02.duration_jitter = 0.15;
  f02.pause_probability = 0.25;
  f02.tremor_depth = 0.2;
  s.push_back(f02);
  return s;
}

std::vector<std::string> ToyVocabulary(int n) {
  const int total = static_cast<int>(std::size(kWords));
  if (n < 1 || n > total)
    throw DomainError("toy vocabulary size must be in [1, " +
                      std::to_string(total) + "]");
  return {kWords, kWords + n};
}

std::vector<int> ToyPronunciation(const std::string& word) {
  Rng rng(Fnv1a(word));
  const int len = 3 + static_cast<int>(UniformIndex(rng, 2));
  std::vector<int> phones;
  // Alternate consonant-like and vowel phones, starting either way.
  bool vowel = UniformIndex(rng, 2) == 0;
  while (static_cast<int>(phones.size()) < len) {
    int p;
    do {
      p = vowel ? static_cast<int>(UniformIndex(rng, kNumVowels))
                : kNumVowels + static_cast<int>(UniformIndex(rng, 4));
    } while (!phones.empty() && phones.back() == p);
    phones.push_back(p);
    vowel = !vowel;
  }
  return phones;
}

Waveform SynthesizeToyWord(const std::string& word, const ToySpeaker& spk,
                           std::uint64_t take_seed) {
  constexpr double kRate = kCanonicalSampleRate;
  constexpr double kPi = std::numbers::pi;
  Rng rng(take_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const double take_f0 = spk.f0_hz * (1.0 + 0.04 * gauss(rng));
  const double take_warp = spk.formant_scale * (1.0 + 0.015 * gauss(rng));

  std::vector<Segment> segs;
  for (int p : ToyPronunciation(word)) {
    const Phone& ph = kPhones[p];
    if (!segs.empty() && UniformDouble(rng) < spk.pause_probability) {
      const double ms = 80 + 120 * UniformDouble(rng);
      segs.push_back({-1, static_cast<std::size_t>(ms * kRate / 1000), {}});
    }
    const double jitter = std::clamp(1.0 + spk.duration_jitter * gauss(rng), 0.5, 1.8);
    const double ms = 1.35 * ph.base_ms * spk.tempo * jitter;
    Segment s{p, static_cast<std::size_t>(ms * kRate / 1000), {}};
    for (int i = 0; i < 3; ++i) {
      double f = ph.formants[i];
      if (ph.voiced) f += spk.centralize * (kNeutral[i] - f);
      s.formants[i] = f * take_warp * (1.0 + 0.01 * gauss(rng));
    }
    segs.push_back(s);
  }

  std::size_t body = 0;
  for (const auto& s : segs) body += s.length;
  const std::size_t lead = static_cast<std::size_t>((0.10 + 0.10 * UniformDouble(rng)) * kRate);
  const std::size_t trail = static_cast<std::size_t>((0.10 + 0.10 * UniformDouble(rng)) * kRate);

  Waveform w;
  w.sample_rate_hz = kCanonicalSampleRate;
  w.samples.assign(lead + body + trail, 0.0);

  // Components: harmonics of f0 for voiced phones, a 50 Hz grid with random
  // phases for noise phones (period = one 20 ms hop, so stationary frames
  // repeat).  Each segment is rendered with raised-cosine
  // ramps so neighbours cross-fade.
  const std::size_t ramp = static_cast<std::size_t>(0.015 * kRate);
  std::size_t pos = lead;
  for (const auto& s : segs) {
    if (s.phone < 0) {
      pos += s.length;
      continue;
    }
    const Phone& ph = kPhones[s.phone];
    const std::size_t begin = pos >= ramp ? pos - ramp : 0;
    const std::size_t end = std::min(w.size(), pos + s.length + ramp);
    std::vector<double> freqs, amps, phases;
    if (ph.voiced) {
      for (int h = 1; h * take_f0 < 7600; ++h) {
        const double f = h * take_f0;
        double a = 0;
        for (int i = 0; i < 3; ++i)
          a += ph.gains[i] * Resonance(f, s.formants[i], ph.bandwidth * take_warp);
        freqs.push_back(f);
        amps.push_back(a / std::sqrt(h));
        phases.push_back(0.0);
      }
    } else {
      for (double f = 50; f < 7900; f += 50) {
        double a = 0;
        for (int i = 0; i < 3; ++i)
          a += ph.gains[i] * Resonance(f, s.formants[i], ph.bandwidth * take_warp);
        freqs.push_back(f);
        amps.push_back(0.35 * a);
        phases.push_back(2 * kPi * UniformDouble(rng));
      }
    }
    // Phasor recurrences instead of per-sample sin() calls.
    using C = std::complex<double>;
    std::vector<C> rot(freqs.size()), state(freqs.size());
    for (std::size_t c = 0; c < freqs.size(); ++c) {
      rot[c] = std::polar(1.0, 2 * kPi * freqs[c] / kRate);
      state[c] = std::polar(1.0, 2 * kPi * freqs[c] * begin / kRate + phases[c]);
    }
    for (std::size_t n = begin; n < end; ++n) {
      double env = 1.0;
      if (n < pos) env = 0.5 - 0.5 * std::cos(kPi * (n - begin) / static_cast<double>(pos - begin));
      else if (n >= pos + s.length)
        env = 0.5 + 0.5 * std::cos(kPi * (n - pos - s.length) / static_cast<double>(end - pos - s.length));
      double v = 0;
      for (std::size_t c = 0; c < freqs.size(); ++c) {
        v += amps[c] * state[c].imag();
        state[c] *= rot[c];
      }
      if (spk.tremor_depth > 0) {
        const double t = static_cast<double>(n) / kRate;
        v *= 1.0 - spk.tremor_depth * (0.5 + 0.5 * std::sin(2 * kPi * 5.0 * t));
      }
      w.samples[n] += env * v;
    }
    pos += s.length;
  }

  double peak = 0;
  for (double x : w.samples) peak = std::max(peak, std::abs(x));
  const double gain = peak > 0 ? spk.level / peak : 0.0;
  for (double& x : w.samples) x = x * gain + 3e-4 * gauss(rng);
  ClipToUnitRange(&w, "toy synthesis");
  return w;
}

std::vector<ToyUtterance> MakeToyCorpus(const ToyCorpusOptions& opts) {
  const auto speakers = opts.speakers.empty() ? DefaultToySpeakers() : opts.speakers;
  const auto words = ToyVocabulary(opts.num_words);
  std::vector<ToyUtterance> out;
  for (const auto& spk : speakers)
    for (const auto& block : opts.blocks)
      for (const auto& word : words) {
        ToyUtterance u;
        u.id = spk.id + "_" + block + "_" + word;
        u.speaker = spk.id;
        u.transcript = word;
        u.block = block;
        u.dysarthric = spk.dysarthric;
        u.audio = SynthesizeToyWord(word, spk, DeriveSeed(opts.seed, "toy:" + u.id, 0));
        out.push_back(std::move(u));
      }
  return out;
}

std::string WriteToyCorpus(const std::vector<ToyUtterance>& corpus,
                           const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(fs::path(dir) / "wav");
  const std::string manifest = (fs::path(dir) / "manifest.tsv").string();
  std::ofstream out(manifest);
  if (!out) throw IoError("cannot write " + manifest);
  for (const auto& u : corpus) {
    const std::string rel = "wav/" + u.id + ".wav";
    WriteWav((fs::path(dir) / rel).string(), u.audio);
    out << u.id << '\t' << rel << '\t' << u.speaker << '\t' << u.transcript
        << '\t' << u.block << '\t' << (u.dysarthric ? "dysarthric" : "healthy")
        << '\n';
  }
  if (!out) throw IoError("write failed: " + manifest);
  return manifest;
}

}  // namespace unitdsr
