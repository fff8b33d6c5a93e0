// src/dsp/io.cc

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
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "unitdsr/dsp.h"
#include "unitdsr/errors.h"
#include "unitdsr/log.h"

namespace unitdsr {

namespace {

std::vector<unsigned char> ReadAll(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

std::uint32_t GetU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t GetU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

float GetF32(const unsigned char* p) {
  return std::bit_cast<float>(GetU32(p));
}

void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string* out, std::uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>(v >> 8));
}

void PutF32(std::string* out, float v) { PutU32(out, std::bit_cast<std::uint32_t>(v)); }

void WriteAll(const std::string& path, const std::string& bytes) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot write " + path);
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("short write to " + path);
}

}  // namespace

void WriteFeatureFile(const std::string& path, const FrameFeatures& f) {
  std::string bytes = "UDSF";
  PutU32(&bytes, 1);
  PutU32(&bytes, static_cast<std::uint32_t>(f.NumFrames()));
  PutU32(&bytes, static_cast<std::uint32_t>(f.Dim()));
  PutF32(&bytes, static_cast<float>(f.frame_hop_ms));
  for (Eigen::Index t = 0; t < f.frames.rows(); ++t)
    for (Eigen::Index d = 0; d < f.frames.cols(); ++d)
      PutF32(&bytes, static_cast<float>(f.frames(t, d)));
  WriteAll(path, bytes);
}

FrameFeatures ReadFeatureFile(const std::string& path) {
  std::vector<unsigned char> b;
  try {
    b = ReadAll(path);
  } catch (const IoError& e) {
    throw FeatureFileError(e.what());
  }
  if (b.size() < 20 || std::memcmp(b.data(), "UDSF", 4) != 0)
    throw FeatureFileError(path + ": missing UDSF header");
  const std::uint32_t version = GetU32(&b[4]);
  if (version != 1)
    throw FeatureFileError(path + ": unsupported version " +
                           std::to_string(version));
  const std::uint32_t t = GetU32(&b[8]), d = GetU32(&b[12]);
  if (t < 1 || d < 1) throw FeatureFileError(path + ": empty feature matrix");
  const std::size_t expect = 20 + 4ull * t * d;
  if (b.size() != expect) {
    std::ostringstream os;
    os << path << ": expected " << expect << " bytes, found " << b.size();
    throw FeatureFileError(os.str());
  }
  FrameFeatures f;
  f.source = FeatureSource::kExternalSsl;
  f.frame_hop_ms = GetF32(&b[16]);
  f.frame_window_ms = f.frame_hop_ms;
  f.frames.resize(t, d);
  const unsigned char* p = b.data() + 20;
  for (std::uint32_t i = 0; i < t; ++i)
    for (std::uint32_t j = 0; j < d; ++j, p += 4) {
      const double v = GetF32(p);
      if (!std::isfinite(v))
        throw FeatureFileError(path + ": non-finite feature value");
      f.frames(i, j) = v;
    }
  return f;
}

Waveform ReadWav(const std::string& path) {
  const std::vector<unsigned char> b = ReadAll(path);
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 ||
      std::memcmp(b.data() + 8, "WAVE", 4) != 0)
    throw AudioFormatError(path + ": not a RIFF/WAVE file");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  std::size_t pos = 12;
  while (pos + 8 <= b.size()) {
    const unsigned char* chunk = &b[pos];
    const std::uint32_t len = GetU32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + len > b.size() && std::memcmp(chunk, "data", 4) != 0)
      throw AudioFormatError(path + ": truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (len < 16) throw AudioFormatError(path + ": short fmt chunk");
      format = GetU16(&b[body]);
      channels = GetU16(&b[body + 2]);
      rate = GetU32(&b[body + 4]);
      bits = GetU16(&b[body + 14]);
      if (format == 0xFFFE && len >= 26) format = GetU16(&b[body + 24]);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = &b[body];
      data_len = std::min<std::size_t>(len, b.size() - body);
    }
    pos = body + len + (len & 1);
  }
  if (!data || channels == 0) throw AudioFormatError(path + ": no fmt/data");
  if (channels != 1)
    throw AudioFormatError(path + ": only mono audio is supported (got " +
                           std::to_string(channels) + " channels)");

  Waveform w;
  w.sample_rate_hz = static_cast<int>(rate);
  if (format == 1 && bits == 16) {
    w.samples.resize(data_len / 2);
    for (std::size_t i = 0; i < w.samples.size(); ++i)
      w.samples[i] = static_cast<std::int16_t>(GetU16(data + 2 * i)) / 32768.0;
  } else if (format == 3 && bits == 32) {
    w.samples.resize(data_len / 4);
    for (std::size_t i = 0; i < w.samples.size(); ++i)
      w.samples[i] = GetF32(data + 4 * i);
  } else {
    throw AudioFormatError(path + ": unsupported sample format " +
                           std::to_string(format) + "/" +
                           std::to_string(bits) + " bit");
  }
  w.Validate();
  return w;
}

void WriteWav(const std::string& path, const Waveform& w) {
  const auto n = static_cast<std::uint32_t>(w.size());
  std::string bytes = "RIFF";
  PutU32(&bytes, 36 + 2 * n);
  bytes += "WAVEfmt ";
  PutU32(&bytes, 16);
  PutU16(&bytes, 1);
  PutU16(&bytes, 1);
  PutU32(&bytes, static_cast<std::uint32_t>(w.sample_rate_hz));
  PutU32(&bytes, static_cast<std::uint32_t>(w.sample_rate_hz) * 2);
  PutU16(&bytes, 2);
  PutU16(&bytes, 16);
  bytes += "data";
  PutU32(&bytes, 2 * n);
  std::size_t clipped = 0;
  for (double s : w.samples) {
    if (s > 1.0 || s < -1.0) ++clipped;
    const double c = std::clamp(s, -1.0, 1.0);
    const long v = std::lround(c * 32767.0);
    PutU16(&bytes, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
  }
  if (clipped)
    LogWarning(path + ": clipped " + std::to_string(clipped) + " samples");
  WriteAll(path, bytes);
}

}  // namespace unitdsr
