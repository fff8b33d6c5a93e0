// src/pipeline/checkpoint.cc

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

#include "unitdsr/checkpoint.h"

#include <zlib.h>

#include <array>
#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include "unitdsr/errors.h"
#include "unitdsr/random.h"

namespace unitdsr {

namespace {

class Writer {
 public:
  template <typename T>
  void Put(T v) {
    const auto bytes = std::bit_cast<std::array<char, sizeof(T)>>(v);
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  }
  void PutString(const std::string& s) {
    Put(static_cast<std::uint32_t>(s.size()));
    buf_.insert(buf_.end(), s.begin(), s.end());
  }
  void PutRaw(const void* p, std::size_t n) {
    const char* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  const std::vector<char>& bytes() const { return buf_; }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  Reader(const char* data, std::size_t size, std::string path)
      : data_(data), size_(size), path_(std::move(path)) {}
  template <typename T>
  T Get() {
    Need(sizeof(T));
    std::array<char, sizeof(T)> b;
    std::memcpy(b.data(), data_ + pos_, sizeof(T));
    pos_ += sizeof(T);
    return std::bit_cast<T>(b);
  }
  std::string GetString() {
    const auto n = Get<std::uint32_t>();
    Need(n);
    std::string s(data_ + pos_, n);
    pos_ += n;
    return s;
  }
  void GetRaw(void* out, std::size_t n) {
    Need(n);
    std::memcpy(out, data_ + pos_, n);
    pos_ += n;
  }
  bool AtEnd() const { return pos_ == size_; }

 private:
  void Need(std::size_t n) const {
    if (size_ - pos_ < n) throw CorruptFileError(path_ + ": truncated payload");
  }
  const char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
  std::string path_;
};

static_assert(std::endian::native == std::endian::little,
              "checkpoint IO assumes a little-endian host");

}  // namespace

const std::string& Checkpoint::Meta(const std::string& key) const {
  auto it = meta.find(key);
  if (it == meta.end()) throw CorruptFileError("checkpoint lacks metadata '" + key + "'");
  return it->second;
}

long long Checkpoint::MetaInt(const std::string& key) const {
  const std::string& v = Meta(key);
  try {
    std::size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::logic_error&) {
    throw CorruptFileError("checkpoint metadata '" + key + "' is not an integer: " + v);
  }
}

const Matrix* Checkpoint::FindTensor(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return &m;
  return nullptr;
}

std::uint64_t Checkpoint::TensorChecksum() const {
  std::uint64_t h = Fnv1a("");
  for (const auto& [name, m] : tensors) {
    h = Fnv1a(name, h);
    h = Fnv1a(std::string_view(reinterpret_cast<const char*>(m.data()),
                               sizeof(double) * m.size()), h);
  }
  return h;
}

void SaveCheckpoint(const Checkpoint& ckpt, const std::string& path) {
  Writer p;
  p.Put(static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    p.PutString(k);
    p.PutString(v);
  }
  p.Put(static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    p.PutString(name);
    p.Put(static_cast<std::uint64_t>(m.rows()));
    p.Put(static_cast<std::uint64_t>(m.cols()));
    p.PutRaw(m.data(), sizeof(double) * m.size());
  }
  const auto& payload = p.bytes();
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
            static_cast<uInt>(payload.size())));

  Writer h;
  h.PutRaw("UDSK", 4);
  h.Put(kCheckpointVersion);
  h.Put(static_cast<std::uint64_t>(payload.size()));
  h.Put(crc);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp);
    out.write(h.bytes().data(), static_cast<std::streamsize>(h.bytes().size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path);
  const std::vector<char> file((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
  Reader head(file.data(), file.size(), path);
  char magic[4];
  try {
    head.GetRaw(magic, 4);
  } catch (const CorruptFileError&) {
    throw CorruptFileError(path + ": too short for a checkpoint header");
  }
  if (std::memcmp(magic, "UDSK", 4) != 0)
    throw CorruptFileError(path + ": not a checkpoint (bad magic)");
  const auto version = head.Get<std::uint32_t>();
  if (version != kCheckpointVersion)
    throw VersionError(path + ": unsupported checkpoint version " + std::to_string(version));
  const auto size = head.Get<std::uint64_t>();
  const auto crc = head.Get<std::uint32_t>();
  constexpr std::size_t kHeader = 4 + 4 + 8 + 4;
  if (file.size() - kHeader != size)
    throw CorruptFileError(path + ": payload size mismatch (truncated?)");
  const char* payload = file.data() + kHeader;
  if (static_cast<std::uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(payload),
                                       static_cast<uInt>(size))) != crc)
    throw CorruptFileError(path + ": checksum mismatch");

  Reader r(payload, size, path);
  Checkpoint ckpt;
  const auto n_meta = r.Get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = r.GetString();
    ckpt.meta[k] = r.GetString();
  }
  const auto n_tensors = r.Get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = r.GetString();
    const auto rows = r.Get<std::uint64_t>();
    const auto cols = r.Get<std::uint64_t>();
    if (rows > (1u << 28) || cols > (1u << 28) || rows * cols > (1ull << 31))
      throw CorruptFileError(path + ": implausible tensor shape for " + name);
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    r.GetRaw(m.data(), sizeof(double) * m.size());
    ckpt.tensors.emplace_back(std::move(name), std::move(m));
  }
  if (!r.AtEnd()) throw CorruptFileError(path + ": trailing bytes in payload");
  return ckpt;
}

}  // namespace unitdsr
