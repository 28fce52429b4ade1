// src/records.cc


// Copyright 2026  The SAEP Authors
//
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

#include "saep/records.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "saep/error.hpp"

static_assert(std::endian::native == std::endian::little,
              "record files are written with native little-endian floats");

namespace saep {
namespace {

template <typename T>
void Put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& origin)
      : bytes_(bytes), origin_(origin) {}

  template <typename T>
  T Get(const char* what) {
    T value;
    Need(sizeof(T), what);
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  void Copy(void* dst, std::size_t n, const char* what) {
    Need(n, what);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void Need(std::size_t n, const char* what) {
    if (remaining() < n)
      Fail(ErrorCode::kTruncated, origin_ + ": truncated while reading " +
                                      what + " at byte " +
                                      std::to_string(pos_));
  }

  const std::string& bytes_;
  const std::string& origin_;
  std::size_t pos_ = 0;
};

}  // namespace

void RecordFile::Add(std::string name, Tensor tensor) {
  records.push_back({std::move(name), std::move(tensor)});
}

const Record* RecordFile::Find(const std::string& name) const {
  for (const Record& r : records)
    if (r.name == name) return &r;
  return nullptr;
}

const Tensor& RecordFile::Get(const std::string& name) const {
  const Record* r = Find(name);
  if (!r) Fail(ErrorCode::kUnresolvedId, "no record named " + name);
  return r->tensor;
}

std::string RecordFile::Serialize() const {
  std::string out(kMagic, 4);
  Put<std::uint32_t>(out, kVersion);
  Put<std::uint32_t>(out, static_cast<std::uint32_t>(records.size()));
  for (const Record& r : records) {
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(r.name.size()));
    out += r.name;
    Put<std::uint32_t>(out, static_cast<std::uint32_t>(r.tensor.rank()));
    for (std::size_t e : r.tensor.shape()) Put<std::uint64_t>(out, e);
    out.append(reinterpret_cast<const char*>(r.tensor.ptr()),
               r.tensor.size() * sizeof(float));
  }
  return out;
}

RecordFile RecordFile::Parse(const std::string& bytes,
                             const std::string& origin) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    Fail(ErrorCode::kBadMagic, origin + ": missing SAEP magic bytes");
  Reader in(bytes, origin);
  in.Get<std::uint32_t>("magic");
  const auto version = in.Get<std::uint32_t>("version");
  if (version != kVersion)
    Fail(ErrorCode::kBadVersion, origin + ": format version " +
                                     std::to_string(version) + ", expected " +
                                     std::to_string(kVersion));
  const auto count = in.Get<std::uint32_t>("record count");
  RecordFile file;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = in.Get<std::uint32_t>("name length");
    std::string name(name_len, '\0');
    in.Copy(name.data(), name_len, "record name");
    const auto rank = in.Get<std::uint32_t>("rank");
    if (rank > 8)
      Fail(ErrorCode::kDimension, origin + ": record " + name + " has rank " +
                                      std::to_string(rank));
    Shape shape(rank);
    std::size_t n = 1;
    for (auto& e : shape) {
      const auto extent = in.Get<std::uint64_t>("extent");
      if (extent != 0 &&
          n > std::numeric_limits<std::size_t>::max() / sizeof(float) / extent)
        Fail(ErrorCode::kDimension, origin + ": record " + name +
                                        " extents overflow");
      e = static_cast<std::size_t>(extent);
      n *= e;
    }
    if (n * sizeof(float) > in.remaining())
      Fail(ErrorCode::kTruncated, origin + ": record " + name +
                                      " data runs past end of file");
    std::vector<float> data(n);
    in.Copy(data.data(), n * sizeof(float), "record data");
    file.Add(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return file;
}

void RecordFile::Save(const std::filesystem::path& path) const {
  const std::string bytes = Serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) Fail(ErrorCode::kIo, "write failed for " + path.string());
}

RecordFile RecordFile::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kFileNotFound, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  return Parse(bytes, path.string());
}

}  // namespace saep
