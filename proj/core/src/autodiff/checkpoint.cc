// Copyright 2026 The HRNet Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hrnet/autodiff/checkpoint.h"

#include <bit>
#include <cstdint>
#include <cstring>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "hrnet/status_macros.h"

namespace hrnet::ad {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[] = "HRNCKPT1";
constexpr size_t kMagicSize = 8;

template <typename T>
void Put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

void PutString(std::string& out, const std::string& s) {
  Put<uint32_t>(out, static_cast<uint32_t>(s.size()));
  out.append(s);
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  absl::StatusOr<T> Get() {
    if (pos_ + sizeof(T) > bytes_.size()) return Truncated();
    T value;
    std::memcpy(&value, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  absl::StatusOr<std::string> GetString() {
    ASSIGN_OR_RETURN(const uint32_t len, Get<uint32_t>());
    if (pos_ + len > bytes_.size()) return Truncated();
    std::string s = bytes_.substr(pos_, len);
    pos_ += len;
    return s;
  }

  absl::Status GetDoubles(std::span<double> out) {
    const size_t n = out.size() * sizeof(double);
    if (pos_ + n > bytes_.size()) return Truncated();
    std::memcpy(out.data(), bytes_.data() + pos_, n);
    pos_ += n;
    return absl::OkStatus();
  }

  bool AtEnd() const { return pos_ == bytes_.size(); }

 private:
  static absl::Status Truncated() {
    return absl::DataLossError("checkpoint is truncated");
  }

  const std::string& bytes_;
  size_t pos_ = kMagicSize;
};

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  std::string out(kMagic, kMagicSize);
  PutString(out, checkpoint.kind);
  PutString(out, checkpoint.metadata.Format());
  Put<uint32_t>(out, static_cast<uint32_t>(checkpoint.params.size()));
  for (int i = 0; i < checkpoint.params.size(); ++i) {
    const Tensor& t = checkpoint.params.tensor(i);
    PutString(out, checkpoint.params.name(i));
    Put<uint32_t>(out, static_cast<uint32_t>(t.rank()));
    for (const int dim : t.shape()) Put<int32_t>(out, dim);
    out.append(reinterpret_cast<const char*>(t.data()), t.size() * sizeof(double));
  }
  return out;
}

absl::StatusOr<Checkpoint> DeserializeCheckpoint(const std::string& bytes) {
  if (bytes.size() < kMagicSize || bytes.compare(0, kMagicSize, kMagic) != 0) {
    return absl::DataLossError("not an HRNet checkpoint (bad magic)");
  }
  Reader reader(bytes);
  Checkpoint cp;
  ASSIGN_OR_RETURN(cp.kind, reader.GetString());
  ASSIGN_OR_RETURN(const std::string meta, reader.GetString());
  ASSIGN_OR_RETURN(cp.metadata, KeyValueBlock::Parse(meta));
  ASSIGN_OR_RETURN(const uint32_t count, reader.Get<uint32_t>());
  for (uint32_t i = 0; i < count; ++i) {
    ASSIGN_OR_RETURN(std::string name, reader.GetString());
    ASSIGN_OR_RETURN(const uint32_t rank, reader.Get<uint32_t>());
    if (rank > 4) return absl::DataLossError(absl::StrCat("tensor ", name, " has rank ", rank));
    std::vector<int> shape;
    for (uint32_t a = 0; a < rank; ++a) {
      ASSIGN_OR_RETURN(const int32_t dim, reader.Get<int32_t>());
      if (dim < 0) return absl::DataLossError("negative tensor dimension");
      shape.push_back(dim);
    }
    Tensor t(shape);
    RETURN_IF_ERROR(reader.GetDoubles(t.values()));
    cp.params.Add(std::move(name), std::move(t));
  }
  if (!reader.AtEnd()) return absl::DataLossError("trailing bytes in checkpoint");
  return cp;
}

absl::Status SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path) {
  return WriteFile(path, SerializeCheckpoint(checkpoint));
}

absl::StatusOr<Checkpoint> LoadCheckpoint(const std::string& path) {
  ASSIGN_OR_RETURN(const std::string bytes, ReadFile(path));
  return DeserializeCheckpoint(bytes);
}

}  // namespace hrnet::ad
