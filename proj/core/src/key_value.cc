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

#include "hrnet/key_value.h"

#include <array>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>

#include "absl/status/status.h"
#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"

namespace hrnet {

std::string FormatDouble(double value) {
  std::array<char, 64> buf;
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

absl::StatusOr<double> ParseDouble(absl::string_view text) {
  text = absl::StripAsciiWhitespace(text);
  if (text == "inf") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return absl::InvalidArgumentError(absl::StrCat("not a number: '", text, "'"));
  }
  return value;
}

absl::StatusOr<int64_t> ParseInt(absl::string_view text) {
  text = absl::StripAsciiWhitespace(text);
  int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    return absl::InvalidArgumentError(absl::StrCat("not an integer: '", text, "'"));
  }
  return value;
}

void KeyValueBlock::Set(absl::string_view key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::string(key), std::move(value));
}

void KeyValueBlock::SetDouble(absl::string_view key, double value) {
  Set(key, FormatDouble(value));
}

void KeyValueBlock::SetInt(absl::string_view key, int64_t value) {
  Set(key, absl::StrCat(value));
}

bool KeyValueBlock::Has(absl::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

absl::StatusOr<std::string> KeyValueBlock::Get(absl::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return absl::NotFoundError(absl::StrCat("missing key '", key, "'"));
}

absl::StatusOr<double> KeyValueBlock::GetDouble(absl::string_view key) const {
  absl::StatusOr<std::string> v = Get(key);
  if (!v.ok()) return v.status();
  return ParseDouble(*v);
}

absl::StatusOr<int64_t> KeyValueBlock::GetInt(absl::string_view key) const {
  absl::StatusOr<std::string> v = Get(key);
  if (!v.ok()) return v.status();
  return ParseInt(*v);
}

std::string KeyValueBlock::Format() const {
  std::string out;
  for (const auto& [k, v] : entries_) absl::StrAppend(&out, k, "=", v, "\n");
  return out;
}

absl::StatusOr<KeyValueBlock> KeyValueBlock::Parse(absl::string_view text) {
  KeyValueBlock block;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos || eq == 0) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed key=value line: '", line, "'"));
    }
    block.Set(absl::StripAsciiWhitespace(line.substr(0, eq)),
              std::string(absl::StripAsciiWhitespace(line.substr(eq + 1))));
  }
  return block;
}

absl::StatusOr<std::string> ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

absl::Status WriteFile(const std::string& path, absl::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return absl::PermissionDeniedError(absl::StrCat("cannot write ", path));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) return absl::DataLossError(absl::StrCat("short write to ", path));
  return absl::OkStatus();
}

}  // namespace hrnet
