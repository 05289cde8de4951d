// Copyright 2026 The mposterior Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mposterior/csv.hpp"

#include <charconv>
#include <cmath>

#include "mposterior/error.hpp"

namespace mpost {

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out,
                     std::initializer_list<std::string_view> header)
    : out_(out), columns_(header.size()) {
  for (auto h : header) cell(h);
  end_row();
}

void CsvWriter::separator() {
  if (in_row_ >= columns_) throw InvalidArgument("too many CSV cells in row");
  if (in_row_ > 0) out_ << ',';
  ++in_row_;
}

CsvWriter& CsvWriter::cell(double v) {
  separator();
  out_ << format_real(v);
  return *this;
}

CsvWriter& CsvWriter::cell(long long v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::cell(std::string_view text) {
  separator();
  out_ << text;
  return *this;
}

void CsvWriter::end_row() {
  if (in_row_ != columns_) throw InvalidArgument("incomplete CSV row");
  out_ << '\n';
  in_row_ = 0;
}

}  // namespace mpost
