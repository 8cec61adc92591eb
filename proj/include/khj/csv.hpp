/*
 Copyright 2026 The koopman-hj Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef KHJ_CSV_HPP
#define KHJ_CSV_HPP

#include <cstdio>
#include <string>
#include <vector>

#include "khj/types.hpp"

namespace khj {

/// %.17g, so values round-trip exactly.
std::string fmt17(double v);

class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void header(const std::vector<std::string>& cols);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  CsvWriter& cell(const std::string& s);
  CsvWriter& cells(const Vec& v);
  void end_row();

 private:
  std::FILE* fp_ = nullptr;
  bool first_ = true;
};

/// Numeric rows; a non-numeric first line is treated as a header.
std::vector<Vec> read_csv_rows(const std::string& path);

}  // namespace khj

#endif  // KHJ_CSV_HPP
