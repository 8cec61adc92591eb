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

#include "khj/csv.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace khj {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::string& path) {
  fp_ = std::fopen(path.c_str(), "w");
  if (!fp_) throw ConfigError("cannot open output file " + path);
}

CsvWriter::~CsvWriter() {
  if (fp_) std::fclose(fp_);
}

void CsvWriter::header(const std::vector<std::string>& cols) {
  for (const auto& c : cols) cell(c);
  end_row();
}

CsvWriter& CsvWriter::cell(double v) { return cell(fmt17(v)); }

CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

CsvWriter& CsvWriter::cell(const std::string& s) {
  if (!first_) std::fputc(',', fp_);
  first_ = false;
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::fputc('"', fp_);
    for (char ch : s) {
      if (ch == '"') std::fputc('"', fp_);
      std::fputc(ch, fp_);
    }
    std::fputc('"', fp_);
  } else {
    std::fputs(s.c_str(), fp_);
  }
  return *this;
}

CsvWriter& CsvWriter::cells(const Vec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) cell(v(i));
  return *this;
}

void CsvWriter::end_row() {
  std::fputc('\n', fp_);
  first_ = true;
}

std::vector<Vec> read_csv_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::vector<Vec> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ss, tok, ',')) {
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end == tok.c_str() || *end != '\0') {
        numeric = false;
        break;
      }
      vals.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError("non-numeric row in " + path + ": " + line);
    }
    first = false;
    rows.push_back(Eigen::Map<Vec>(vals.data(), static_cast<Eigen::Index>(vals.size())));
  }
  return rows;
}

}  // namespace khj
