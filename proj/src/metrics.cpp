// Copyright 2026 The gbp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gbp/metrics.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gbp/matrix.hpp"

namespace gbp {

namespace {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string metrics_to_csv(const std::vector<MetricsRecord>& records) {
  bool with_accuracy = false;
  for (const MetricsRecord& r : records) with_accuracy = with_accuracy || r.accuracy.has_value();

  std::string out = "epoch,loss,feasibility_defect,lr";
  if (with_accuracy) out += ",accuracy";
  out += "\n";
  for (const MetricsRecord& r : records) {
    out += std::to_string(r.epoch);
    out += ",";
    out += format_real(r.loss);
    out += ",";
    out += format_real(r.feasibility_defect);
    out += ",";
    out += format_real(r.lr);
    if (with_accuracy) {
      out += ",";
      out += format_real(r.accuracy.value_or(0.0));
    }
    out += "\n";
  }
  return out;
}

void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("emit_csv: cannot open '" + path + "' for writing");
  file << metrics_to_csv(records);
  if (!file) throw IoError("emit_csv: write to '" + path + "' failed");
}

std::vector<MetricsRecord> parse_metrics_csv(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("parse_metrics_csv: cannot open '" + path + "'");
  std::string header;
  if (!std::getline(file, header)) {
    throw IoError("parse_metrics_csv: '" + path + "' is empty");
  }
  bool with_accuracy = false;
  if (header == "epoch,loss,feasibility_defect,lr,accuracy") {
    with_accuracy = true;
  } else if (header != "epoch,loss,feasibility_defect,lr") {
    throw IoError("parse_metrics_csv: unexpected header '" + header + "'");
  }

  std::vector<MetricsRecord> records;
  std::string line;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    MetricsRecord r;
    auto next = [&]() {
      if (!std::getline(ss, cell, ',')) {
        throw IoError("parse_metrics_csv: short row '" + line + "'");
      }
      return cell;
    };
    r.epoch = std::stoi(next());
    r.loss = std::stod(next());
    r.feasibility_defect = std::stod(next());
    r.lr = std::stod(next());
    if (with_accuracy) r.accuracy = std::stod(next());
    records.push_back(r);
  }
  return records;
}

}  // namespace gbp
