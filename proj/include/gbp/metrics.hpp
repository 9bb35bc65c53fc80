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

#pragma once

#include <optional>
#include <string>
#include <vector>

namespace gbp {

/// One per-epoch row of training metrics, emitted as CSV by the runners.
struct MetricsRecord {
  int epoch = 0;
  double loss = 0.0;
  double feasibility_defect = 0.0;  // max over constrained parameters
  double lr = 0.0;
  std::optional<double> accuracy;   // present for classification losses

  bool operator==(const MetricsRecord&) const = default;
};

/// Writes "epoch,loss,feasibility_defect,lr[,accuracy]" with reals printed
/// at 17 significant digits; the accuracy column appears when any record
/// carries one. Empty record list produces a header-only file.
void emit_csv(const std::vector<MetricsRecord>& records, const std::string& path);

std::string metrics_to_csv(const std::vector<MetricsRecord>& records);

std::vector<MetricsRecord> parse_metrics_csv(const std::string& path);

}  // namespace gbp
