// Copyright 2026 The MeritOpt Authors.
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

// Trajectory export. One row per (step, source), sorted by step then source
// index, written as CSV and JSONL carrying the same values.

#ifndef MERITOPT_EXPORT_H_
#define MERITOPT_EXPORT_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "meritopt/trainer.h"
#include "meritopt/types.h"

namespace meritopt {

inline constexpr std::string_view kCsvHeader =
    "step,source_id,weight,train_loss,val_loss,grad_norm,active,mode";

struct ExportRow {
  int step = 0;
  std::string source_id;
  double weight = 0.0;
  double train_loss = 0.0;  // NaN for inactive sources
  double val_loss = 0.0;
  double grad_norm = 0.0;
  bool active = true;
  std::string mode;

  // NaN-aware bitwise equality of every field.
  bool operator==(const ExportRow& other) const;
};

std::vector<ExportRow> export_rows(const TrainResult& result);

// %.17g, with "nan", "inf" and "-inf" for non-finite values.
std::string format_double(double v);

std::string to_csv(const std::vector<ExportRow>& rows);
std::string to_jsonl(const std::vector<ExportRow>& rows);
std::vector<ExportRow> parse_csv(const std::string& text);
std::vector<ExportRow> parse_jsonl(const std::string& text);

// Writes to a sibling temporary file, then renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& data);
std::string read_file(const std::filesystem::path& path);

// One coordinate per line.
std::string format_vector(const Vector& x);

}  // namespace meritopt

#endif  // MERITOPT_EXPORT_H_
