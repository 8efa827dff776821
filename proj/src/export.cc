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

#include "meritopt/export.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace meritopt {
namespace {

bool same_double(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return std::isnan(a) && std::isnan(b);
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::nan("");
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  std::size_t used = 0;
  const double v = std::stod(s, &used);
  if (used != s.size()) throw std::runtime_error("bad number '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

nlohmann::json json_number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

bool ExportRow::operator==(const ExportRow& o) const {
  return step == o.step && source_id == o.source_id &&
         same_double(weight, o.weight) && same_double(train_loss, o.train_loss) &&
         same_double(val_loss, o.val_loss) && same_double(grad_norm, o.grad_norm) &&
         active == o.active && mode == o.mode;
}

std::vector<ExportRow> export_rows(const TrainResult& result) {
  std::vector<ExportRow> rows;
  rows.reserve(result.records.size() * result.source_ids.size());
  for (const auto& rec : result.records) {
    for (std::size_t i = 0; i < result.source_ids.size(); ++i) {
      ExportRow row;
      row.step = rec.step;
      row.source_id = result.source_ids[i];
      row.weight = rec.weights[static_cast<Eigen::Index>(i)];
      row.train_loss = rec.train_loss[static_cast<Eigen::Index>(i)];
      row.val_loss = rec.val_loss;
      row.grad_norm = rec.grad_norm;
      row.active = rec.active[i];
      row.mode = rec.mode;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string to_csv(const std::vector<ExportRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += std::to_string(r.step);
    out += ',';
    out += r.source_id;
    out += ',';
    out += format_double(r.weight);
    out += ',';
    out += format_double(r.train_loss);
    out += ',';
    out += format_double(r.val_loss);
    out += ',';
    out += format_double(r.grad_norm);
    out += r.active ? ",1," : ",0,";
    out += r.mode;
    out += '\n';
  }
  return out;
}

std::string to_jsonl(const std::vector<ExportRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    nlohmann::ordered_json j;
    j["step"] = r.step;
    j["source_id"] = r.source_id;
    j["weight"] = json_number(r.weight);
    j["train_loss"] = json_number(r.train_loss);
    j["val_loss"] = json_number(r.val_loss);
    j["grad_norm"] = json_number(r.grad_norm);
    j["active"] = r.active;
    j["mode"] = r.mode;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<ExportRow> parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw std::runtime_error("trajectory CSV: unexpected header");
  }
  std::vector<ExportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw std::runtime_error("trajectory CSV: bad row: " + line);
    ExportRow r;
    r.step = std::stoi(f[0]);
    r.source_id = f[1];
    r.weight = parse_double(f[2]);
    r.train_loss = parse_double(f[3]);
    r.val_loss = parse_double(f[4]);
    r.grad_norm = parse_double(f[5]);
    r.active = f[6] == "1";
    r.mode = f[7];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<ExportRow> parse_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<ExportRow> rows;
  auto num = [](const nlohmann::json& v) {
    return v.is_null() ? std::nan("") : v.get<double>();
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    ExportRow r;
    r.step = j.at("step").get<int>();
    r.source_id = j.at("source_id").get<std::string>();
    r.weight = num(j.at("weight"));
    r.train_loss = num(j.at("train_loss"));
    r.val_loss = num(j.at("val_loss"));
    r.grad_norm = num(j.at("grad_norm"));
    r.active = j.at("active").get<bool>();
    r.mode = j.at("mode").get<std::string>();
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& data) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + tmp.string());
    f << data;
    f.flush();
    if (!f) throw std::runtime_error("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::string format_vector(const Vector& x) {
  std::string out;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out += format_double(x[i]);
    out += '\n';
  }
  return out;
}

}  // namespace meritopt
