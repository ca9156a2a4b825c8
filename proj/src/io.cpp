/*
 * Copyright 2026 The windowshap Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include "windowshap/io.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace windowshap::io {

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double(std::string_view s, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "line " + std::to_string(line) +
                                       ": not a number: '" + std::string(s) +
                                       "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  for (;;) {
    const auto comma = line.find(',', begin);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(begin));
      return out;
    }
    out.push_back(line.substr(begin, comma - begin));
    begin = comma + 1;
  }
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return std::string(s);
}

template <typename F>
auto parse_guard(const std::string& what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, what + ": " + e.what());
  } catch (const Error& e) {
    // Validation failures inside a file are reported as parse errors.
    if (error_category(e.code()) == ErrorCategory::kIo) throw;
    throw Error(ErrorCode::kParse, what + ": " + e.what());
  }
}

Matrix matrix_from_json(const nlohmann::json& rows) {
  if (!rows.is_array()) {
    throw Error(ErrorCode::kParse, "expected an array of rows");
  }
  std::vector<std::vector<double>> data;
  data.reserve(rows.size());
  for (const auto& row : rows) {
    std::vector<double> r;
    r.reserve(row.size());
    for (const auto& v : row) r.push_back(v.get<double>());
    data.push_back(std::move(r));
  }
  return Matrix::from_rows(data);
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo,
                "cannot open '" + path + "': " + std::strerror(errno));
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIo, "error reading '" + path + "'");
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw Error(ErrorCode::kIo,
                "cannot write '" + path + "': " + std::strerror(errno));
  }
  out << content;
  out.flush();
  if (!out) throw Error(ErrorCode::kIo, "error writing '" + path + "'");
}

nlohmann::json read_json(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kParse, "'" + path + "': " + e.what());
  }
}

void write_json(const std::string& path, const nlohmann::json& value) {
  write_text(path, value.dump(2) + "\n");
}

TimeSeriesInstance parse_instance_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> names;
  std::vector<std::vector<double>> by_step;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split(line);
    if (names.empty()) {
      for (auto f : fields) names.push_back(trim(f));
      continue;
    }
    if (fields.size() != names.size()) {
      throw Error(ErrorCode::kParse,
                  "line " + std::to_string(line_no) + " has " +
                      std::to_string(fields.size()) + " fields, expected " +
                      std::to_string(names.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_double(f, line_no));
    by_step.push_back(std::move(row));
  }
  if (names.empty()) throw Error(ErrorCode::kParse, "empty CSV");
  if (by_step.empty()) throw Error(ErrorCode::kParse, "CSV has no data rows");
  const std::size_t D = names.size();
  const std::size_t L = by_step.size();
  Matrix values(D, L);
  for (std::size_t t = 0; t < L; ++t)
    for (std::size_t i = 0; i < D; ++i) values(i, t) = by_step[t][i];
  return parse_guard("instance CSV", [&] {
    return TimeSeriesInstance::create(std::move(values), std::move(names));
  });
}

std::string format_instance_csv(const TimeSeriesInstance& instance) {
  const auto& names = instance.variable_names();
  const Matrix& v = instance.values();
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out.push_back(',');
    out += names[i];
  }
  out.push_back('\n');
  for (std::size_t t = 0; t < v.cols(); ++t) {
    for (std::size_t i = 0; i < v.rows(); ++i) {
      if (i) out.push_back(',');
      out += format_double(v(i, t));
    }
    out.push_back('\n');
  }
  return out;
}

TimeSeriesInstance read_instance_csv(const std::string& path) {
  const std::string text = read_text(path);
  try {
    return parse_instance_csv(text);
  } catch (const Error& e) {
    throw Error(e.code(), "'" + path + "': " + e.what());
  }
}

Dataset dataset_from_json(const nlohmann::json& doc) {
  return parse_guard("dataset", [&] {
    Dataset ds;
    if (!doc.is_object()) throw Error(ErrorCode::kParse, "expected an object");
    ds.variables = doc.at("variables").get<std::vector<std::string>>();
    for (const auto& inst : doc.at("instances")) {
      ds.instances.push_back(
          TimeSeriesInstance::create(matrix_from_json(inst), ds.variables));
      if (ds.instances.back().shape() != ds.instances.front().shape()) {
        throw Error(ErrorCode::kParse, "instances differ in shape");
      }
    }
    if (ds.instances.empty()) {
      throw Error(ErrorCode::kParse, "dataset has no instances");
    }
    if (doc.contains("labels")) {
      ds.labels = doc.at("labels").get<std::vector<int>>();
      if (ds.labels->size() != ds.instances.size()) {
        throw Error(ErrorCode::kParse, "labels count differs from instances");
      }
    }
    if (doc.contains("segments")) {
      std::vector<std::optional<Segment>> segs;
      for (const auto& s : doc.at("segments")) {
        if (s.is_null()) {
          segs.emplace_back();
        } else {
          segs.push_back(Segment{s.at("start").get<std::size_t>(),
                                 s.at("end").get<std::size_t>()});
        }
      }
      ds.segments = std::move(segs);
    }
    return ds;
  });
}

nlohmann::json dataset_to_json(const Dataset& dataset) {
  nlohmann::json doc;
  doc["variables"] = dataset.variables;
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& inst : dataset.instances) {
    instances.push_back(inst.values().to_rows());
  }
  doc["instances"] = std::move(instances);
  if (dataset.labels) doc["labels"] = *dataset.labels;
  if (dataset.segments) {
    nlohmann::json segs = nlohmann::json::array();
    for (const auto& s : *dataset.segments) {
      if (s) {
        segs.push_back({{"start", s->start}, {"end", s->end}});
      } else {
        segs.push_back(nullptr);
      }
    }
    doc["segments"] = std::move(segs);
  }
  return doc;
}

Dataset read_dataset(const std::string& path) {
  const auto doc = read_json(path);
  try {
    return dataset_from_json(doc);
  } catch (const Error& e) {
    throw Error(e.code(), "'" + path + "': " + e.what());
  }
}

TimeSeriesInstance read_instance(const std::string& path) {
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    return read_dataset(path).instances.front();
  }
  try {
    return parse_instance_csv(text);
  } catch (const Error& e) {
    throw Error(e.code(), "'" + path + "': " + e.what());
  }
}

nlohmann::json attribution_to_json(const Attribution& attribution) {
  nlohmann::json doc;
  doc["meta"] = attribution.meta;
  doc["base_value"] = attribution.base_value;
  doc["prediction"] = attribution.prediction;
  doc["variables"] = attribution.variable_names;
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& wv : attribution.window_values) {
    nlohmann::json w;
    w["variable"] = wv.window.variable();
    if (wv.window.contiguous()) {
      w["start"] = wv.window.first();
      w["end"] = wv.window.last_exclusive();
    } else {
      w["steps"] = wv.window.time_steps();
    }
    w["value"] = wv.value;
    windows.push_back(std::move(w));
  }
  doc["windows"] = std::move(windows);
  doc["point_values"] = attribution.point_values.to_rows();
  return doc;
}

Attribution attribution_from_json(const nlohmann::json& doc) {
  return parse_guard("attribution", [&] {
    if (!doc.is_object()) throw Error(ErrorCode::kParse, "expected an object");
    Attribution a;
    a.meta = doc.value("meta", nlohmann::json::object());
    a.base_value = doc.at("base_value").get<double>();
    a.prediction = doc.at("prediction").get<double>();
    a.point_values = matrix_from_json(doc.at("point_values"));
    if (a.point_values.rows() == 0 || a.point_values.cols() == 0) {
      throw Error(ErrorCode::kParse, "point_values is empty");
    }
    if (doc.contains("variables")) {
      a.variable_names = doc.at("variables").get<std::vector<std::string>>();
      if (a.variable_names.size() != a.point_values.rows()) {
        throw Error(ErrorCode::kParse,
                    "variables count differs from point_values rows");
      }
    } else {
      for (std::size_t i = 0; i < a.point_values.rows(); ++i)
        a.variable_names.push_back("var" + std::to_string(i));
    }
    for (const auto& w : doc.value("windows", nlohmann::json::array())) {
      const auto var = w.at("variable").get<std::size_t>();
      const double value = w.at("value").get<double>();
      if (w.contains("steps")) {
        a.window_values.push_back(
            {Window(var, w.at("steps").get<std::vector<std::size_t>>()),
             value});
      } else {
        a.window_values.push_back(
            {Window::range(var, w.at("start").get<std::size_t>(),
                           w.at("end").get<std::size_t>()),
             value});
      }
    }
    return a;
  });
}

std::string format_point_values_csv(const Matrix& values,
                                    const std::vector<std::string>& names) {
  std::string out = "variable";
  for (std::size_t t = 0; t < values.cols(); ++t) {
    out += "," + std::to_string(t);
  }
  out.push_back('\n');
  for (std::size_t i = 0; i < values.rows(); ++i) {
    out += i < names.size() ? names[i] : "var" + std::to_string(i);
    for (std::size_t t = 0; t < values.cols(); ++t) {
      out.push_back(',');
      out += format_double(values(i, t));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace windowshap::io
