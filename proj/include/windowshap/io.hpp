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


#ifndef WINDOWSHAP_IO_HPP_
#define WINDOWSHAP_IO_HPP_

// File formats: single-instance CSV, multi-instance JSON, attribution JSON.
// Failures to read or write raise kIo; malformed content raises kParse.

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "windowshap/domain.hpp"
#include "windowshap/models.hpp"

namespace windowshap::io {

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& content);

nlohmann::json read_json(const std::string& path);
// Pretty-printed with a trailing newline; byte-stable for equal input.
void write_json(const std::string& path, const nlohmann::json& value);

// Header row holds variable names; each following row is one time step.
TimeSeriesInstance parse_instance_csv(const std::string& text);
std::string format_instance_csv(const TimeSeriesInstance& instance);
TimeSeriesInstance read_instance_csv(const std::string& path);

struct Dataset {
  std::vector<std::string> variables;
  std::vector<TimeSeriesInstance> instances;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<std::optional<Segment>>> segments;
};

Dataset dataset_from_json(const nlohmann::json& doc);
nlohmann::json dataset_to_json(const Dataset& dataset);
Dataset read_dataset(const std::string& path);

// Accepts either a CSV instance or a dataset JSON (first instance used).
TimeSeriesInstance read_instance(const std::string& path);

nlohmann::json attribution_to_json(const Attribution& attribution);
Attribution attribution_from_json(const nlohmann::json& doc);

// One row per variable, one column per time step, header "variable,0,1,...".
std::string format_point_values_csv(const Matrix& values,
                                    const std::vector<std::string>& names);

}  // namespace windowshap::io

#endif  // WINDOWSHAP_IO_HPP_
