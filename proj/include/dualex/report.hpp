/*
 * Copyright 2026 The dualex Authors.
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

#pragma once

/**
 * @file report.hpp
 * @brief Versioned JSON run report written by every CLI command.
 *
 * Layout (schema "dualex-report/1"):
 *
 *   {
 *     "schema":    "dualex-report/1",
 *     "command":   "explain" | "compare" | "examples" | "gen-data",
 *     "seed":      <uint64>,
 *     "config":    { echo of the options that influence results },
 *     "points":    [ { "index", "d", "contains_x0", "x0", "a", "b",
 *                      "metrics": {name: number}, "warnings": [..] } ],
 *     "aggregate": { command-specific summary },
 *     "warnings":  [ run-level warnings ],
 *     "timing":    { "seconds", "timestamp" }   (omitted with --no-timestamp)
 *   }
 *
 * Numbers are written with enough digits to round-trip exactly.
 */

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dualex/errors.hpp"
#include "dualex/linalg.hpp"

namespace dualex {

using Json = nlohmann::ordered_json;

inline constexpr const char* kReportSchema = "dualex-report/1";

struct PointResult {
  Index index = 0;
  Index d = 0;
  bool contains_x0 = false;
  std::vector<double> x0;
  std::vector<double> a;
  std::vector<double> b;
  std::map<std::string, double> metrics;
  std::vector<std::string> warnings;

  bool operator==(const PointResult&) const = default;
};

struct Timing {
  double seconds = 0.0;
  std::string timestamp;

  bool operator==(const Timing&) const = default;
};

struct RunReport {
  std::string command;
  std::uint64_t seed = 0;
  Json config = Json::object();
  std::vector<PointResult> points;
  Json aggregate = Json::object();
  std::vector<std::string> warnings;
  std::optional<Timing> timing;

  bool operator==(const RunReport&) const = default;
};

inline void to_json(Json& j, const PointResult& p) {
  j = Json::object();
  j["index"] = p.index;
  j["d"] = p.d;
  j["contains_x0"] = p.contains_x0;
  j["x0"] = p.x0;
  j["a"] = p.a;
  j["b"] = p.b;
  j["metrics"] = p.metrics;
  j["warnings"] = p.warnings;
}

inline void from_json(const Json& j, PointResult& p) {
  j.at("index").get_to(p.index);
  j.at("d").get_to(p.d);
  j.at("contains_x0").get_to(p.contains_x0);
  j.at("x0").get_to(p.x0);
  j.at("a").get_to(p.a);
  j.at("b").get_to(p.b);
  j.at("metrics").get_to(p.metrics);
  j.at("warnings").get_to(p.warnings);
}

inline Json report_to_json(const RunReport& r) {
  Json j = Json::object();
  j["schema"] = kReportSchema;
  j["command"] = r.command;
  j["seed"] = r.seed;
  j["config"] = r.config;
  j["points"] = r.points;
  j["aggregate"] = r.aggregate;
  j["warnings"] = r.warnings;
  if (r.timing) j["timing"] = Json{{"seconds", r.timing->seconds}, {"timestamp", r.timing->timestamp}};
  return j;
}

inline RunReport report_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("schema")) throw IngestionError("report has no schema field");
  if (j.at("schema") != kReportSchema)
    throw IngestionError("unsupported report schema " + j.at("schema").dump());
  try {
    RunReport r;
    j.at("command").get_to(r.command);
    j.at("seed").get_to(r.seed);
    r.config = j.at("config");
    j.at("points").get_to(r.points);
    r.aggregate = j.at("aggregate");
    j.at("warnings").get_to(r.warnings);
    if (j.contains("timing")) {
      Timing t;
      j["timing"].at("seconds").get_to(t.seconds);
      j["timing"].at("timestamp").get_to(t.timestamp);
      r.timing = t;
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("malformed report: ") + e.what());
  }
}

inline std::string dump_report(const RunReport& r) { return report_to_json(r).dump(2) + "\n"; }

inline RunReport parse_report(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw IngestionError(std::string("report is not valid JSON: ") + e.what());
  }
  return report_from_json(j);
}

inline void write_report(const std::string& path, const RunReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IngestionError("cannot write report '" + path + "'");
  out << dump_report(r);
  if (!out) throw IngestionError("write to '" + path + "' failed");
}

inline std::vector<double> to_list(const Vector& v) { return to_std(v); }

}  // namespace dualex
