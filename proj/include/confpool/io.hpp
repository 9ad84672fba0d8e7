// Copyright 2026 The confpool Authors
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

#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"

#include "confpool/categorical.hpp"
#include "confpool/errors.hpp"
#include "confpool/learner.hpp"
#include "confpool/loss.hpp"

namespace confpool::io {

/// 17 significant digits, enough to read back exactly `v`.
inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  if (ec != std::errc{}) throw IoError("cannot format number");
  return std::string(buf, ptr);
}

inline void write_array(std::ostream& out, std::span<const double> values) {
  out << '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out << ',';
    out << format_double(values[i]);
  }
  out << ']';
}

/// One experience as a single JSON object line:
///   {"bases":[[..],..],"advice":[..],"meta":{"true_index":i,"scenario":"s"}}
inline void write_experience(std::ostream& out, const Experience& x) {
  out << "{\"bases\":[";
  for (std::size_t m = 0; m < x.bases.size(); ++m) {
    if (m > 0) out << ',';
    write_array(out, x.bases[m].probs());
  }
  out << "],\"advice\":";
  write_array(out, x.advice.probs());
  out << ",\"meta\":{";
  if (x.meta.true_index) out << "\"true_index\":" << *x.meta.true_index << ',';
  out << "\"scenario\":" << nlohmann::json(x.meta.scenario).dump() << "}}\n";
}

inline void write_experiences(std::ostream& out, const Batch& b) {
  for (const auto& x : b) write_experience(out, x);
}

inline void save_experiences(const std::string& path, const Batch& b) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_experiences(out, b);
  if (!out) throw IoError("write failed for '" + path + "'");
}

namespace detail {

inline std::vector<double> read_numbers(const nlohmann::json& j, std::size_t line) {
  if (!j.is_array()) throw ParseError("expected an array of numbers", line);
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) {
    if (!v.is_number()) throw ParseError("expected a number", line);
    out.push_back(v.get<double>());
  }
  return out;
}

inline Experience parse_experience(std::string_view text, std::size_t line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed record: ") + e.what(), line);
  }
  if (!j.is_object() || !j.contains("bases") || !j.contains("advice")) {
    throw ParseError("record needs 'bases' and 'advice'", line);
  }
  try {
    std::vector<Categorical> bases;
    if (!j["bases"].is_array()) throw ParseError("'bases' must be an array", line);
    for (const auto& b : j["bases"]) bases.emplace_back(read_numbers(b, line));
    Categorical advice(read_numbers(j["advice"], line));
    ExperienceMeta meta;
    if (j.contains("meta")) {
      const auto& m = j["meta"];
      if (!m.is_object()) throw ParseError("'meta' must be an object", line);
      if (m.contains("true_index")) {
        if (!m["true_index"].is_number_unsigned()) {
          throw ParseError("'true_index' must be a nonnegative integer", line);
        }
        meta.true_index = m["true_index"].get<std::size_t>();
      }
      if (m.contains("scenario")) {
        if (!m["scenario"].is_string()) throw ParseError("'scenario' must be a string", line);
        meta.scenario = m["scenario"].get<std::string>();
      }
    }
    return Experience(std::move(bases), std::move(advice), std::move(meta));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(e.what(), line);
  }
}

}  // namespace detail

/// Reads line-delimited experience records. Blank lines are skipped.
inline Batch read_experiences(std::istream& in) {
  std::vector<Experience> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back(detail::parse_experience(line, line_no));
  }
  if (out.empty()) throw InvalidBatch("no experience records");
  try {
    return Batch(std::move(out));
  } catch (const InvalidBatch& e) {
    throw ParseError(e.what(), line_no);
  }
}

inline Batch load_experiences(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_experiences(in);
}

/// `round,L_max,L_min,gap`
inline void write_gap_trace(std::ostream& out, std::span<const GapRecord> trace) {
  out << "round,L_max,L_min,gap\n";
  for (const auto& r : trace) {
    out << r.round << ',' << format_double(r.l_max) << ',' << format_double(r.l_min) << ','
        << format_double(r.gap) << '\n';
  }
}

/// `round,w_1..w_K`
inline void write_confidence_trace(std::ostream& out, std::span<const ConfidenceVector> trace) {
  out << "round";
  const std::size_t k = trace.empty() ? 0 : trace.front().size();
  for (std::size_t i = 1; i <= k; ++i) out << ",w_" << i;
  out << '\n';
  for (std::size_t t = 0; t < trace.size(); ++t) {
    out << (t + 1);
    for (double w : trace[t]) out << ',' << format_double(w);
    out << '\n';
  }
}

/// Learned confidence, one weight per line at full precision.
inline void write_confidence(std::ostream& out, const ConfidenceVector& w) {
  for (double x : w) out << format_double(x) << '\n';
}

}  // namespace confpool::io
