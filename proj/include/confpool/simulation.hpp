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

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "confpool/categorical.hpp"
#include "confpool/errors.hpp"
#include "confpool/loss.hpp"
#include "confpool/rng.hpp"

// Synthetic interaction generator. Three modality analogs are produced per
// interaction, always in this order:
//   0 speech   names an object category; every object of that category gets
//              the same share, so category-mates stay ambiguous.
//   1 gesture  points at one of a few direction bins; objects sharing a bin
//              split that bin's score.
//   2 gaze     a noisy 2-D fixation scored against every object position with
//              an anisotropic Gaussian (sharper horizontally).

namespace confpool::sim {

inline constexpr std::size_t kSpeech = 0;
inline constexpr std::size_t kGesture = 1;
inline constexpr std::size_t kGaze = 2;
inline constexpr std::size_t kModalityCount = 3;

inline constexpr std::string_view kModalityNames[kModalityCount] = {"speech", "gesture", "gaze"};

struct Position {
  double x = 0.0;  // meters, left/right of the user
  double y = 0.0;  // meters, away from the user

  friend bool operator==(const Position&, const Position&) = default;
};

struct SceneObject {
  std::size_t id = 0;
  std::size_t category = 0;
  std::size_t direction = 0;
  Position position;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct Scenario {
  std::string name;
  std::vector<SceneObject> objects;
  std::size_t modalities = kModalityCount;
  std::size_t direction_bins = 5;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return objects.size(); }

  /// Vocabulary size: largest category id + 1.
  std::size_t category_count() const noexcept {
    std::size_t c = 0;
    for (const auto& o : objects) c = std::max(c, o.category + 1);
    return c;
  }

  std::size_t objects_in_bin(std::size_t bin) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        objects.begin(), objects.end(), [bin](const SceneObject& o) { return o.direction == bin; }));
  }

  std::size_t objects_in_category(std::size_t category) const noexcept {
    return static_cast<std::size_t>(std::count_if(
        objects.begin(), objects.end(),
        [category](const SceneObject& o) { return o.category == category; }));
  }

  void validate() const {
    if (objects.size() < 2) throw InvalidConfig("scene needs at least 2 objects");
    if (direction_bins < 1) throw InvalidConfig("scene needs at least one direction bin");
    if (modalities < 1 || modalities > kModalityCount) {
      throw InvalidConfig("scene modality count must be 1..3");
    }
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const auto& o = objects[i];
      if (o.id != i) throw InvalidConfig("object ids must be dense and listed in order");
      if (o.direction >= direction_bins) throw InvalidConfig("object direction bin out of range");
      if (!std::isfinite(o.position.x) || !std::isfinite(o.position.y)) {
        throw InvalidConfig("object position must be finite");
      }
    }
  }
};

/// Symmetric 2x2 covariance in m^2.
struct Covariance2 {
  double xx = 0.01;
  double xy = 0.0;
  double yy = 0.1;

  bool positive_definite() const noexcept { return xx > 0.0 && xx * yy - xy * xy > 0.0; }
};

/// Noise model of the three modality analogs. The defaults are calibration
/// constants picked by seeded sweeps so that on the cluttered scene the mean
/// entropies land near 1.6 (speech), 1.6 (gesture) and 1.0 (gaze) nats; see
/// tests/simulation_test.cpp.
struct ModalityNoise {
  /// Probability that speech reports a wrong category (uniform over the rest).
  double speech_confusion = 0.5;
  /// Recognition confidence of the reported category, uniform in this range
  /// when the category is right and in the miss range when it is wrong.
  double speech_confidence_min = 0.6;
  double speech_confidence_max = 0.85;
  double speech_miss_confidence_min = 0.6;
  double speech_miss_confidence_max = 0.85;
  /// Row-stochastic confusion between true and recognized direction bins.
  std::vector<std::vector<double>> gesture_confusion = adjacent_confusion(5, 0.95);
  /// Classifier score on the recognized bin and on each neighbouring bin;
  /// the rest is shared by the remaining bins.
  double gesture_peak = 0.75;
  double gesture_spill = 0.25 / 3.0;
  /// Density covariance of the gaze model.
  Covariance2 gaze_sigma{0.01, 0.0, 0.1};
  /// Fixations are drawn with covariance scale^2 * gaze_sigma (filtered
  /// fixations are tighter than the scoring density).
  double gaze_fixation_scale = 0.5;
  double floor = kDefaultFloor;

  /// Confusion matrix that keeps `correct` on the diagonal and splits the
  /// remainder evenly over the adjacent bins.
  static std::vector<std::vector<double>> adjacent_confusion(std::size_t bins, double correct) {
    std::vector<std::vector<double>> m(bins, std::vector<double>(bins, 0.0));
    for (std::size_t b = 0; b < bins; ++b) {
      std::vector<std::size_t> adj;
      if (b > 0) adj.push_back(b - 1);
      if (b + 1 < bins) adj.push_back(b + 1);
      if (adj.empty()) {
        m[b][b] = 1.0;
        continue;
      }
      m[b][b] = correct;
      for (std::size_t a : adj) m[b][a] = (1.0 - correct) / static_cast<double>(adj.size());
    }
    return m;
  }

  static std::vector<std::vector<double>> identity_confusion(std::size_t bins) {
    return adjacent_confusion(bins, 1.0);
  }

  void validate(std::size_t bins) const {
    auto unit = [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; };
    if (!unit(speech_confusion)) throw InvalidConfig("speech confusion must be in [0, 1]");
    if (!unit(speech_confidence_min) || !unit(speech_confidence_max) ||
        speech_confidence_min > speech_confidence_max) {
      throw InvalidConfig("speech confidence range must satisfy 0 <= min <= max <= 1");
    }
    if (!unit(speech_miss_confidence_min) || !unit(speech_miss_confidence_max) ||
        speech_miss_confidence_min > speech_miss_confidence_max) {
      throw InvalidConfig("speech miss confidence range must satisfy 0 <= min <= max <= 1");
    }
    if (gesture_confusion.size() != bins) {
      throw InvalidConfig("gesture confusion must have one row per direction bin");
    }
    for (const auto& row : gesture_confusion) {
      if (row.size() != bins) throw InvalidConfig("gesture confusion must be square");
      double total = 0.0;
      for (double v : row) {
        if (!unit(v)) throw InvalidConfig("gesture confusion entries must be in [0, 1]");
        total += v;
      }
      if (std::abs(total - 1.0) > 1e-9) throw InvalidConfig("gesture confusion rows must sum to 1");
    }
    if (!(gesture_peak > 0.0) || !unit(gesture_peak) || !unit(gesture_spill) ||
        gesture_peak + 2.0 * gesture_spill > 1.0 + 1e-12) {
      throw InvalidConfig("gesture scores must satisfy peak > 0 and peak + 2 * spill <= 1");
    }
    if (!gaze_sigma.positive_definite()) throw InvalidConfig("gaze covariance must be SPD");
    if (!std::isfinite(gaze_fixation_scale) || gaze_fixation_scale < 0.0) {
      throw InvalidConfig("gaze fixation scale must be >= 0");
    }
  }
};

namespace detail {

inline void check_target(const Scenario& sc, std::size_t true_obj) {
  if (true_obj >= sc.size()) throw IndexError("target object out of range");
}

inline Categorical finish(std::span<const double> raw, const ModalityNoise& noise) {
  return floor_and_renormalize(raw, noise.floor);
}

}  // namespace detail

/// Speech analog. Recognizes the true category with probability
/// 1 - speech_confusion, else a uniformly chosen other category. The drawn
/// recognition confidence is split evenly over the objects of the recognized
/// category and the remainder evenly over all other objects.
inline Categorical sample_speech(const Scenario& sc, std::size_t true_obj,
                                 const ModalityNoise& noise, Rng& rng) {
  detail::check_target(sc, true_obj);
  const std::size_t categories = sc.category_count();
  std::size_t recognized = sc.objects[true_obj].category;
  const bool confused = rng.uniform() < noise.speech_confusion;
  if (confused && categories > 1) {
    std::size_t other = rng.index(categories - 1);
    if (other >= recognized) ++other;
    recognized = other;
  }
  const bool miss = recognized != sc.objects[true_obj].category;
  const double confidence =
      miss ? rng.uniform(noise.speech_miss_confidence_min, noise.speech_miss_confidence_max)
           : rng.uniform(noise.speech_confidence_min, noise.speech_confidence_max);

  const std::size_t members = sc.objects_in_category(recognized);
  const std::size_t rest = sc.size() - members;
  std::vector<double> raw(sc.size(), 1.0);
  if (members > 0) {
    for (std::size_t i = 0; i < sc.size(); ++i) {
      if (sc.objects[i].category == recognized) {
        raw[i] = confidence / static_cast<double>(members);
      } else {
        raw[i] = (1.0 - confidence) / static_cast<double>(rest);
      }
    }
  }
  return detail::finish(raw, noise);
}

/// Gesture analog. Draws the recognized bin from the confusion row of the
/// true bin, scores bins around it and shares each bin's score evenly among
/// its objects. Scores of empty bins are dropped before the floor.
inline Categorical sample_gesture(const Scenario& sc, std::size_t true_obj,
                                  const ModalityNoise& noise, Rng& rng) {
  detail::check_target(sc, true_obj);
  const std::size_t bins = sc.direction_bins;
  const auto& row = noise.gesture_confusion.at(sc.objects[true_obj].direction);
  const std::size_t recognized = rng.categorical(row);

  std::vector<double> score(bins, 0.0);
  std::vector<bool> assigned(bins, false);
  score[recognized] = noise.gesture_peak;
  assigned[recognized] = true;
  double used = noise.gesture_peak;
  for (std::size_t b : {recognized - 1, recognized + 1}) {
    if (b < bins) {  // recognized - 1 wraps to a huge value at bin 0
      score[b] = noise.gesture_spill;
      assigned[b] = true;
      used += noise.gesture_spill;
    }
  }
  const auto others = static_cast<std::size_t>(std::count(assigned.begin(), assigned.end(), false));
  if (others > 0) {
    const double share = std::max(0.0, 1.0 - used) / static_cast<double>(others);
    for (std::size_t b = 0; b < bins; ++b) {
      if (!assigned[b]) score[b] = share;
    }
  }

  std::vector<double> raw(sc.size(), 0.0);
  for (std::size_t i = 0; i < sc.size(); ++i) {
    const std::size_t bin = sc.objects[i].direction;
    raw[i] = score[bin] / static_cast<double>(sc.objects_in_bin(bin));
  }
  // Every object can sit in a zero-score bin only if all mass went to empty bins.
  if (std::all_of(raw.begin(), raw.end(), [](double v) { return v == 0.0; })) {
    std::fill(raw.begin(), raw.end(), 1.0);
  }
  return detail::finish(raw, noise);
}

/// Gaze analog. Fixation = target position + N(0, scale^2 * sigma); each
/// object is scored by the Gaussian density of the fixation under sigma.
inline Categorical sample_gaze(const Scenario& sc, std::size_t true_obj,
                               const ModalityNoise& noise, Rng& rng) {
  detail::check_target(sc, true_obj);
  const auto& s = noise.gaze_sigma;
  if (!s.positive_definite()) throw InvalidConfig("gaze covariance must be SPD");
  const double l11 = std::sqrt(s.xx);
  const double l21 = s.xy / l11;
  const double l22 = std::sqrt(s.yy - l21 * l21);
  const double n1 = rng.normal();
  const double n2 = rng.normal();
  const double scale = noise.gaze_fixation_scale;
  const Position target = sc.objects[true_obj].position;
  const Position fix{target.x + scale * l11 * n1, target.y + scale * (l21 * n1 + l22 * n2)};

  const double det = s.xx * s.yy - s.xy * s.xy;
  std::vector<double> logs(sc.size());
  for (std::size_t i = 0; i < sc.size(); ++i) {
    const double dx = sc.objects[i].position.x - fix.x;
    const double dy = sc.objects[i].position.y - fix.y;
    const double q = (s.yy * dx * dx - 2.0 * s.xy * dx * dy + s.xx * dy * dy) / det;
    logs[i] = -0.5 * q;
  }
  const double top = *std::max_element(logs.begin(), logs.end());
  for (double& l : logs) l = std::exp(l - top);
  return detail::finish(logs, noise);
}

/// One interaction for a given target: modality distributions in
/// speech/gesture/gaze order (the first `sc.modalities` of them) and a
/// floored one-hot advice on the target.
inline Experience sample_experience(const Scenario& sc, std::size_t true_obj,
                                    const ModalityNoise& noise, Rng& rng) {
  std::vector<Categorical> bases;
  bases.reserve(sc.modalities);
  bases.push_back(sample_speech(sc, true_obj, noise, rng));
  if (sc.modalities > 1) bases.push_back(sample_gesture(sc, true_obj, noise, rng));
  if (sc.modalities > 2) bases.push_back(sample_gaze(sc, true_obj, noise, rng));
  return Experience(std::move(bases), one_hot(sc.size(), true_obj, noise.floor),
                    ExperienceMeta{true_obj, sc.name});
}

/// n interactions with targets drawn uniformly over the scene objects.
inline Batch generate_batch(const Scenario& sc, std::size_t n, const ModalityNoise& noise,
                            Rng& rng) {
  if (n < 1) throw InvalidConfig("batch size must be >= 1");
  sc.validate();
  noise.validate(sc.direction_bins);
  std::vector<Experience> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t target = rng.index(sc.size());
    out.push_back(sample_experience(sc, target, noise, rng));
  }
  return Batch(std::move(out));
}

/// Interactions following a scripted target order.
inline Batch generate_batch(const Scenario& sc, std::span<const std::size_t> targets,
                            const ModalityNoise& noise, Rng& rng) {
  if (targets.empty()) throw InvalidConfig("batch size must be >= 1");
  sc.validate();
  noise.validate(sc.direction_bins);
  std::vector<Experience> out;
  out.reserve(targets.size());
  for (std::size_t t : targets) out.push_back(sample_experience(sc, t, noise, rng));
  return Batch(std::move(out));
}

/// Built-in tabletop scenes.
///
/// "scenario1": 6 objects, 5 categories (apples repeated), objects 3 and 4
/// share a direction bin.
/// "scenario2": 10 objects, 5 categories (3 apples, 2 each of banana, orange
/// and bowl, 1 yogurt); bins hold 1 to 3 objects.
///
/// Bins follow the bearing from the user at the origin: 5 sectors of 36
/// degrees, bin 0 on the right.
inline Scenario builtin_scenario(std::string_view name) {
  auto obj = [](std::size_t id, std::size_t cat, std::size_t dir, double x, double y) {
    return SceneObject{id, cat, dir, Position{x, y}};
  };
  if (name == "scenario1") {
    return Scenario{"scenario1",
                    {obj(0, 0, 4, -0.55, 0.30), obj(1, 1, 3, -0.30, 0.55), obj(2, 2, 2, 0.00, 0.65),
                     obj(3, 3, 1, 0.30, 0.50), obj(4, 4, 1, 0.45, 0.70), obj(5, 0, 0, 0.60, 0.20)}};
  }
  if (name == "scenario2") {
    return Scenario{"scenario2",
                    {obj(0, 0, 4, -0.495, 0.30), obj(1, 1, 3, -0.360, 0.62),
                     obj(2, 0, 3, -0.198, 0.45), obj(3, 2, 2, -0.045, 0.75),
                     obj(4, 3, 2, 0.018, 0.40), obj(5, 0, 2, 0.162, 0.60),
                     obj(6, 2, 1, 0.270, 0.35), obj(7, 1, 1, 0.378, 0.70),
                     obj(8, 3, 1, 0.495, 0.45), obj(9, 4, 0, 0.558, 0.20)}};
  }
  throw InvalidConfig("unknown builtin scene '" + std::string(name) + "'");
}

inline constexpr std::string_view kSceneHeader = "id,category,direction_bin,x,y";

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
T parse_field(std::string_view text, std::string_view field, std::size_t line) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ParseError("bad " + std::string(field) + " '" + std::string(text) + "'", line);
  }
  return value;
}

}  // namespace detail

/// Reads a scene description: a header line `id,category,direction_bin,x,y`
/// followed by one object per line. Blank lines are ignored.
inline Scenario parse_scene(std::istream& in, std::string name, std::size_t direction_bins = 5) {
  Scenario sc;
  sc.name = std::move(name);
  sc.direction_bins = direction_bins;
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    if (!header_seen) {
      std::string compact;
      for (char c : text) {
        if (c != ' ' && c != '\t') compact.push_back(c);
      }
      if (compact != kSceneHeader) {
        throw ParseError("expected header '" + std::string(kSceneHeader) + "'", line_no);
      }
      header_seen = true;
      continue;
    }
    const auto fields = detail::split_csv(text);
    if (fields.size() != 5) throw ParseError("expected 5 comma-separated fields", line_no);
    SceneObject o;
    o.id = detail::parse_field<std::size_t>(fields[0], "id", line_no);
    o.category = detail::parse_field<std::size_t>(fields[1], "category", line_no);
    o.direction = detail::parse_field<std::size_t>(fields[2], "direction_bin", line_no);
    o.position.x = detail::parse_field<double>(fields[3], "x", line_no);
    o.position.y = detail::parse_field<double>(fields[4], "y", line_no);
    if (o.direction >= direction_bins) throw ParseError("direction_bin out of range", line_no);
    if (!std::isfinite(o.position.x) || !std::isfinite(o.position.y)) {
      throw ParseError("non-finite position", line_no);
    }
    if (o.id != sc.objects.size()) {
      throw ParseError("ids must be dense and in order, expected " +
                           std::to_string(sc.objects.size()),
                       line_no);
    }
    sc.objects.push_back(o);
  }
  if (!header_seen) throw ParseError("missing header", line_no + 1);
  if (sc.objects.size() < 2) throw ParseError("scene needs at least 2 objects", line_no + 1);
  return sc;
}

inline Scenario load_scene(const std::string& path, std::size_t direction_bins = 5) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scene file '" + path + "'");
  return parse_scene(in, path, direction_bins);
}

inline void write_scene(std::ostream& out, const Scenario& sc) {
  out << kSceneHeader << '\n';
  for (const auto& o : sc.objects) {
    out << o.id << ',' << o.category << ',' << o.direction << ',' << o.position.x << ','
        << o.position.y << '\n';
  }
}

}  // namespace confpool::sim
