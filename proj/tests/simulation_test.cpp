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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <gtest/gtest.h>

#include "confpool/learner.hpp"
#include "confpool/simulation.hpp"

namespace confpool::sim {
namespace {

Scenario make_scene(std::vector<std::size_t> categories, std::vector<std::size_t> bins) {
  Scenario sc;
  sc.name = "test";
  for (std::size_t i = 0; i < categories.size(); ++i) {
    sc.objects.push_back(
        SceneObject{i, categories[i], bins[i], Position{0.2 * static_cast<double>(i), 0.5}});
  }
  return sc;
}

ModalityNoise exact_noise(std::size_t bins = 5) {
  ModalityNoise noise;
  noise.speech_confusion = 0.0;
  noise.speech_confidence_min = noise.speech_confidence_max = 1.0;
  noise.gesture_confusion = ModalityNoise::identity_confusion(bins);
  noise.gesture_peak = 1.0;
  noise.gesture_spill = 0.0;
  return noise;
}

// --- speech -----------------------------------------------------------------

TEST(Speech, UniqueCategoryIsNearOneHot) {
  const auto sc = builtin_scenario("scenario1");
  Rng rng(1);
  const auto d = sample_speech(sc, 1, exact_noise(), rng);
  EXPECT_GT(d[1], 0.9999);
  EXPECT_EQ(argmax_tiebreak(d), 1u);
}

TEST(Speech, CategoryMatesSplitConfidence) {
  const auto sc = make_scene({0, 0, 0, 1, 2}, {0, 1, 2, 3, 4});
  auto noise = exact_noise();
  noise.speech_confidence_min = noise.speech_confidence_max = 0.9;
  Rng rng(1);
  const auto d = sample_speech(sc, 2, noise, rng);
  const double expected[] = {0.3, 0.3, 0.3, 0.05, 0.05};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(d[i], expected[i], 1e-12);
}

TEST(Speech, ConfusionMovesMassToAnotherCategory) {
  const auto sc = make_scene({0, 1, 2}, {0, 1, 2});
  auto noise = exact_noise();
  noise.speech_confusion = 1.0;
  Rng rng(3);
  for (int i = 0; i < 50; ++i) {
    const auto d = sample_speech(sc, 0, noise, rng);
    EXPECT_NE(argmax_tiebreak(d), 0u);
  }
}

TEST(Speech, MissRangeAppliesOnlyToWrongCategory) {
  const auto sc = make_scene({0, 1, 2, 3}, {0, 1, 2, 3});
  auto noise = exact_noise();
  noise.speech_confusion = 0.5;
  noise.speech_confidence_min = noise.speech_confidence_max = 0.8;
  noise.speech_miss_confidence_min = noise.speech_miss_confidence_max = 0.4;
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const auto d = sample_speech(sc, 0, noise, rng);
    const auto top = argmax_tiebreak(d);
    EXPECT_NEAR(d[top], top == 0 ? 0.8 : 0.4, 1e-12);
  }
}

// --- gesture ----------------------------------------------------------------

TEST(Gesture, OneObjectPerBinIsNearOneHot) {
  const auto sc = make_scene({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4});
  Rng rng(1);
  for (std::size_t t = 0; t < 5; ++t) {
    const auto d = sample_gesture(sc, t, exact_noise(), rng);
    EXPECT_GT(d[t], 0.9999);
  }
}

TEST(Gesture, BinMatesSplitEvenly) {
  const auto sc = make_scene({0, 1, 2, 3, 4, 0}, {0, 0, 1, 2, 3, 4});
  Rng rng(1);
  const auto d = sample_gesture(sc, 1, exact_noise(), rng);
  EXPECT_NEAR(d[0], 0.5, 1e-5);
  EXPECT_NEAR(d[1], 0.5, 1e-5);
  EXPECT_EQ(d[0], d[1]);
}

TEST(Gesture, EmptyBinsDoNotKeepMass) {
  // Only bins 0 and 4 are occupied; scores of the empty bins are dropped.
  const auto sc = make_scene({0, 1}, {0, 4});
  auto noise = exact_noise();
  noise.gesture_peak = 0.6;
  noise.gesture_spill = 0.2;
  Rng rng(1);
  const auto d = sample_gesture(sc, 0, noise, rng);
  // bin 0: 0.6, bin 1: 0.2, bins 2..4 share 0.2 -> bin 4 holds 0.2 / 3.
  EXPECT_NEAR(d[0], 0.6 / (0.6 + 0.2 / 3.0), 1e-9);
}

TEST(Gesture, SpillReachesNeighbours) {
  const auto sc = make_scene({0, 1, 2, 3, 4}, {0, 1, 2, 3, 4});
  auto noise = exact_noise();
  noise.gesture_peak = 0.7;
  noise.gesture_spill = 0.1;
  Rng rng(1);
  const auto d = sample_gesture(sc, 2, noise, rng);
  const double expected[] = {0.05, 0.1, 0.7, 0.1, 0.05};
  for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(d[i], expected[i], 1e-12);
}

// --- gaze -------------------------------------------------------------------

TEST(Gaze, NoiselessFixationPicksTarget) {
  const auto sc = builtin_scenario("scenario2");
  ModalityNoise noise;
  noise.gaze_fixation_scale = 0.0;
  Rng rng(1);
  for (std::size_t t = 0; t < sc.size(); ++t) {
    EXPECT_EQ(argmax_tiebreak(sample_gaze(sc, t, noise, rng)), t);
  }
}

TEST(Gaze, CoincidentObjectsShareProbability) {
  auto sc = make_scene({0, 1, 2}, {0, 1, 2});
  sc.objects[2].position = sc.objects[0].position;
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto d = sample_gaze(sc, 0, ModalityNoise{}, rng);
    EXPECT_EQ(d[0], d[2]);
  }
}

TEST(Gaze, HorizontalOffsetsDiscriminateBetter) {
  // Same distance from the target, once sideways and once in depth.
  Scenario sc;
  sc.objects = {SceneObject{0, 0, 0, {0.0, 0.5}}, SceneObject{1, 1, 1, {0.15, 0.5}},
                SceneObject{2, 2, 2, {0.0, 0.65}}};
  ModalityNoise noise;
  noise.gaze_fixation_scale = 0.0;
  Rng rng(1);
  const auto d = sample_gaze(sc, 0, noise, rng);
  EXPECT_LT(d[1], d[2]);
}

// --- calibration and ambiguity ----------------------------------------------

struct ModalityStats {
  double entropy[kModalityCount] = {0.0, 0.0, 0.0};
  double success[kModalityCount] = {0.0, 0.0, 0.0};
};

ModalityStats draw_stats(const Scenario& sc, std::size_t draws, std::uint64_t seed) {
  Rng rng(seed);
  const auto b = generate_batch(sc, draws, ModalityNoise{}, rng);
  ModalityStats s;
  for (const auto& x : b) {
    for (std::size_t m = 0; m < kModalityCount; ++m) {
      s.entropy[m] += entropy(x.bases[m]);
      s.success[m] += argmax_tiebreak(x.bases[m]) == x.true_index() ? 1.0 : 0.0;
    }
  }
  for (std::size_t m = 0; m < kModalityCount; ++m) {
    s.entropy[m] /= static_cast<double>(draws);
    s.success[m] *= 100.0 / static_cast<double>(draws);
  }
  return s;
}

TEST(Calibration, MeanEntropiesInBrackets) {
  const auto s = draw_stats(builtin_scenario("scenario2"), 1000, 2026);
  EXPECT_GE(s.entropy[kSpeech], 1.4);
  EXPECT_LE(s.entropy[kSpeech], 2.2);
  EXPECT_GE(s.entropy[kGesture], 1.1);
  EXPECT_LE(s.entropy[kGesture], 1.8);
  EXPECT_GE(s.entropy[kGaze], 0.9);
  EXPECT_LE(s.entropy[kGaze], 1.4);
}

TEST(Calibration, GazeIsTheMostAccurateModality) {
  const auto s = draw_stats(builtin_scenario("scenario2"), 1000, 2026);
  EXPECT_GE(s.success[kGaze], 80.0);
  EXPECT_LE(s.success[kGaze], 96.0);
  EXPECT_GT(s.success[kGaze], s.success[kGesture]);
  EXPECT_GT(s.success[kGesture], s.success[kSpeech]);
}

double mean_entropy(const Scenario& sc, std::size_t modality, std::uint64_t seed) {
  Rng rng(seed);
  const ModalityNoise noise;
  double total = 0.0;
  const std::size_t draws = 1000;
  for (std::size_t i = 0; i < draws; ++i) {
    const std::size_t t = i % 10;  // targets from the original ten objects
    total += entropy(modality == kSpeech ? sample_speech(sc, t, noise, rng)
                                         : sample_gesture(sc, t, noise, rng));
  }
  return total / static_cast<double>(draws);
}

TEST(Ambiguity, SameCategoryObjectRaisesSpeechEntropy) {
  const auto base = builtin_scenario("scenario2");
  for (std::size_t category = 0; category < 5; ++category) {
    auto more = base;
    more.objects.push_back(SceneObject{10, category, 0, Position{0.6, 0.6}});
    for (std::uint64_t seed : {1, 2, 3}) {
      EXPECT_GE(mean_entropy(more, kSpeech, seed), mean_entropy(base, kSpeech, seed))
          << "category " << category << " seed " << seed;
    }
  }
}

TEST(Ambiguity, SameBinObjectRaisesGestureEntropy) {
  const auto base = builtin_scenario("scenario2");
  for (std::size_t bin = 0; bin < 5; ++bin) {
    auto more = base;
    more.objects.push_back(SceneObject{10, 4, bin, Position{0.6, 0.6}});
    for (std::uint64_t seed : {1, 2, 3}) {
      EXPECT_GE(mean_entropy(more, kGesture, seed), mean_entropy(base, kGesture, seed))
          << "bin " << bin << " seed " << seed;
    }
  }
}

// --- batches ----------------------------------------------------------------

TEST(GenerateBatch, SeedReplaysBatch) {
  const auto sc = builtin_scenario("scenario2");
  Rng a(32);
  Rng b(32);
  Rng c(33);
  const auto x = generate_batch(sc, 32, ModalityNoise{}, a);
  EXPECT_EQ(x, generate_batch(sc, 32, ModalityNoise{}, b));
  EXPECT_NE(x, generate_batch(sc, 32, ModalityNoise{}, c));
}

TEST(GenerateBatch, AdviceMarksTheTarget) {
  const auto sc = builtin_scenario("scenario2");
  Rng rng(9);
  const auto b = generate_batch(sc, 200, ModalityNoise{}, rng);
  ASSERT_EQ(b.size(), 200u);
  EXPECT_EQ(b.modalities(), 3u);
  EXPECT_EQ(b.intentions(), 10u);
  for (const auto& x : b) {
    ASSERT_TRUE(x.meta.true_index.has_value());
    EXPECT_EQ(argmax_tiebreak(x.advice), *x.meta.true_index);
    EXPECT_EQ(x.meta.scenario, "scenario2");
  }
}

TEST(GenerateBatch, EmittedDistributionsAreValid) {
  Rng rng(10);
  for (const char* name : {"scenario1", "scenario2"}) {
    const auto b = generate_batch(builtin_scenario(name), 300, ModalityNoise{}, rng);
    for (const auto& x : b) {
      for (const auto& d : x.bases) {
        double total = 0.0;
        for (double p : d) {
          EXPECT_GE(p, 0.5 * kDefaultFloor);
          total += p;
        }
        EXPECT_NEAR(total, 1.0, 1e-9);
      }
    }
  }
}

TEST(GenerateBatch, ScriptedTargets) {
  const auto sc = builtin_scenario("scenario1");
  const std::vector<std::size_t> order = {5, 0, 3, 3, 1};
  Rng rng(2);
  const auto b = generate_batch(sc, order, ModalityNoise{}, rng);
  ASSERT_EQ(b.size(), order.size());
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(b[i].true_index(), order[i]);
}

TEST(GenerateBatch, ModalityCountFollowsScene) {
  auto sc = builtin_scenario("scenario2");
  for (std::size_t k = 1; k <= 3; ++k) {
    sc.modalities = k;
    Rng rng(1);
    EXPECT_EQ(generate_batch(sc, 4, ModalityNoise{}, rng).modalities(), k);
  }
}

TEST(GenerateBatch, Errors) {
  const auto sc = builtin_scenario("scenario2");
  Rng rng(1);
  EXPECT_THROW(generate_batch(sc, 0, ModalityNoise{}, rng), InvalidConfig);
  EXPECT_THROW(generate_batch(sc, std::vector<std::size_t>{}, ModalityNoise{}, rng), InvalidConfig);
  EXPECT_THROW(generate_batch(sc, std::vector<std::size_t>{10}, ModalityNoise{}, rng), IndexError);
  EXPECT_THROW(sample_speech(sc, 10, ModalityNoise{}, rng), IndexError);
  EXPECT_THROW(sample_gesture(sc, 10, ModalityNoise{}, rng), IndexError);
  EXPECT_THROW(sample_gaze(sc, 10, ModalityNoise{}, rng), IndexError);
}

// Grid search over {sum = 3, w_i >= 0.1} with step 0.01.
std::vector<double> grid_argmin(const Batch& b) {
  double best = INFINITY;
  std::vector<double> arg;
  for (int i = 10; i <= 280; ++i) {
    for (int j = 10; i + j <= 290; ++j) {
      const std::vector<double> w = {0.01 * i, 0.01 * j, 3.0 - 0.01 * i - 0.01 * j};
      const double v = batch_loss(b, ConfidenceVector(w));
      if (v < best) {
        best = v;
        arg = w;
      }
    }
  }
  return arg;
}

TEST(GenerateBatch, LearnedOrderingMatchesGridOracle) {
  Rng rng(7);
  const auto b = generate_batch(builtin_scenario("scenario2"), 32, ModalityNoise{}, rng);
  const auto oracle = grid_argmin(b);
  EXPECT_GT(oracle[kGaze], oracle[kGesture]);
  EXPECT_GT(oracle[kGesture], oracle[kSpeech]);
  const auto r = learn(b, LearnConfig::defaults(PoolKind::EIOP, 3));
  EXPECT_GT(r.w_hat[kGaze], r.w_hat[kGesture]);
  EXPECT_GT(r.w_hat[kGesture], r.w_hat[kSpeech]);
}

// --- noise and scene validation ---------------------------------------------

TEST(ModalityNoise, DefaultsAreValid) {
  EXPECT_NO_THROW(ModalityNoise{}.validate(5));
  const auto m = ModalityNoise::adjacent_confusion(5, 0.9);
  for (const auto& row : m) EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(m[0][1], 0.1);
  EXPECT_DOUBLE_EQ(m[2][1], 0.05);
  EXPECT_EQ(ModalityNoise::adjacent_confusion(1, 0.5)[0][0], 1.0);
}

TEST(ModalityNoise, RejectsBadSettings) {
  auto bad = [](auto mutate) {
    ModalityNoise n;
    mutate(n);
    return n;
  };
  EXPECT_THROW(bad([](ModalityNoise& n) { n.speech_confusion = 1.5; }).validate(5), InvalidConfig);
  EXPECT_THROW(bad([](ModalityNoise& n) { n.speech_confidence_min = 0.9; }).validate(5),
               InvalidConfig);
  EXPECT_THROW(bad([](ModalityNoise& n) { n.speech_miss_confidence_max = 0.1; }).validate(5),
               InvalidConfig);
  EXPECT_THROW(bad([](ModalityNoise& n) { n.gesture_confusion[0][0] = 0.5; }).validate(5),
               InvalidConfig);
  EXPECT_THROW(ModalityNoise{}.validate(4), InvalidConfig);
  EXPECT_THROW(bad([](ModalityNoise& n) { n.gesture_peak = 0.9; }).validate(5), InvalidConfig);
  EXPECT_THROW(bad([](ModalityNoise& n) { n.gaze_sigma = {0.01, 0.1, 0.1}; }).validate(5),
               InvalidConfig);
  EXPECT_THROW(bad([](ModalityNoise& n) { n.gaze_fixation_scale = -1.0; }).validate(5),
               InvalidConfig);
}

TEST(Scenario, BuiltinShapes) {
  const auto s1 = builtin_scenario("scenario1");
  EXPECT_EQ(s1.size(), 6u);
  EXPECT_EQ(s1.category_count(), 5u);
  EXPECT_EQ(s1.objects_in_bin(1), 2u);
  EXPECT_NO_THROW(s1.validate());

  const auto s2 = builtin_scenario("scenario2");
  EXPECT_EQ(s2.size(), 10u);
  EXPECT_EQ(s2.category_count(), 5u);
  std::size_t multi = 0;
  for (std::size_t b = 0; b < 5; ++b) multi += s2.objects_in_bin(b) > 1 ? 1 : 0;
  EXPECT_GE(multi, 2u);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_GE(s2.objects_in_category(c), 2u);
    EXPECT_LE(s2.objects_in_category(c), 3u);
  }
  EXPECT_NO_THROW(s2.validate());
  EXPECT_THROW(builtin_scenario("scenario3"), InvalidConfig);
}

TEST(Scenario, BinsFollowBearing) {
  const double pi = std::acos(-1.0);
  for (const char* name : {"scenario1", "scenario2"}) {
    for (const auto& o : builtin_scenario(name).objects) {
      const double bearing = std::atan2(o.position.y, o.position.x);
      EXPECT_EQ(static_cast<std::size_t>(bearing / (pi / 5.0)), o.direction) << name << " " << o.id;
    }
  }
}

TEST(Scenario, ValidateRejectsBadScenes) {
  auto sc = builtin_scenario("scenario1");
  sc.objects.resize(1);
  EXPECT_THROW(sc.validate(), InvalidConfig);
  sc = builtin_scenario("scenario1");
  sc.objects[2].direction = 5;
  EXPECT_THROW(sc.validate(), InvalidConfig);
  sc = builtin_scenario("scenario1");
  sc.objects[2].id = 7;
  EXPECT_THROW(sc.validate(), InvalidConfig);
  sc = builtin_scenario("scenario1");
  sc.objects[2].position.x = NAN;
  EXPECT_THROW(sc.validate(), InvalidConfig);
  sc = builtin_scenario("scenario1");
  sc.modalities = 4;
  EXPECT_THROW(sc.validate(), InvalidConfig);
}

// --- scene files ------------------------------------------------------------

TEST(SceneFile, RoundTrip) {
  const auto sc = builtin_scenario("scenario2");
  std::stringstream buf;
  write_scene(buf, sc);
  const auto back = parse_scene(buf, "scenario2");
  EXPECT_EQ(back.objects, sc.objects);
}

TEST(SceneFile, ToleratesSpacesAndBlankLines) {
  std::istringstream in("id, category, direction_bin, x, y\n\n0, 1, 2, 0.5, -0.25\r\n1,0,4,1e-1,2\n");
  const auto sc = parse_scene(in, "s");
  ASSERT_EQ(sc.size(), 2u);
  EXPECT_EQ(sc.objects[0].category, 1u);
  EXPECT_EQ(sc.objects[0].direction, 2u);
  EXPECT_DOUBLE_EQ(sc.objects[0].position.y, -0.25);
  EXPECT_DOUBLE_EQ(sc.objects[1].position.x, 0.1);
}

std::size_t error_line(const std::string& text) {
  std::istringstream in(text);
  try {
    parse_scene(in, "s");
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

TEST(SceneFile, ReportsLineOfError) {
  const std::string header = "id,category,direction_bin,x,y\n";
  EXPECT_EQ(error_line("0,0,0,0,0\n"), 1u);
  EXPECT_EQ(error_line(header + "0,0,0,0,0\n1,0,0,0\n"), 3u);
  EXPECT_EQ(error_line(header + "0,0,0,0,0\n1,x,0,0,0\n"), 3u);
  EXPECT_EQ(error_line(header + "0,0,5,0,0\n1,0,0,0,0\n"), 2u);
  EXPECT_EQ(error_line(header + "0,0,0,0,0\n2,0,0,0,0\n"), 3u);
  EXPECT_EQ(error_line(header + "0,0,0,0,0\n1,0,0,inf,0\n"), 3u);
  EXPECT_EQ(error_line(header + "0,0,0,0,0\n1,0,0,0.5x,0\n"), 3u);
  EXPECT_EQ(error_line(header + "0,0,0,0,0\n"), 3u);
  EXPECT_EQ(error_line(""), 1u);
}

TEST(SceneFile, MissingFile) {
  EXPECT_THROW(load_scene("/nonexistent/scene.csv"), IoError);
}

// --- random source ----------------------------------------------------------

TEST(Rng, SeedReplaysStream) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(a.uniform(), b.uniform());
    EXPECT_EQ(a.normal(), b.normal());
    EXPECT_EQ(a.index(7), b.index(7));
  }
  Rng c(43);
  EXPECT_NE(Rng(42).uniform(), c.uniform());
}

TEST(Rng, SplitDoesNotAdvanceParent) {
  Rng parent(5);
  Rng fresh(5);
  const double first = parent.split(1).uniform();
  EXPECT_EQ(parent.split(1).uniform(), first);
  EXPECT_NE(parent.split(2).uniform(), first);
  EXPECT_EQ(parent.uniform(), fresh.uniform());
}

TEST(Rng, MomentsAndRanges) {
  Rng rng(11);
  const int n = 200000;
  double su = 0.0;
  double sn = 0.0;
  double sn2 = 0.0;
  std::vector<int> counts(6, 0);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
    ++counts[rng.index(6)];
  }
  EXPECT_NEAR(su / n, 0.5, 0.005);
  EXPECT_NEAR(sn / n, 0.0, 0.01);
  EXPECT_NEAR(sn2 / n, 1.0, 0.02);
  for (int c : counts) EXPECT_NEAR(c / static_cast<double>(n), 1.0 / 6.0, 0.005);
}

TEST(Rng, CategoricalFollowsWeights) {
  Rng rng(12);
  const std::vector<double> w = {1.0, 0.0, 3.0};
  std::vector<int> counts(3, 0);
  for (int i = 0; i < 40000; ++i) ++counts[rng.categorical(w)];
  EXPECT_EQ(counts[1], 0);
  EXPECT_NEAR(counts[2] / 40000.0, 0.75, 0.01);
  EXPECT_THROW(rng.categorical(std::vector<double>{0.0, 0.0}), InvalidConfig);
  EXPECT_THROW(rng.index(0), InvalidConfig);
}

}  // namespace
}  // namespace confpool::sim
