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

// Command-line front end. Every subcommand writes its data files plus one
// appended line in <out-dir>/manifest.jsonl.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "confpool/confpool.hpp"

namespace confpool::cli {

inline constexpr std::string_view kToolVersion = "0.1.0";

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNotConverged = 3;
inline constexpr int kExitInsufficientData = 4;
inline constexpr int kExitFailure = 1;

inline constexpr std::string_view kExperienceFile = "experiences.jsonl";
inline constexpr std::string_view kConfidenceFile = "confidence.txt";
inline constexpr std::string_view kGapTraceFile = "gap_trace.csv";
inline constexpr std::string_view kConfidenceTraceFile = "confidence_trace.csv";
inline constexpr std::string_view kAblationFile = "ablation.csv";
inline constexpr std::string_view kCurveFile = "learning_curve.csv";
inline constexpr std::string_view kManifestFile = "manifest.jsonl";

/// Flags shared by the commands that run the learner. Unset values keep the
/// per-family defaults.
struct LearnFlags {
  std::string method = "EIOP";
  std::optional<double> eps;
  std::optional<double> rho;
  std::optional<double> eta;
  std::optional<double> b_bound;
  std::optional<std::size_t> max_rounds;
  std::optional<std::size_t> batch_required;
  double lower_bound = 0.1;
  std::string eg_sign = "+1";
  std::optional<std::size_t> inner_iters;
  std::optional<double> inner_tol;
  std::size_t minibatch = 0;
  std::string gap_mode = "averaged";
  bool bound_in_projection = false;
};

namespace detail {

namespace fs = std::filesystem;

inline EgSign parse_eg_sign(std::string_view s) {
  if (s == "+1" || s == "1" || s == "ascent") return EgSign::Ascent;
  if (s == "-1" || s == "descent") return EgSign::Descent;
  throw InvalidConfig("--eg-sign must be +1 or -1, got '" + std::string(s) + "'");
}

inline GapEstimateMode parse_gap_mode(std::string_view s) {
  if (s == "averaged") return GapEstimateMode::AveragedPoint;
  if (s == "running") return GapEstimateMode::RunningAverage;
  throw InvalidConfig("--gap-mode must be 'averaged' or 'running', got '" + std::string(s) + "'");
}

inline PoolKind learned_kind(std::string_view method) {
  const PoolKind kind = parse_pool_kind(method);
  if (kind == PoolKind::IOP) throw InvalidConfig("IOP has no learnable confidence; use EIOP or LogOP");
  return kind;
}

inline LearnConfig make_config(const LearnFlags& f, PoolKind kind, std::size_t k,
                               std::uint64_t seed) {
  auto cfg = LearnConfig::defaults(kind, k, f.lower_bound);
  cfg.spec.bound_in_projection = f.bound_in_projection;
  if (f.eps) cfg.eps_gap = *f.eps;
  if (f.rho) cfg.sgd_rate = *f.rho;
  if (f.eta) cfg.eg_rate = *f.eta;
  if (f.b_bound) cfg.b_bound = *f.b_bound;
  if (f.max_rounds) cfg.max_rounds = *f.max_rounds;
  if (f.batch_required) cfg.batch_required = *f.batch_required;
  if (f.inner_iters) cfg.inner_max_iters = *f.inner_iters;
  if (f.inner_tol) cfg.inner_tol = *f.inner_tol;
  cfg.minibatch_size = f.minibatch;
  cfg.eg_sign = parse_eg_sign(f.eg_sign);
  cfg.gap_mode = parse_gap_mode(f.gap_mode);
  cfg.seed = seed;
  cfg.validate();
  return cfg;
}

inline nlohmann::json config_json(const LearnConfig& cfg) {
  return {
      {"method", to_string(cfg.spec.kind)},
      {"modalities", cfg.spec.modalities},
      {"lower_bound", cfg.spec.lower_bound},
      {"bound_in_projection", cfg.spec.bound_in_projection},
      {"eps", cfg.eps_gap},
      {"rho", cfg.sgd_rate},
      {"eta", cfg.eg_rate},
      {"b_bound", cfg.b_bound},
      {"max_rounds", cfg.max_rounds},
      {"batch_required", cfg.batch_required},
      {"inner_iters", cfg.inner_max_iters},
      {"inner_tol", cfg.inner_tol},
      {"minibatch", cfg.minibatch_size},
      {"eg_sign", static_cast<int>(cfg.eg_sign)},
      {"gap_mode", cfg.gap_mode == GapEstimateMode::AveragedPoint ? "averaged" : "running"},
  };
}

inline fs::path prepare_dir(const std::string& dir) {
  fs::path p(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw IoError("cannot create output directory '" + dir + "'");
  return p;
}

inline std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

inline void finish_file(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

template <class Fn>
void write_file(const fs::path& path, Fn&& body) {
  auto out = open_out(path);
  body(out);
  finish_file(out, path);
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// Appends one run record; the file is never rewritten.
class Manifest {
 public:
  explicit Manifest(std::string command)
      : start_(std::chrono::steady_clock::now()) {
    record_["command"] = std::move(command);
    record_["tool_version"] = std::string(kToolVersion);
    record_["inputs"] = nlohmann::json::array();
    record_["outputs"] = nlohmann::json::array();
  }

  nlohmann::json& operator[](const char* key) { return record_[key]; }
  void input(const std::string& path) { record_["inputs"].push_back(path); }
  void output(const fs::path& path) { record_["outputs"].push_back(path.string()); }

  void append_to(const fs::path& dir) {
    record_["timestamp"] = utc_timestamp();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    record_["duration_s"] = dt.count();
    const auto path = dir / kManifestFile;
    auto out = open_out(path, std::ios::app);
    out << record_.dump() << '\n';
    finish_file(out, path);
  }

 private:
  nlohmann::json record_;
  std::chrono::steady_clock::time_point start_;
};

inline std::vector<double> parse_number_list(std::string_view text, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find_first_of(", \t", pos);
    if (end == std::string_view::npos) end = text.size();
    const auto tok = sim::detail::trim(text.substr(pos, end - pos));
    if (!tok.empty()) {
      const std::string s(tok);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != s.size()) throw InvalidConfig(std::string("bad number '") + s + "' in " + what);
      out.push_back(v);
    }
    pos = end + 1;
  }
  if (out.empty()) throw InvalidConfig(std::string("empty ") + what);
  return out;
}

/// Probabilities typed by hand may sum to one only up to rounding.
inline Categorical categorical_from_text(std::string_view text) {
  auto p = parse_number_list(text, "base distribution");
  double sum = 0.0;
  for (double v : p) sum += v;
  if (!std::isfinite(sum) || std::abs(sum - 1.0) > 1e-6) {
    throw InvalidDistribution("base distribution sums to " + io::format_double(sum));
  }
  for (double& v : p) v /= sum;
  return Categorical(std::move(p));
}

/// Bases given inline as rows separated by ';', or one row per line in a file.
inline std::vector<Categorical> parse_bases(const std::string& inline_text,
                                            const std::string& file) {
  std::vector<Categorical> bases;
  if (!file.empty()) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open '" + file + "'");
    std::string line;
    while (std::getline(in, line)) {
      if (sim::detail::trim(line).empty()) continue;
      bases.push_back(categorical_from_text(line));
    }
  } else {
    std::string_view rest = inline_text;
    while (!rest.empty()) {
      const auto cut = rest.find(';');
      const auto row = sim::detail::trim(rest.substr(0, cut));
      if (!row.empty()) bases.push_back(categorical_from_text(row));
      if (cut == std::string_view::npos) break;
      rest.remove_prefix(cut + 1);
    }
  }
  if (bases.empty()) throw InvalidConfig("no base distributions given");
  return bases;
}

inline sim::Scenario resolve_scene(const std::string& scene) {
  if (scene == "scenario1" || scene == "scenario2") return sim::builtin_scenario(scene);
  return sim::load_scene(scene);
}

inline void add_learn_flags(CLI::App* cmd, LearnFlags& f) {
  cmd->add_option("--method", f.method, "Learned pool: EIOP or LogOP")->capture_default_str();
  cmd->add_option("--eps", f.eps, "Primal-dual gap threshold (default 0.5)");
  cmd->add_option("--rho", f.rho, "Projected gradient step (default 0.1 EIOP, 0.01 LogOP)");
  cmd->add_option("--eta", f.eta, "Exponentiated-gradient rate (default 0.1)");
  cmd->add_option("--b-bound", f.b_bound, "Total dual mass B (default 30)");
  cmd->add_option("--max-rounds", f.max_rounds, "Maximum outer rounds (default 1000)");
  cmd->add_option("--batch-required", f.batch_required, "Records needed to learn (default 32)");
  cmd->add_option("--lower-bound", f.lower_bound, "Lower bound on each confidence")
      ->capture_default_str();
  cmd->add_option("--eg-sign", f.eg_sign, "Dual step direction: +1 ascent, -1 descent")
      ->capture_default_str();
  cmd->add_option("--inner-iters", f.inner_iters, "Inner gradient iterations (default 500)");
  cmd->add_option("--inner-tol", f.inner_tol, "Inner stopping tolerance (default 1e-6)");
  cmd->add_option("--minibatch", f.minibatch, "Records per inner step, 0 = full batch")
      ->capture_default_str();
  cmd->add_option("--gap-mode", f.gap_mode, "Upper gap estimate: averaged or running")
      ->capture_default_str();
  cmd->add_flag("--bound-in-projection", f.bound_in_projection,
                "Enforce the lower bound inside the projection");
}

}  // namespace detail

struct SimulateArgs {
  std::string scene = "scenario2";
  std::size_t count = 0;
  std::size_t modalities = sim::kModalityCount;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string out_file = std::string(kExperienceFile);
};

/// Generates a batch of simulated experiences.
inline int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  if (a.count == 0) throw InvalidConfig("-n must be at least 1");
  if (a.modalities < 1 || a.modalities > sim::kModalityCount) {
    throw InvalidConfig("--modalities must be 1, 2 or 3");
  }
  detail::Manifest manifest("simulate");
  auto sc = detail::resolve_scene(a.scene);
  sc.modalities = a.modalities;
  const auto dir = detail::prepare_dir(a.out_dir);

  Rng rng(a.seed);
  const auto batch = sim::generate_batch(sc, a.count, sim::ModalityNoise{}, rng);
  const auto path = dir / a.out_file;
  detail::write_file(path, [&](std::ostream& o) { io::write_experiences(o, batch); });

  manifest["seed"] = a.seed;
  manifest["config"] = {{"scene", a.scene}, {"n", a.count}, {"modalities", a.modalities}};
  if (a.scene != "scenario1" && a.scene != "scenario2") manifest.input(a.scene);
  manifest.output(path);
  manifest.append_to(dir);
  out << "wrote " << batch.size() << " records to " << path.string() << '\n';
  return kExitOk;
}

struct LearnArgs {
  std::string input;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  LearnFlags flags;
};

/// Learns confidence from an experience file. Returns kExitNotConverged,
/// with all outputs written, when the round budget runs out.
inline int cmd_learn(const LearnArgs& a, std::ostream& out) {
  detail::Manifest manifest("learn");
  const PoolKind kind = detail::learned_kind(a.flags.method);
  const auto batch = io::load_experiences(a.input);
  const auto cfg = detail::make_config(a.flags, kind, batch.modalities(), a.seed);
  const auto dir = detail::prepare_dir(a.out_dir);
  const auto result = learn(batch, cfg);

  const auto conf_path = dir / kConfidenceFile;
  const auto gap_path = dir / kGapTraceFile;
  const auto trace_path = dir / kConfidenceTraceFile;
  detail::write_file(conf_path, [&](std::ostream& o) { io::write_confidence(o, result.w_hat); });
  detail::write_file(gap_path, [&](std::ostream& o) { io::write_gap_trace(o, result.gap_trace); });
  detail::write_file(trace_path,
                     [&](std::ostream& o) { io::write_confidence_trace(o, result.w_trace); });

  manifest["seed"] = a.seed;
  manifest["config"] = detail::config_json(cfg);
  manifest["result"] = {{"rounds", result.rounds},
                        {"converged", result.converged},
                        {"final_gap", result.gap_trace.empty() ? 0.0 : result.gap_trace.back().gap}};
  manifest.input(a.input);
  for (const auto& p : {conf_path, gap_path, trace_path}) manifest.output(p);
  manifest.append_to(dir);

  out << to_string(kind) << " confidence:";
  for (double w : result.w_hat) out << ' ' << io::format_double(w);
  out << "\nrounds " << result.rounds << (result.converged ? ", converged" : ", not converged")
      << '\n';
  return result.converged ? kExitOk : kExitNotConverged;
}

struct FuseArgs {
  std::string bases;
  std::string bases_file;
  std::string weights;
  std::string method;
};

/// Prints the fused distribution, one probability per line.
inline int cmd_fuse(const FuseArgs& a, std::ostream& out) {
  const auto bases = detail::parse_bases(a.bases, a.bases_file);
  const std::size_t k = bases.size();
  std::optional<PoolKind> kind;
  if (!a.method.empty()) kind = parse_pool_kind(a.method);

  ConfidenceVector w = ConfidenceVector::ones(k);
  if (!a.weights.empty()) {
    w = ConfidenceVector(detail::parse_number_list(a.weights, "weights"));
  } else if (kind == PoolKind::LogOP) {
    w = ConfidenceVector::filled(k, 1.0 / static_cast<double>(k));
  }
  if (w.size() != k) {
    throw DimensionMismatch(std::to_string(w.size()) + " weights for " + std::to_string(k) +
                            " bases");
  }
  if (kind == PoolKind::IOP &&
      std::any_of(w.begin(), w.end(), [](double v) { return v != 1.0; })) {
    throw InvalidConfig("IOP weights are fixed at one");
  }
  const auto fused = fuse(bases, w);
  for (double p : fused) out << io::format_double(p) << '\n';
  return kExitOk;
}

struct EvaluateArgs {
  std::string input;
  std::string methods = "EIOP,LogOP";
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  LearnFlags flags;
};

/// Modality-subset ablation written as CSV.
inline int cmd_evaluate(const EvaluateArgs& a, std::ostream& out) {
  detail::Manifest manifest("evaluate");
  const auto data = io::load_experiences(a.input);

  std::vector<PoolKind> kinds;
  std::string_view rest = a.methods;
  while (!rest.empty()) {
    const auto cut = rest.find(',');
    const auto name = sim::detail::trim(rest.substr(0, cut));
    if (!name.empty()) kinds.push_back(parse_pool_kind(name));
    if (cut == std::string_view::npos) break;
    rest.remove_prefix(cut + 1);
  }
  const PoolKind base_kind = detail::learned_kind(a.flags.method);
  const auto cfg = detail::make_config(a.flags, base_kind, data.modalities(), a.seed);
  const auto dir = detail::prepare_dir(a.out_dir);
  const auto report = ablation(data, kinds, cfg);

  const auto path = dir / kAblationFile;
  detail::write_file(path, [&](std::ostream& o) { write_report_csv(o, report); });

  manifest["seed"] = a.seed;
  manifest["config"] = detail::config_json(cfg);
  manifest["config"]["methods"] = a.methods;
  manifest.input(a.input);
  manifest.output(path);
  manifest.append_to(dir);
  write_report_csv(out, report);
  return kExitOk;
}

struct CurveArgs {
  std::string input;
  std::size_t runs = 30;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  LearnFlags flags;
};

/// Learning curves over repeated runs with seeds seed, seed+1, ...: per-round
/// mean and 95% half-width of the averaged confidence and of the gap. Runs
/// that stop early hold their last value.
inline int cmd_curve(const CurveArgs& a, std::ostream& out) {
  if (a.runs < 1) throw InvalidConfig("--runs must be at least 1");
  detail::Manifest manifest("curve");
  const PoolKind kind = detail::learned_kind(a.flags.method);
  const auto batch = io::load_experiences(a.input);
  const auto base = detail::make_config(a.flags, kind, batch.modalities(), a.seed);
  const auto dir = detail::prepare_dir(a.out_dir);
  const std::size_t k = batch.modalities();

  std::vector<LearnResult> results;
  std::size_t longest = 0;
  std::size_t converged = 0;
  for (std::size_t r = 0; r < a.runs; ++r) {
    auto cfg = base;
    cfg.seed = a.seed + r;
    results.push_back(learn(batch, cfg));
    longest = std::max(longest, results.back().gap_trace.size());
    if (results.back().converged) ++converged;
  }

  const auto path = dir / kCurveFile;
  detail::write_file(path, [&](std::ostream& o) {
    o << "round,gap_mean,gap_ci95";
    for (std::size_t i = 1; i <= k; ++i) o << ",w_" << i << "_mean,w_" << i << "_ci95";
    o << '\n';
    const double n = static_cast<double>(results.size());
    auto column = [&](std::vector<double>& xs) {
      const auto s = summarize(xs);
      const double half = n > 1 ? 1.96 * s.std * std::sqrt(n / (n - 1.0)) / std::sqrt(n) : 0.0;
      o << ',' << io::format_double(s.mean) << ',' << io::format_double(half);
    };
    std::vector<double> xs(results.size());
    for (std::size_t t = 0; t < longest; ++t) {
      o << t + 1;
      for (std::size_t r = 0; r < results.size(); ++r) {
        const auto& trace = results[r].gap_trace;
        xs[r] = trace[std::min(t, trace.size() - 1)].gap;
      }
      column(xs);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t r = 0; r < results.size(); ++r) {
          const auto& trace = results[r].w_trace;
          xs[r] = trace[std::min(t, trace.size() - 1)][i];
        }
        column(xs);
      }
      o << '\n';
    }
  });

  manifest["seed"] = a.seed;
  manifest["config"] = detail::config_json(base);
  manifest["config"]["runs"] = a.runs;
  manifest["result"] = {{"converged_runs", converged}, {"longest_run", longest}};
  manifest.input(a.input);
  manifest.output(path);
  manifest.append_to(dir);
  out << converged << " of " << a.runs << " runs converged; wrote " << path.string() << '\n';
  return converged == a.runs ? kExitOk : kExitNotConverged;
}

/// Parses argv and dispatches. Library errors become exit codes with a
/// message on `err`.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Confidence-weighted opinion pools for multimodal intention recognition"};
  app.name("confpool");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "Generate simulated experiences");
  sim_cmd->add_option("--scene", sim_args.scene, "Builtin scenario name or scene CSV path")
      ->capture_default_str();
  sim_cmd->add_option("-n,--count", sim_args.count, "Number of records")->required();
  sim_cmd->add_option("--modalities", sim_args.modalities, "Modalities to emit (1-3)")
      ->capture_default_str();
  sim_cmd->add_option("--seed", sim_args.seed, "Random seed")->capture_default_str();
  sim_cmd->add_option("--out-dir", sim_args.out_dir, "Output directory")->capture_default_str();
  sim_cmd->add_option("--out-file", sim_args.out_file, "Experience file name")
      ->capture_default_str();

  LearnArgs learn_args;
  auto* learn_cmd = app.add_subcommand("learn", "Learn modality confidence from experiences");
  learn_cmd->add_option("--in", learn_args.input, "Experience file")->required();
  learn_cmd->add_option("--seed", learn_args.seed, "Random seed")->capture_default_str();
  learn_cmd->add_option("--out-dir", learn_args.out_dir, "Output directory")
      ->capture_default_str();
  detail::add_learn_flags(learn_cmd, learn_args.flags);

  FuseArgs fuse_args;
  auto* fuse_cmd = app.add_subcommand("fuse", "Fuse base distributions");
  auto* bases_opt =
      fuse_cmd->add_option("--bases", fuse_args.bases, "Rows separated by ';', e.g. 0.5,0.5;0.9,0.1");
  auto* file_opt = fuse_cmd->add_option("--bases-file", fuse_args.bases_file,
                                        "File with one base distribution per line");
  bases_opt->excludes(file_opt);
  fuse_cmd->add_option("--weights", fuse_args.weights, "Comma-separated confidence");
  fuse_cmd->add_option("--method", fuse_args.method, "IOP, LogOP or EIOP");

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "Modality-subset ablation report");
  eval_cmd->add_option("--in", eval_args.input, "Experience file")->required();
  eval_cmd->add_option("--methods", eval_args.methods, "Learned pools to compare")
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_args.seed, "Random seed")->capture_default_str();
  eval_cmd->add_option("--out-dir", eval_args.out_dir, "Output directory")->capture_default_str();
  detail::add_learn_flags(eval_cmd, eval_args.flags);

  CurveArgs curve_args;
  auto* curve_cmd = app.add_subcommand("curve", "Export learning curves over repeated runs");
  curve_cmd->add_option("--in", curve_args.input, "Experience file")->required();
  curve_cmd->add_option("--runs", curve_args.runs, "Number of runs")->capture_default_str();
  curve_cmd->add_option("--seed", curve_args.seed, "Seed of the first run")
      ->capture_default_str();
  curve_cmd->add_option("--out-dir", curve_args.out_dir, "Output directory")
      ->capture_default_str();
  detail::add_learn_flags(curve_cmd, curve_args.flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim_cmd) return cmd_simulate(sim_args, out);
    if (*learn_cmd) return cmd_learn(learn_args, out);
    if (*fuse_cmd) {
      if (fuse_args.bases.empty() && fuse_args.bases_file.empty()) {
        throw InvalidConfig("fuse needs --bases or --bases-file");
      }
      return cmd_fuse(fuse_args, out);
    }
    if (*eval_cmd) return cmd_evaluate(eval_args, out);
    if (*curve_cmd) return cmd_curve(curve_args, out);
  } catch (const InsufficientData& e) {
    err << "error: " << e.what() << '\n';
    return kExitInsufficientData;
  } catch (const NumericalFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace confpool::cli
