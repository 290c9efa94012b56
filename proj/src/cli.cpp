#include "smsl/cli.hpp"

#include "smsl/baselines.hpp"
#include "smsl/detector.hpp"
#include "smsl/eval.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

namespace smsl::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Resolved record of one command, written next to its outputs. `args` is the
/// fully explicit argument list that `smsl replay` re-executes.
struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  json parameters = json::object();
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  double wall_seconds = 0.0;
  json convergence = json::array();

  json to_json() const {
    return {{"format", "smsl-manifest"}, {"version", 1},         {"command", command},
            {"args", args},              {"parameters", parameters}, {"seeds", seeds},
            {"inputs", inputs},          {"outputs", outputs},   {"wall_seconds", wall_seconds},
            {"convergence", convergence}};
  }

  void write(const fs::path& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest " + path.string());
    out << std::setw(2) << to_json() << '\n';
  }
};

fs::path manifest_path_for(const std::string& explicit_path, const std::string& output) {
  return explicit_path.empty() ? fs::path(output + ".manifest.json") : fs::path(explicit_path);
}

ViewSet load_views(const std::vector<std::string>& paths) {
  std::vector<HyperCube> cubes;
  for (const auto& p : paths) cubes.push_back(load_cube(p));
  try {
    return ViewSet(std::move(cubes));
  } catch (const ConfigError& e) {
    throw DataError(e.what());
  }
}

json pass_json(const PassSummary& p) {
  return {{"seed", p.seed},
          {"converged", p.converged},
          {"iterations", p.iterations},
          {"final_residuals",
           {p.final_residuals.reconstruction, p.final_residuals.error_split,
            p.final_residuals.sum_to_one, p.final_residuals.consensus}}};
}

struct DetectorOptions {
  DetectorConfig cfg;
  std::string average = "dictionary";
  std::uint64_t seed = 0;

  void add(CLI::App* app) {
    app->add_option("--lambda1", cfg.solver.lambda1, "Nuclear-norm weight on C")->capture_default_str();
    app->add_option("--lambda2", cfg.solver.lambda2, "Frobenius weight on D^s")->capture_default_str();
    app->add_option("--lambda3", cfg.solver.lambda3, "Exclusivity weight between D^s")->capture_default_str();
    app->add_option("--sketch-size", cfg.sketch.n_h, "Dictionary size N_H")->capture_default_str();
    app->add_option("--sketch-repeats", cfg.sketch.repeats, "Number of sketch draws")->capture_default_str();
    app->add_option("--sketch-average", average, "dictionary|scores")
        ->check(CLI::IsMember({"dictionary", "scores"}))
        ->capture_default_str();
    app->add_option("--seed", seed, "Sketch RNG seed")->capture_default_str();
    app->add_option("--max-iter", cfg.solver.max_iter, "ALM iteration cap")->capture_default_str();
    app->add_option("--eps", cfg.solver.epsilon, "Convergence tolerance")->capture_default_str();
    app->add_option("--mu0", cfg.solver.mu0, "Initial penalty")->capture_default_str();
    app->add_option("--mu-max", cfg.solver.mu_max, "Penalty cap")->capture_default_str();
    app->add_option("--rho", cfg.solver.rho, "Penalty growth factor")->capture_default_str();
  }

  DetectorConfig resolve() {
    cfg.sketch.seed = seed;
    cfg.sketch.average_mode = parse_average_mode(average);
    cfg.solver.validate();
    if (cfg.sketch.n_h < 1) throw ConfigError("sketch size must be >= 1");
    if (cfg.sketch.repeats < 1) throw ConfigError("sketch repeats must be >= 1");
    return cfg;
  }

  std::vector<std::string> args() const {
    const auto& s = cfg.solver;
    return {"--lambda1",     fmt(s.lambda1),     "--lambda2",        fmt(s.lambda2),
            "--lambda3",     fmt(s.lambda3),     "--sketch-size",    std::to_string(cfg.sketch.n_h),
            "--sketch-repeats", std::to_string(cfg.sketch.repeats), "--sketch-average", average,
            "--seed",        std::to_string(seed), "--max-iter",     std::to_string(s.max_iter),
            "--eps",         fmt(s.epsilon),     "--mu0",            fmt(s.mu0),
            "--mu-max",      fmt(s.mu_max),      "--rho",            fmt(s.rho)};
  }

  json parameters() const {
    const auto& s = cfg.solver;
    return {{"lambda1", s.lambda1},        {"lambda2", s.lambda2},
            {"lambda3", s.lambda3},        {"sketch_size", cfg.sketch.n_h},
            {"sketch_repeats", cfg.sketch.repeats}, {"sketch_average", average},
            {"seed", seed},                {"max_iter", s.max_iter},
            {"epsilon", s.epsilon},        {"mu0", s.mu0},
            {"mu_max", s.mu_max},          {"rho", s.rho}};
  }
};

std::vector<std::uint64_t> pass_seeds(const DetectorConfig& cfg) {
  std::vector<std::uint64_t> seeds;
  for (int j = 0; j < cfg.sketch.repeats; ++j) seeds.push_back(repeat_seed(cfg.sketch.seed, j));
  return seeds;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Anomalous change detection in multi-temporal hyperspectral cubes",
               "smsl"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  // detect
  auto* detect_cmd = app.add_subcommand("detect", "Score anomalous changes with SMSL");
  std::vector<std::string> detect_cubes;
  std::string detect_out, detect_manifest, detect_trace, detect_heatmap;
  DetectorOptions detect_opts;
  detect_cmd->add_option("cubes", detect_cubes, "Cube headers, one per view (>= 2)")->required()->expected(2, -1);
  detect_cmd->add_option("-o,--out", detect_out, "Output score header")->required();
  detect_cmd->add_option("--manifest", detect_manifest, "Manifest path (default <out>.manifest.json)");
  detect_cmd->add_option("--trace", detect_trace, "Per-iteration residual CSV");
  detect_cmd->add_option("--heatmap", detect_heatmap, "Min-max normalized PGM rendering");
  detect_opts.add(detect_cmd);

  // baseline
  auto* baseline_cmd = app.add_subcommand("baseline", "Score changes with a classical detector");
  std::vector<std::string> baseline_cubes;
  std::string baseline_method, baseline_out, baseline_manifest, baseline_heatmap;
  std::optional<double> baseline_ridge;
  baseline_cmd->add_option("cubes", baseline_cubes, "Two cube headers")->required()->expected(2);
  baseline_cmd->add_option("--method", baseline_method, "rx|cc|ce")->required();
  baseline_cmd->add_option("--ridge", baseline_ridge, "Diagonal loading (default 1e-6*trace/L)");
  baseline_cmd->add_option("-o,--out", baseline_out, "Output score header")->required();
  baseline_cmd->add_option("--manifest", baseline_manifest, "Manifest path");
  baseline_cmd->add_option("--heatmap", baseline_heatmap, "Min-max normalized PGM rendering");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "ROC/AUC of a score map against a mask");
  std::string eval_scores, eval_mask, eval_roc;
  eval_cmd->add_option("--scores", eval_scores, "Score header")->required();
  eval_cmd->add_option("--mask", eval_mask, "Binary PGM mask")->required();
  eval_cmd->add_option("--roc-out", eval_roc, "ROC points CSV");

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic multi-temporal scene");
  eval::SynthSpec synth_spec;
  std::string synth_dir, synth_manifest;
  synth_cmd->add_option("--out-dir", synth_dir, "Output directory")->required();
  synth_cmd->add_option("--height", synth_spec.height)->capture_default_str();
  synth_cmd->add_option("--width", synth_spec.width)->capture_default_str();
  synth_cmd->add_option("--bands", synth_spec.bands)->capture_default_str();
  synth_cmd->add_option("--views", synth_spec.views)->capture_default_str();
  synth_cmd->add_option("--endmembers", synth_spec.n_endmembers)->capture_default_str();
  synth_cmd->add_option("--anomalies", synth_spec.n_anomalies)->capture_default_str();
  synth_cmd->add_option("--magnitude", synth_spec.anomaly_magnitude)->capture_default_str();
  synth_cmd->add_option("--noise", synth_spec.noise_sigma)->capture_default_str();
  synth_cmd->add_option("--gain-spread", synth_spec.gain_spread)->capture_default_str();
  synth_cmd->add_option("--anomaly-view", synth_spec.anomaly_view, "0-based view receiving anomalies")
      ->capture_default_str();
  synth_cmd->add_option("--seed", synth_spec.seed)->capture_default_str();
  synth_cmd->add_option("--manifest", synth_manifest, "Manifest path (default <out-dir>/manifest.json)");

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "AUC over a parameter grid");
  std::vector<std::string> sweep_cubes;
  std::string sweep_mask, sweep_grid, sweep_out, sweep_manifest;
  int sweep_jobs = 1;
  DetectorOptions sweep_opts;
  sweep_cmd->add_option("cubes", sweep_cubes, "Cube headers, one per view (>= 2)")->required()->expected(2, -1);
  sweep_cmd->add_option("--mask", sweep_mask, "Binary PGM mask")->required();
  sweep_cmd->add_option("--grid", sweep_grid, "e.g. \"lambda2=0.1,1,10;lambda3=0.1,1,10\"")->required();
  sweep_cmd->add_option("-o,--out", sweep_out, "Output CSV")->required();
  sweep_cmd->add_option("--manifest", sweep_manifest, "Manifest path");
  sweep_cmd->add_option("--jobs", sweep_jobs, "Concurrent grid points")->capture_default_str();
  sweep_opts.add(sweep_cmd);

  // replay
  auto* replay_cmd = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  std::string replay_manifest, replay_out;
  replay_cmd->add_option("manifest", replay_manifest, "Manifest JSON")->required();
  replay_cmd->add_option("-o,--out", replay_out,
                         "Redirect the primary output (--out, or --out-dir for synth)");

  std::vector<const char*> cargv;
  for (const auto& a : argv) cargv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(cargv.size()), cargv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "smsl: " << e.what() << "\n";
    return kUsageError;
  }

  const auto t0 = Clock::now();
  try {
    if (detect_cmd->parsed()) {
      const auto cfg = detect_opts.resolve();
      const auto views = load_views(detect_cubes);
      const auto report = detect_with_report(views, cfg);
      save_scores(report.map, detect_out);

      RunManifest m;
      m.command = "detect";
      m.args = {"detect"};
      m.args.insert(m.args.end(), detect_cubes.begin(), detect_cubes.end());
      m.args.insert(m.args.end(), {"--out", detect_out});
      auto opt_args = detect_opts.args();
      m.args.insert(m.args.end(), opt_args.begin(), opt_args.end());
      m.parameters = detect_opts.parameters();
      m.seeds = pass_seeds(cfg);
      m.inputs = detect_cubes;
      m.outputs = {detect_out};
      if (!detect_trace.empty()) {
        std::ofstream trace(detect_trace, std::ios::trunc);
        if (!trace) throw DataError("cannot write " + detect_trace);
        write_residual_csv(trace, report.passes.front().history);
        m.args.insert(m.args.end(), {"--trace", detect_trace});
        m.outputs.push_back(detect_trace);
      }
      if (!detect_heatmap.empty()) {
        save_heatmap(report.map, detect_heatmap);
        m.args.insert(m.args.end(), {"--heatmap", detect_heatmap});
        m.outputs.push_back(detect_heatmap);
      }
      for (const auto& p : report.passes) m.convergence.push_back(pass_json(p));
      m.wall_seconds = seconds_since(t0);
      m.write(manifest_path_for(detect_manifest, detect_out));
      return kOk;
    }

    if (baseline_cmd->parsed()) {
      const auto views = load_views(baseline_cubes);
      const auto map = baselines::run(baseline_method, views, baseline_ridge);
      save_scores(map, baseline_out);
      RunManifest m;
      m.command = "baseline";
      m.args = {"baseline", baseline_cubes[0], baseline_cubes[1], "--method", baseline_method,
                "--out", baseline_out};
      m.parameters = {{"method", baseline_method}};
      if (baseline_ridge) {
        m.args.insert(m.args.end(), {"--ridge", fmt(*baseline_ridge)});
        m.parameters["ridge"] = *baseline_ridge;
      } else {
        m.parameters["ridge"] = "auto";
      }
      m.inputs = baseline_cubes;
      m.outputs = {baseline_out};
      if (!baseline_heatmap.empty()) {
        save_heatmap(map, baseline_heatmap);
        m.args.insert(m.args.end(), {"--heatmap", baseline_heatmap});
        m.outputs.push_back(baseline_heatmap);
      }
      m.wall_seconds = seconds_since(t0);
      m.write(manifest_path_for(baseline_manifest, baseline_out));
      return kOk;
    }

    if (eval_cmd->parsed()) {
      const auto scores = load_scores(eval_scores);
      const auto mask = load_mask(eval_mask);
      const auto curve = eval::roc(scores, mask);
      if (!eval_roc.empty()) {
        std::ofstream csv(eval_roc, std::ios::trunc);
        if (!csv) throw DataError("cannot write " + eval_roc);
        eval::write_roc_csv(csv, curve);
      }
      char line[64];
      std::snprintf(line, sizeof line, "auc=%.6f", curve.auc);
      out << line << "\n";
      return kOk;
    }

    if (synth_cmd->parsed()) {
      synth_spec.validate();
      const auto scene = eval::synth_scene(synth_spec);
      fs::create_directories(synth_dir);
      RunManifest m;
      m.command = "synth";
      for (int s = 0; s < scene.views.size(); ++s) {
        const auto path = (fs::path(synth_dir) / ("view" + std::to_string(s + 1) + ".hdr")).string();
        save_cube(scene.views[s], path);
        m.outputs.push_back(path);
      }
      const auto mask_path = (fs::path(synth_dir) / "mask.pgm").string();
      save_mask(scene.mask, mask_path);
      m.outputs.push_back(mask_path);
      const auto& sp = synth_spec;
      m.args = {"synth",          "--out-dir",   synth_dir,
                "--height",       std::to_string(sp.height),       "--width",
                std::to_string(sp.width),        "--bands",       std::to_string(sp.bands),
                "--views",        std::to_string(sp.views),        "--endmembers",
                std::to_string(sp.n_endmembers), "--anomalies",   std::to_string(sp.n_anomalies),
                "--magnitude",    fmt(sp.anomaly_magnitude),       "--noise",
                fmt(sp.noise_sigma),             "--gain-spread", fmt(sp.gain_spread),
                "--anomaly-view", std::to_string(sp.anomaly_view), "--seed",
                std::to_string(sp.seed)};
      m.parameters = {{"height", sp.height},          {"width", sp.width},
                      {"bands", sp.bands},            {"views", sp.views},
                      {"endmembers", sp.n_endmembers}, {"anomalies", sp.n_anomalies},
                      {"magnitude", sp.anomaly_magnitude}, {"noise", sp.noise_sigma},
                      {"gain_spread", sp.gain_spread}, {"anomaly_view", sp.anomaly_view}};
      m.seeds = {sp.seed};
      m.wall_seconds = seconds_since(t0);
      m.write(synth_manifest.empty() ? fs::path(synth_dir) / "manifest.json" : fs::path(synth_manifest));
      return kOk;
    }

    if (sweep_cmd->parsed()) {
      const auto grid = eval::parse_grid(sweep_grid);
      const auto cfg = sweep_opts.resolve();
      if (sweep_jobs < 1) throw ConfigError("--jobs must be >= 1");
      const auto views = load_views(sweep_cubes);
      const auto mask = load_mask(sweep_mask);
      const auto table = eval::sweep(views, mask, cfg, grid, sweep_jobs);
      {
        std::ofstream csv(sweep_out, std::ios::trunc);
        if (!csv) throw DataError("cannot write " + sweep_out);
        eval::write_sweep_csv(csv, table);
      }
      RunManifest m;
      m.command = "sweep";
      m.args = {"sweep"};
      m.args.insert(m.args.end(), sweep_cubes.begin(), sweep_cubes.end());
      m.args.insert(m.args.end(), {"--mask", sweep_mask, "--grid", sweep_grid, "--out", sweep_out,
                                   "--jobs", std::to_string(sweep_jobs)});
      auto opt_args = sweep_opts.args();
      m.args.insert(m.args.end(), opt_args.begin(), opt_args.end());
      m.parameters = sweep_opts.parameters();
      m.parameters["grid"] = sweep_grid;
      m.seeds = pass_seeds(cfg);
      m.inputs = sweep_cubes;
      m.inputs.push_back(sweep_mask);
      m.outputs = {sweep_out};
      m.wall_seconds = seconds_since(t0);
      m.write(manifest_path_for(sweep_manifest, sweep_out));
      return kOk;
    }

    if (replay_cmd->parsed()) {
      std::ifstream in(replay_manifest);
      if (!in) throw DataError("cannot open manifest " + replay_manifest);
      json j;
      try {
        in >> j;
      } catch (const json::exception& e) {
        throw DataError(replay_manifest + ": " + e.what());
      }
      if (j.value("format", "") != "smsl-manifest" || !j.contains("args"))
        throw DataError(replay_manifest + ": not an smsl manifest");
      std::vector<std::string> args{"smsl"};
      for (const auto& a : j["args"]) args.push_back(a.get<std::string>());
      if (!replay_out.empty()) {
        const std::string flag = j["command"] == "synth" ? "--out-dir" : "--out";
        for (std::size_t i = 1; i + 1 < args.size(); ++i)
          if (args[i] == flag) args[i + 1] = replay_out;
      }
      return run(args, out, err);
    }
  } catch (const ConfigError& e) {
    err << "smsl: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "smsl: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace smsl::cli
