#include "smsl/detector.hpp"

namespace smsl {

namespace {

void require_same(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw ConfigError(std::string(what) + ": shape mismatch");
}

PassSummary summarize(std::uint64_t seed, const SolveResult& r) {
  PassSummary p;
  p.seed = seed;
  p.converged = r.converged;
  p.iterations = r.iterations_run;
  if (!r.residual_history().empty()) p.final_residuals = r.residual_history().back().residuals;
  p.history = r.residual_history();
  return p;
}

Vector run_pass(const ViewSet& views, const Matrix& h, const SolverConfig& cfg, std::uint64_t seed,
                std::vector<PassSummary>& passes) {
  const Problem problem(views.flattened(), h);
  SolveResult r;
  try {
    r = solve(problem, cfg);
  } catch (const SolverError& e) {
    throw SolverError(e.iteration(), e.variable(),
                      std::string(e.what()) + " (sketch seed " + std::to_string(seed) + ")");
  }
  passes.push_back(summarize(seed, r));
  return score_multiview(h, r.state.d, r.state.e);
}

}  // namespace

Matrix specific_part(const Matrix& h, const Matrix& d) {
  if (h.cols() != d.rows()) throw ConfigError("specific_part: shape mismatch");
  return h * d;
}

Vector score_pair(const Matrix& h, const Matrix& d1, const Matrix& d2, const Matrix& e1,
                  const Matrix& e2) {
  require_same(d1, d2, "score_pair");
  require_same(e1, e2, "score_pair");
  if (d1.cols() != e1.cols() || h.rows() != e1.rows())
    throw ConfigError("score_pair: shape mismatch");
  const Matrix specific = specific_part(h, d2 - d1);
  return (specific.colwise().norm() + (e2 - e1).colwise().norm()).transpose();
}

Vector score_multiview(const Matrix& h, const std::vector<Matrix>& d, const std::vector<Matrix>& e) {
  if (d.size() < 2 || d.size() != e.size())
    throw ConfigError("score_multiview: need at least two views with matching D and E lists");
  Vector total = score_pair(h, d[0], d[1], e[0], e[1]);
  for (std::size_t s = 1; s + 1 < d.size(); ++s) total += score_pair(h, d[s], d[s + 1], e[s], e[s + 1]);
  return total;
}

DetectionReport detect_with_seeds(const ViewSet& views, const DetectorConfig& cfg,
                                  const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("no sketch seeds");
  cfg.sketch.validate(static_cast<long>(views.size()) * views.pixels());
  cfg.solver.validate();
  const auto x = views.flattened();
  DetectionReport report;
  Vector sum = Vector::Zero(views.pixels());
  for (auto seed : seeds) sum += run_pass(views, sketch_views(x, cfg.sketch.n_h, seed), cfg.solver, seed, report.passes);
  report.map = make_detection_map(sum / static_cast<double>(seeds.size()), views.height(), views.width());
  return report;
}

DetectionReport detect_with_report(const ViewSet& views, const DetectorConfig& cfg) {
  cfg.solver.validate();
  if (cfg.sketch.average_mode == AverageMode::kScores) {
    std::vector<std::uint64_t> seeds;
    for (int j = 0; j < cfg.sketch.repeats; ++j) seeds.push_back(repeat_seed(cfg.sketch.seed, j));
    return detect_with_seeds(views, cfg, seeds);
  }
  const auto dict = build_dictionary(views, cfg.sketch);
  DetectionReport report;
  const Vector scores = run_pass(views, dict.h, cfg.solver, cfg.sketch.seed, report.passes);
  report.map = make_detection_map(scores, views.height(), views.width());
  return report;
}

DetectionMap detect(const ViewSet& views, const DetectorConfig& cfg) {
  return detect_with_report(views, cfg).map;
}

}  // namespace smsl
