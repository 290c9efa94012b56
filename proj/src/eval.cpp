#include "smsl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

namespace smsl::eval {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * (1.0 / 9007199254740992.0);
}

// Unbiased integer in [0, n) by rejection; std::uniform_int_distribution is
// implementation-defined.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t") - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(item);
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

RocCurve roc(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
  if (scores.size() != labels.size()) throw DataError("score and mask sizes differ");
  long pos = 0;
  for (auto l : labels) pos += l ? 1 : 0;
  const long neg = static_cast<long>(labels.size()) - pos;
  if (pos == 0 || neg == 0)
    throw DataError("ROC needs at least one positive and one negative pixel");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  long tp = 0, fp = 0;
  // Twice the trapezoid area in (fp, tp) count units, exact for < 2^53.
  double area2 = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    long dtp = 0, dfp = 0;
    const double s = scores[order[i]];
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? dtp : dfp) += 1;
    area2 += static_cast<double>(dfp) * static_cast<double>(2 * tp + dtp);
    tp += dtp;
    fp += dfp;
    curve.points.push_back({static_cast<double>(fp) / neg, static_cast<double>(tp) / pos});
  }
  curve.auc = area2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
  return curve;
}

RocCurve roc(const DetectionMap& scores, const GroundTruthMask& mask) {
  validate_mask(mask, scores.height, scores.width);
  return roc(scores.scores, mask.labels);
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "fpr,tpr\n";
  const auto old = out.precision(17);
  for (const auto& p : curve.points) out << p.fpr << ',' << p.tpr << '\n';
  out.precision(old);
}

void SynthSpec::validate() const {
  if (height < 1 || width < 1 || bands < 1) throw ConfigError("synthetic scene dimensions must be positive");
  if (views < 2) throw ConfigError("synthetic scene needs at least two views");
  if (n_endmembers < 1) throw ConfigError("need at least one endmember");
  if (n_anomalies < 0 || n_anomalies >= height * width)
    throw ConfigError("anomaly count must be in [0, height*width)");
  if (!(anomaly_magnitude >= 0.0) || !(noise_sigma >= 0.0) || !(gain_spread >= 0.0))
    throw ConfigError("synthetic scales must be nonnegative");
  if (anomaly_view < 0 || anomaly_view >= views) throw ConfigError("anomaly view out of range");
}

SynthScene synth_scene(const SynthSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  GaussianStream noise(spec.seed ^ 0xD1B54A32D192ED03ULL);
  const int n = spec.height * spec.width;

  Matrix endmembers(spec.bands, spec.n_endmembers);
  for (int k = 0; k < spec.n_endmembers; ++k)
    for (int l = 0; l < spec.bands; ++l) endmembers(l, k) = uniform01(rng);

  // Dirichlet(1) abundances from normalized exponentials.
  Matrix abundances(spec.n_endmembers, n);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < spec.n_endmembers; ++k) abundances(k, i) = -std::log1p(-uniform01(rng));
    abundances.col(i) /= abundances.col(i).sum();
  }
  const Matrix background = endmembers * abundances;

  std::vector<Matrix> views;
  for (int s = 0; s < spec.views; ++s) {
    const double gain = 1.0 + spec.gain_spread * (2.0 * uniform01(rng) - 1.0);
    Matrix v = gain * background;
    if (spec.noise_sigma > 0.0)
      for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] += spec.noise_sigma * noise.next();
    views.push_back(std::move(v));
  }

  // Partial Fisher-Yates for distinct anomaly pixels.
  std::vector<int> pixels(static_cast<std::size_t>(n));
  std::iota(pixels.begin(), pixels.end(), 0);
  GroundTruthMask mask{spec.height, spec.width, std::vector<std::uint8_t>(static_cast<std::size_t>(n), 0)};
  auto& target = views[static_cast<std::size_t>(spec.anomaly_view)];
  for (int a = 0; a < spec.n_anomalies; ++a) {
    const auto j = a + static_cast<int>(uniform_index(rng, static_cast<std::uint64_t>(n - a)));
    std::swap(pixels[static_cast<std::size_t>(a)], pixels[static_cast<std::size_t>(j)]);
    const int p = pixels[static_cast<std::size_t>(a)];
    mask.labels[static_cast<std::size_t>(p)] = 1;
    for (int l = 0; l < spec.bands; ++l)
      target(l, p) += spec.anomaly_magnitude * (2.0 * uniform01(rng) - 1.0);
  }

  std::vector<HyperCube> cubes;
  for (const auto& v : views) cubes.push_back(HyperCube::from_matrix(v, spec.height, spec.width));
  return {ViewSet(std::move(cubes)), std::move(mask)};
}

const std::vector<std::string>& sweep_parameters() {
  static const std::vector<std::string> names = {
      "lambda1", "lambda2", "lambda3",  "mu0",          "mu_max",         "rho",
      "max_iter", "epsilon", "sketch_size", "sketch_repeats", "seed"};
  return names;
}

void apply_parameter(DetectorConfig& cfg, const std::string& name, double value) {
  auto as_int = [&](double v) {
    if (v != std::floor(v) || v < 0 || v > 2147483647.0)
      throw ConfigError("parameter " + name + " needs a nonnegative integer value");
    return static_cast<int>(v);
  };
  if (name == "lambda1") cfg.solver.lambda1 = value;
  else if (name == "lambda2") cfg.solver.lambda2 = value;
  else if (name == "lambda3") cfg.solver.lambda3 = value;
  else if (name == "mu0") cfg.solver.mu0 = value;
  else if (name == "mu_max") cfg.solver.mu_max = value;
  else if (name == "rho") cfg.solver.rho = value;
  else if (name == "max_iter") cfg.solver.max_iter = as_int(value);
  else if (name == "epsilon") cfg.solver.epsilon = value;
  else if (name == "sketch_size") cfg.sketch.n_h = as_int(value);
  else if (name == "sketch_repeats") cfg.sketch.repeats = as_int(value);
  else if (name == "seed") cfg.sketch.seed = static_cast<std::uint64_t>(as_int(value));
  else throw ConfigError("unknown sweep parameter '" + name + "'");
}

std::vector<GridAxis> parse_grid(const std::string& text) {
  std::vector<GridAxis> grid;
  if (trim(text).empty()) throw ConfigError("empty grid");
  for (const auto& part : split(text, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw ConfigError("grid axis '" + part + "' lacks '='");
    GridAxis axis{trim(part.substr(0, eq)), {}};
    const auto& known = sweep_parameters();
    if (std::find(known.begin(), known.end(), axis.name) == known.end())
      throw ConfigError("unknown sweep parameter '" + axis.name + "'");
    for (const auto& tok : split(part.substr(eq + 1), ',')) {
      const auto t = trim(tok);
      try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size() || !std::isfinite(v)) throw std::invalid_argument(t);
        axis.values.push_back(v);
      } catch (const std::logic_error&) {
        throw ConfigError("bad grid value '" + t + "' for " + axis.name);
      }
    }
    if (axis.values.empty()) throw ConfigError("grid axis " + axis.name + " has no values");
    for (const auto& g : grid)
      if (g.name == axis.name) throw ConfigError("duplicate grid axis " + axis.name);
    grid.push_back(std::move(axis));
  }
  return grid;
}

SweepTable sweep(const ViewSet& views, const GroundTruthMask& mask, const DetectorConfig& base,
                 const std::vector<GridAxis>& grid, int jobs) {
  if (grid.empty()) throw ConfigError("empty grid");
  validate_mask(mask, views.height(), views.width());
  SweepTable table;
  std::size_t total = 1;
  for (const auto& axis : grid) {
    if (axis.values.empty()) throw ConfigError("grid axis " + axis.name + " has no values");
    table.names.push_back(axis.name);
    total *= axis.values.size();
  }

  std::vector<DetectorConfig> configs;
  for (std::size_t k = 0; k < total; ++k) {
    SweepRow row;
    DetectorConfig cfg = base;
    std::size_t rem = k;
    std::vector<std::size_t> idx(grid.size());
    for (std::size_t a = grid.size(); a-- > 0;) {
      idx[a] = rem % grid[a].values.size();
      rem /= grid[a].values.size();
    }
    for (std::size_t a = 0; a < grid.size(); ++a) {
      row.values.push_back(grid[a].values[idx[a]]);
      apply_parameter(cfg, grid[a].name, row.values.back());
    }
    cfg.solver.validate();
    configs.push_back(cfg);
    table.rows.push_back(std::move(row));
  }

  auto eval_point = [&](std::size_t k) { return roc(detect(views, configs[k]), mask).auc; };
  const auto width = static_cast<std::size_t>(std::max(jobs, 1));
  for (std::size_t start = 0; start < total; start += width) {
    const std::size_t end = std::min(total, start + width);
    if (width == 1) {
      table.rows[start].auc = eval_point(start);
      continue;
    }
    std::vector<std::future<double>> futures;
    for (std::size_t k = start; k < end; ++k) futures.push_back(std::async(std::launch::async, eval_point, k));
    for (std::size_t k = start; k < end; ++k) table.rows[k].auc = futures[k - start].get();
  }
  return table;
}

void write_sweep_csv(std::ostream& out, const SweepTable& table) {
  for (const auto& n : table.names) out << n << ',';
  out << "auc\n";
  const auto old = out.precision(17);
  for (const auto& row : table.rows) {
    for (double v : row.values) out << v << ',';
    out << row.auc << '\n';
  }
  out.precision(old);
}

}  // namespace smsl::eval
