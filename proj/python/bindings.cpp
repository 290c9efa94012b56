#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "smsl/baselines.hpp"
#include "smsl/cube.hpp"
#include "smsl/detector.hpp"
#include "smsl/eval.hpp"
#include "smsl/prox.hpp"
#include "smsl/sketch.hpp"
#include "smsl/solver.hpp"

#include <algorithm>

namespace py = pybind11;
using namespace smsl;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

// Cubes cross the boundary as (bands, height, width) arrays, which is BSQ order.
HyperCube to_cube(const Array& a) {
  if (a.ndim() != 3) throw py::value_error("cube must be a (bands, height, width) array");
  const auto* p = a.data();
  return HyperCube(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)),
                   std::vector<double>(p, p + a.size()));
}

Array from_cube(const HyperCube& c) {
  Array out({c.bands(), c.height(), c.width()});
  std::copy(c.data().begin(), c.data().end(), out.mutable_data());
  return out;
}

ViewSet to_views(const std::vector<Array>& arrays) {
  std::vector<HyperCube> cubes;
  for (const auto& a : arrays) cubes.push_back(to_cube(a));
  return ViewSet(std::move(cubes));
}

Array from_map(const DetectionMap& m) {
  Array out({m.height, m.width});
  std::copy(m.scores.begin(), m.scores.end(), out.mutable_data());
  return out;
}

DetectorConfig detector_config(int sketch_size, std::uint64_t seed, int repeats, const std::string& average,
                               double lambda1, double lambda2, double lambda3, double mu0, double mu_max,
                               double rho, int max_iter, double epsilon) {
  DetectorConfig cfg;
  cfg.sketch.n_h = sketch_size;
  cfg.sketch.seed = seed;
  cfg.sketch.repeats = repeats;
  cfg.sketch.average_mode = parse_average_mode(average);
  cfg.solver = {lambda1, lambda2, lambda3, mu0, mu_max, rho, max_iter, epsilon};
  return cfg;
}

py::dict residual_dict(const Residuals& r) {
  py::dict d;
  d["reconstruction"] = r.reconstruction;
  d["error_split"] = r.error_split;
  d["sum_to_one"] = r.sum_to_one;
  d["consensus"] = r.consensus;
  return d;
}

}  // namespace

PYBIND11_MODULE(_smsl, m) {
  m.doc() = "Anomalous change detection in multi-temporal hyperspectral cubes";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DataError>(m, "DataError", PyExc_RuntimeError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  m.def("soft_threshold", &prox::soft_threshold, py::arg("x"), py::arg("tau"));
  m.def("svt", &prox::svt, py::arg("m"), py::arg("tau"));
  m.def("l21_shrink", &prox::l21_shrink, py::arg("q"), py::arg("threshold"));
  m.def("exclusivity", &prox::exclusivity, py::arg("u"), py::arg("v"));
  m.def("exclusivity_grad", &prox::exclusivity_grad, py::arg("u"), py::arg("v"));

  m.def("jlt_matrix", &jlt_matrix, py::arg("n"), py::arg("n_h"), py::arg("seed"));
  m.def(
      "build_dictionary",
      [](const std::vector<Array>& views, int sketch_size, std::uint64_t seed, int repeats,
         const std::string& average) {
        SketchConfig cfg{sketch_size, seed, repeats, parse_average_mode(average)};
        return build_dictionary(to_views(views), cfg).h;
      },
      py::arg("views"), py::arg("sketch_size") = 500, py::arg("seed") = 0, py::arg("repeats") = 10,
      py::arg("average") = "dictionary");

  m.def(
      "solve",
      [](const std::vector<Eigen::MatrixXd>& x, const Eigen::MatrixXd& h, double lambda1, double lambda2,
         double lambda3, double mu0, double mu_max, double rho, int max_iter, double epsilon) {
        const Problem p(x, h);
        SolveResult r;
        {
          py::gil_scoped_release release;
          r = solve(p, SolverConfig{lambda1, lambda2, lambda3, mu0, mu_max, rho, max_iter, epsilon});
        }
        py::list history;
        for (const auto& rec : r.residual_history()) history.append(residual_dict(rec.residuals));
        py::dict out;
        out["c"] = r.state.c;
        out["d"] = r.state.d;
        out["e"] = r.state.e;
        out["converged"] = r.converged;
        out["iterations"] = r.iterations_run;
        out["history"] = history;
        return out;
      },
      py::arg("x"), py::arg("h"), py::arg("lambda1") = 1.0, py::arg("lambda2") = 10.0, py::arg("lambda3") = 10.0,
      py::arg("mu0") = 1e-5, py::arg("mu_max") = 1e5, py::arg("rho") = 1.1, py::arg("max_iter") = 60,
      py::arg("epsilon") = 1e-5);

  m.def(
      "detect",
      [](const std::vector<Array>& views, int sketch_size, std::uint64_t seed, int repeats,
         const std::string& average, double lambda1, double lambda2, double lambda3, double mu0, double mu_max,
         double rho, int max_iter, double epsilon) {
        const auto vs = to_views(views);
        const auto cfg = detector_config(sketch_size, seed, repeats, average, lambda1, lambda2, lambda3, mu0,
                                         mu_max, rho, max_iter, epsilon);
        DetectionMap map;
        {
          py::gil_scoped_release release;
          map = detect(vs, cfg);
        }
        return from_map(map);
      },
      py::arg("views"), py::arg("sketch_size") = 500, py::arg("seed") = 0, py::arg("repeats") = 10,
      py::arg("average") = "dictionary", py::arg("lambda1") = 1.0, py::arg("lambda2") = 10.0,
      py::arg("lambda3") = 10.0, py::arg("mu0") = 1e-5, py::arg("mu_max") = 1e5, py::arg("rho") = 1.1,
      py::arg("max_iter") = 60, py::arg("epsilon") = 1e-5);

  m.def(
      "baseline",
      [](const std::string& method, const std::vector<Array>& views, std::optional<double> ridge) {
        return from_map(baselines::run(method, to_views(views), ridge));
      },
      py::arg("method"), py::arg("views"), py::arg("ridge") = py::none());

  m.def(
      "roc",
      [](const std::vector<double>& scores, const std::vector<std::uint8_t>& labels) {
        const auto curve = eval::roc(scores, labels);
        std::vector<double> fpr, tpr;
        for (const auto& p : curve.points) {
          fpr.push_back(p.fpr);
          tpr.push_back(p.tpr);
        }
        return py::make_tuple(fpr, tpr, curve.auc);
      },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "synth_scene",
      [](int height, int width, int bands, int views, int n_endmembers, int n_anomalies, double anomaly_magnitude,
         double noise_sigma, double gain_spread, int anomaly_view, std::uint64_t seed) {
        const eval::SynthSpec spec{.height = height,
                                   .width = width,
                                   .bands = bands,
                                   .views = views,
                                   .n_endmembers = n_endmembers,
                                   .n_anomalies = n_anomalies,
                                   .anomaly_magnitude = anomaly_magnitude,
                                   .noise_sigma = noise_sigma,
                                   .gain_spread = gain_spread,
                                   .anomaly_view = anomaly_view,
                                   .seed = seed};
        const auto scene = eval::synth_scene(spec);
        py::list cubes;
        for (const auto& c : scene.views.views()) cubes.append(from_cube(c));
        py::array_t<std::uint8_t> mask({height, width});
        std::copy(scene.mask.labels.begin(), scene.mask.labels.end(), mask.mutable_data());
        return py::make_tuple(cubes, mask);
      },
      py::arg("height") = 64, py::arg("width") = 64, py::arg("bands") = 16, py::arg("views") = 2,
      py::arg("n_endmembers") = 4, py::arg("n_anomalies") = 20, py::arg("anomaly_magnitude") = 0.1,
      py::arg("noise_sigma") = 0.02, py::arg("gain_spread") = 0.05, py::arg("anomaly_view") = 1,
      py::arg("seed") = 0);

  m.def("load_cube", [](const std::filesystem::path& p) { return from_cube(load_cube(p)); }, py::arg("path"));
  m.def(
      "save_cube", [](const Array& a, const std::filesystem::path& p) { save_cube(to_cube(a), p); },
      py::arg("cube"), py::arg("path"));
}
