#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crowd_assim/errors.hpp"
#include "crowd_assim/experiment_suite.hpp"
#include "crowd_assim/particle_filter.hpp"
#include "crowd_assim/station_model.hpp"
#include "crowd_assim/twin_harness.hpp"

namespace py = pybind11;
using namespace crowd_assim;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Station crowd model with particle filter data assimilation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DegeneracyError>(m, "DegeneracyError", PyExc_RuntimeError);

  py::class_<ModelConfig>(m, "ModelConfig")
      .def(py::init<>())
      .def_readwrite("n_agents", &ModelConfig::n_agents)
      .def_readwrite("speed_min", &ModelConfig::speed_min)
      .def_readwrite("speed_max", &ModelConfig::speed_max)
      .def_readwrite("gate_interval", &ModelConfig::gate_interval)
      .def_readwrite("separation", &ModelConfig::separation)
      .def_readwrite("iteration_cap", &ModelConfig::iteration_cap)
      .def("validate", &ModelConfig::validate);

  py::enum_<Weighting>(m, "Weighting")
      .value("GAUSSIAN_LIKELIHOOD", Weighting::kGaussianLikelihood)
      .value("GAUSSIAN_MEAN_DISTANCE", Weighting::kGaussianMeanDistance)
      .value("INVERSE_DISTANCE", Weighting::kInverseDistance);

  py::enum_<Roughening>(m, "Roughening")
      .value("PER_WINDOW", Roughening::kPerWindow)
      .value("PER_ITERATION", Roughening::kPerIteration);

  py::class_<FilterConfig>(m, "FilterConfig")
      .def(py::init<>())
      .def_readwrite("n_particles", &FilterConfig::n_particles)
      .def_readwrite("window_length", &FilterConfig::window_length)
      .def_readwrite("particle_noise_sigma", &FilterConfig::particle_noise_sigma)
      .def_readwrite("measurement_noise_sigma", &FilterConfig::measurement_noise_sigma)
      .def_readwrite("resampling_enabled", &FilterConfig::resampling_enabled)
      .def_readwrite("weighting", &FilterConfig::weighting)
      .def_readwrite("roughening", &FilterConfig::roughening)
      .def("validate", &FilterConfig::validate);

  py::class_<WindowRecord>(m, "WindowRecord")
      .def_readonly("window_index", &WindowRecord::window_index)
      .def_readonly("iteration", &WindowRecord::iteration)
      .def_readonly("length", &WindowRecord::length)
      .def_readonly("nu_before", &WindowRecord::nu_before)
      .def_readonly("nu_after", &WindowRecord::nu_after)
      .def_readonly("weight_variance", &WindowRecord::weight_variance)
      .def_readonly("error_variance", &WindowRecord::error_variance)
      .def_readonly("active_agents", &WindowRecord::active_agents);

  py::class_<TruthRun>(m, "TruthRun")
      .def_readonly("truth_seed", &TruthRun::truth_seed)
      .def_readonly("states_by_window", &TruthRun::states_by_window)
      .def_readonly("window_iterations", &TruthRun::window_iterations)
      .def_readonly("total_iterations", &TruthRun::total_iterations)
      .def_readonly("collision_count", &TruthRun::collision_count)
      .def_readonly("cap_reached", &TruthRun::cap_reached);

  py::class_<ExperimentResult>(m, "ExperimentResult")
      .def_readonly("windows", &ExperimentResult::windows)
      .def_readonly("truth_iterations", &ExperimentResult::truth_iterations)
      .def_readonly("truth_collisions", &ExperimentResult::truth_collisions)
      .def_readonly("cap_reached", &ExperimentResult::cap_reached);

  py::class_<PolyFit>(m, "PolyFit")
      .def_readonly("coefficients", &PolyFit::coefficients)
      .def_readonly("r_squared", &PolyFit::r_squared);

  py::class_<CollisionRow>(m, "CollisionRow")
      .def_readonly("n_agents", &CollisionRow::n_agents)
      .def_readonly("seed", &CollisionRow::seed)
      .def_readonly("collisions", &CollisionRow::collisions);

  py::class_<CollisionStudy>(m, "CollisionStudy")
      .def_readonly("rows", &CollisionStudy::rows)
      .def_readonly("agent_counts", &CollisionStudy::agent_counts)
      .def_readonly("mean_collisions", &CollisionStudy::mean_collisions)
      .def_readonly("linear", &CollisionStudy::linear)
      .def_readonly("quadratic", &CollisionStudy::quadratic);

  m.def("run_truth", &run_truth, py::arg("config"), py::arg("seed"), py::arg("window_length") = 100);
  m.def("run_filter_experiment", &run_filter_experiment, py::arg("config"), py::arg("filter"),
        py::arg("truth_seed"), py::arg("filter_seed"), py::arg("threads") = 1,
        py::call_guard<py::gil_scoped_release>());
  m.def(
      "particle_error",
      [](const std::vector<double>& particle, const std::vector<double>& truth) {
        return particle_error(particle, truth);
      },
      py::arg("particle"), py::arg("truth"));
  m.def(
      "systematic_indices",
      [](const std::vector<double>& weights, double u_offset) {
        return systematic_indices(weights, u_offset);
      },
      py::arg("weights"), py::arg("u_offset"));
  m.def(
      "aggregate_error",
      [](const std::vector<std::vector<WindowRecord>>& runs, bool after) {
        return aggregate_error(runs, after ? ErrorPhase::kAfter : ErrorPhase::kBefore);
      },
      py::arg("runs"), py::arg("after") = true);
  m.def(
      "collision_study",
      [](const ModelConfig& model, const std::vector<std::size_t>& counts, std::size_t seeds,
         std::uint64_t base_seed, unsigned threads) {
        return collision_study(model, counts, seeds, base_seed, threads);
      },
      py::arg("model"), py::arg("agent_counts"), py::arg("seeds_per_count"), py::arg("base_seed"),
      py::arg("threads") = 1, py::call_guard<py::gil_scoped_release>());
  m.def(
      "fit_polynomial",
      [](const std::vector<double>& x, const std::vector<double>& y, int degree) {
        return fit_polynomial(x, y, degree);
      },
      py::arg("x"), py::arg("y"), py::arg("degree"));
}
