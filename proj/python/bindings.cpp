#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "evoqrnn/bench.hpp"
#include "evoqrnn/cmaes.hpp"
#include "evoqrnn/data.hpp"
#include "evoqrnn/density_matrix.hpp"
#include "evoqrnn/errors.hpp"
#include "evoqrnn/gates.hpp"
#include "evoqrnn/objective.hpp"
#include "evoqrnn/qrnn.hpp"
#include "evoqrnn/strategy.hpp"

namespace py = pybind11;
using namespace evoqrnn;

namespace {

objective::LossSpec make_spec(std::size_t horizon, const std::string& loss) {
  if (loss == "one-step") return {objective::LossMode::OneStep, horizon};
  if (loss == "multi-step") return {objective::LossMode::MultiStep, horizon};
  throw ConfigError("loss must be 'one-step' or 'multi-step'");
}

py::dict record_dict(const optim::RunRecord& r) {
  py::dict d;
  d["method"] = std::string(optim::to_string(r.method));
  d["seed"] = r.seed;
  d["epoch"] = r.epoch;
  d["phase"] = std::string(optim::to_string(r.phase));
  d["circuit_evals"] = r.circuit_evals;
  d["effort_x"] = r.effort_x;
  d["train_loss"] = r.train_loss;
  d["test_rel_rmse"] = r.test_rel_rmse;
  return d;
}

py::list curves_list(const std::vector<bench::MethodAggregate>& agg) {
  py::list out;
  for (const auto& a : agg) {
    for (const auto& p : a.points) {
      py::dict d;
      d["method"] = std::string(optim::to_string(a.method));
      d["epoch"] = p.epoch;
      d["effort_x"] = p.effort_x;
      d["mean_rel_rmse"] = p.mean_rel_rmse;
      d["std_rel_rmse"] = p.std_rel_rmse;
      d["mean_circuit_evals"] = p.mean_circuit_evals;
      d["mean_train_loss"] = p.mean_train_loss;
      d["phase"] = std::string(optim::to_string(p.phase));
      d["anchor"] = p.anchor;
      out.append(d);
    }
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Density-matrix QRNN simulator, optimizers and benchmark harness";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<RuntimeFailure>(m, "RuntimeFailure", PyExc_RuntimeError);

  py::class_<sim::DensityMatrix>(m, "DensityMatrix")
      .def(py::init<std::size_t, sim::CMatrix>(), py::arg("n_qubits"), py::arg("matrix"))
      .def_property_readonly("n_qubits", &sim::DensityMatrix::n_qubits)
      .def_property_readonly("matrix", [](const sim::DensityMatrix& r) { return r.matrix(); })
      .def("trace", &sim::DensityMatrix::trace)
      .def("hermiticity_error", &sim::DensityMatrix::hermiticity_error)
      .def("min_eigenvalue", &sim::DensityMatrix::min_eigenvalue)
      .def("rx", [](const sim::DensityMatrix& r, std::size_t q, double a) { return sim::apply_gate(r, sim::Gate::rx(q, a)); })
      .def("ry", [](const sim::DensityMatrix& r, std::size_t q, double a) { return sim::apply_gate(r, sim::Gate::ry(q, a)); })
      .def("rz", [](const sim::DensityMatrix& r, std::size_t q, double a) { return sim::apply_gate(r, sim::Gate::rz(q, a)); })
      .def("u3", [](const sim::DensityMatrix& r, std::size_t q, double t, double p, double l) {
        return sim::apply_gate(r, sim::Gate::u3(q, t, p, l));
      })
      .def("crx", [](const sim::DensityMatrix& r, std::size_t c, std::size_t t, double a) {
        return sim::apply_gate(r, sim::Gate::crx(c, t, a));
      })
      .def("reset", [](const sim::DensityMatrix& r, const std::vector<std::size_t>& qs) {
        return sim::reset_qubits(r, qs);
      })
      .def("partial_trace", [](const sim::DensityMatrix& r, const std::vector<std::size_t>& qs) {
        return sim::partial_trace(r, qs);
      });

  m.def("zero_state", &sim::DensityMatrix::zero_state, py::arg("n_qubits"));
  m.def("prob_one", &sim::prob_one, py::arg("rho"), py::arg("qubit"));

  m.def(
      "run_sequence",
      [](const std::vector<double>& xs, const Eigen::VectorXd& theta) {
        return qrnn::RecurrentCell(theta, {}).run_sequence(xs);
      },
      py::arg("xs"), py::arg("theta"), "Teacher-forced predictions; ys[t] predicts xs[t + 1].");
  m.def(
      "forecast",
      [](const std::vector<double>& history, const Eigen::VectorXd& theta, std::size_t horizon) {
        return qrnn::RecurrentCell(theta, {}).forecast(history, horizon);
      },
      py::arg("history"), py::arg("theta"), py::arg("horizon"));

  m.def(
      "train_loss",
      [](const Eigen::VectorXd& theta, const std::vector<double>& train, std::size_t horizon, const std::string& loss) {
        return objective::train_loss(theta, train, make_spec(horizon, loss));
      },
      py::arg("theta"), py::arg("train"), py::arg("horizon") = 4, py::arg("loss") = "multi-step");
  m.def(
      "grad_parameter_shift",
      [](const Eigen::VectorXd& theta, const std::vector<double>& train, std::size_t horizon, const std::string& loss) {
        return objective::grad_parameter_shift(objective::ForecastLoss(train, make_spec(horizon, loss)), theta);
      },
      py::arg("theta"), py::arg("train"), py::arg("horizon") = 4, py::arg("loss") = "multi-step");
  m.def(
      "grad_finite_diff",
      [](const Eigen::VectorXd& theta, const std::vector<double>& train, std::size_t horizon, const std::string& loss,
         double h) {
        const objective::ForecastLoss f(train, make_spec(horizon, loss));
        return objective::grad_finite_diff([&](const Eigen::VectorXd& t) { return f.value(t); }, theta, h);
      },
      py::arg("theta"), py::arg("train"), py::arg("horizon") = 4, py::arg("loss") = "multi-step",
      py::arg("h") = 1e-5);
  m.def(
      "shift_evaluations",
      [](std::size_t n_train, std::size_t horizon, const std::string& loss) {
        return objective::ForecastLoss(std::vector<double>(n_train, 0.0), make_spec(horizon, loss)).shift_evaluations();
      },
      py::arg("n_train"), py::arg("horizon") = 4, py::arg("loss") = "multi-step");
  m.def("rel_rmse", [](const std::vector<double>& p, const std::vector<double>& t) { return objective::rel_rmse(p, t); },
        py::arg("pred"), py::arg("truth"));

  m.def(
      "mackey_glass",
      [](std::size_t n, double dt, double stride, double x0) {
        data::MackeyGlassParams p;
        p.dt = dt;
        p.stride = stride;
        p.x0 = x0;
        return data::mackey_glass(p, n);
      },
      py::arg("n_points") = 100, py::arg("dt") = 0.1, py::arg("stride") = 1.0, py::arg("x0") = 1.2);
  m.def(
      "mackey_glass_rhs", [](double x, double x_delayed) { return data::mackey_glass_rhs({}, x, x_delayed); },
      py::arg("x"), py::arg("x_delayed"));

  py::class_<optim::CmaState>(m, "CmaState")
      .def_property_readonly("mean", [](const optim::CmaState& s) { return s.mean; })
      .def_property_readonly("sigma", [](const optim::CmaState& s) { return s.sigma; })
      .def_property_readonly("cov", [](const optim::CmaState& s) { return s.cov; })
      .def_property_readonly("generation", [](const optim::CmaState& s) { return s.generation; });
  m.def("cma_init", [](std::uint64_t seed, double sigma0, std::size_t lambda,
                       std::size_t dim) { return optim::cma_init(seed, sigma0, lambda, dim); },
        py::arg("seed"), py::arg("sigma0") = 0.5, py::arg("population") = 10, py::arg("dim") = 24);
  m.def("cma_init_with_mean", &optim::cma_init_with_mean, py::arg("mean"), py::arg("seed"), py::arg("sigma0") = 0.5,
        py::arg("population") = 10);
  m.def("cma_ask", &optim::cma_ask, py::arg("state"));
  m.def(
      "cma_tell",
      [](optim::CmaState& s, const std::vector<Eigen::VectorXd>& c, const std::vector<double>& f) {
        optim::cma_tell(s, c, f);
      },
      py::arg("state"), py::arg("candidates"), py::arg("fitness"));
  m.def(
      "cma_parameters",
      [](std::size_t dim, std::size_t lambda) {
        const auto p = optim::CmaParameters::defaults(dim, lambda);
        py::dict d;
        d["mu"] = p.mu;
        d["weights"] = p.weights;
        d["mueff"] = p.mueff;
        d["c_sigma"] = p.c_sigma;
        d["d_sigma"] = p.d_sigma;
        d["c_c"] = p.c_c;
        d["c_1"] = p.c_1;
        d["c_mu"] = p.c_mu;
        d["chi_n"] = p.chi_n;
        return d;
      },
      py::arg("dim") = 24, py::arg("population") = 10);

  m.def(
      "expected_circuit_evals",
      [](const std::string& method, std::uint64_t gradient_cost, std::size_t epoch) {
        return optim::expected_circuit_evals(optim::StrategySchedule::for_method(optim::parse_method(method), 0),
                                             gradient_cost, epoch);
      },
      py::arg("method"), py::arg("gradient_cost"), py::arg("epoch"));

  py::class_<bench::ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def(py::init([](const py::kwargs& kw) {
        bench::ExperimentConfig cfg;
        for (const auto& [k, v] : kw) cfg.set(py::str(k), py::str(v));
        return cfg;
      }))
      .def("set", &bench::ExperimentConfig::set, py::arg("key"), py::arg("value"))
      .def("validate", &bench::ExperimentConfig::validate)
      .def("items", &bench::ExperimentConfig::to_key_values);

  m.def(
      "run_experiment",
      [](const bench::ExperimentConfig& cfg, std::optional<std::filesystem::path> out_dir) {
        bench::ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = bench::run_experiment(cfg);
        }
        const auto agg = bench::aggregate(result);
        if (out_dir) bench::emit_results(agg, result, cfg, *out_dir);
        py::list records;
        for (const auto& run : result.runs)
          for (const auto& r : run.records) records.append(record_dict(r));
        py::dict d;
        d["dataset"] = result.dataset_name;
        d["gradient_cost"] = result.gradient_cost;
        d["failed_runs"] = result.failed_runs();
        d["records"] = records;
        d["curves"] = curves_list(agg);
        return d;
      },
      py::arg("config"), py::arg("out_dir") = std::nullopt);
}
