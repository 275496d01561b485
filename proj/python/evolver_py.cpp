#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "evolver/catalog.hpp"
#include "evolver/degree.hpp"
#include "evolver/evolsys.hpp"
#include "evolver/experiments.hpp"
#include "evolver/expr.hpp"
#include "evolver/linop.hpp"
#include "evolver/semigroup.hpp"
#include "evolver/wave.hpp"

namespace py = pybind11;
using namespace evolver;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the evolver package";

  static py::exception<Error> error_type(m, "EvolverError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::handle(error_type)(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("mat_exp", &mat_exp, py::arg("m"), py::arg("t") = 1.0);
  m.def("operator_norm", py::overload_cast<const Matrix&>(&operator_norm), py::arg("m"));
  m.def("operator_norm", py::overload_cast<const Matrix&, const Matrix&>(&operator_norm), py::arg("m"),
        py::arg("metric"));
  m.def("resolvent", &resolvent, py::arg("m"), py::arg("mu"));
  m.def("dissipativity_rate", py::overload_cast<const Matrix&>(&dissipativity_rate), py::arg("m"));
  m.def("dissipativity_rate", py::overload_cast<const Matrix&, const Matrix&>(&dissipativity_rate), py::arg("m"),
        py::arg("metric"));

  m.def(
      "chernoff_defect",
      [](const Matrix& t, const Vector& x, int n) {
        const DefectBound b = chernoff_defect(t, x, n);
        return py::make_tuple(b.lhs, b.rhs);
      },
      py::arg("contraction"), py::arg("x"), py::arg("n"));

  py::class_<EvolutionSystem>(m, "EvolutionSystem")
      .def(py::init([](std::function<Matrix(double)> generator, Eigen::Index dim, double period, int n) {
             GeneratorFamily f;
             f.dim = dim;
             f.generator = std::move(generator);
             f.period = period;
             return EvolutionSystem(std::move(f), n);
           }),
           py::arg("generator"), py::arg("dim"), py::arg("period"), py::arg("n"))
      .def("__call__", &EvolutionSystem::operator(), py::arg("t"), py::arg("s"))
      .def("apply", &EvolutionSystem::apply, py::arg("t"), py::arg("s"), py::arg("x"))
      .def("monodromy", &EvolutionSystem::monodromy)
      .def_property_readonly("period", &EvolutionSystem::period)
      .def_property_readonly("subdivisions", &EvolutionSystem::subdivisions);

  py::class_<Region>(m, "Region")
      .def_static("ball", &Region::ball, py::arg("center"), py::arg("radius"))
      .def_static("box", &Region::box, py::arg("lower"), py::arg("upper"))
      .def("contains", &Region::contains)
      .def_property_readonly("dim", &Region::dim);

  m.def(
      "brouwer_degree",
      [](const VectorField& g, const Region& u, int grid) {
        DegreeOptions opt;
        opt.grid = grid;
        return brouwer_degree(g, u, opt);
      },
      py::arg("g"), py::arg("region"), py::arg("grid") = 16);
  m.def("winding_number_2d", &winding_number_2d, py::arg("g"), py::arg("region"), py::arg("samples") = 256);

  m.def(
      "eval_expr",
      [](std::string_view source, std::optional<double> t, std::optional<double> s, std::optional<double> period) {
        return eval_expr(parse_expr(source), Bindings{t, s, period});
      },
      py::arg("source"), py::arg("t") = py::none(), py::arg("s") = py::none(), py::arg("T") = py::none());
  m.def(
      "normalize_expr", [](std::string_view source) { return print_expr(parse_expr(source)); }, py::arg("source"));

  m.def("catalog_names", &catalog_names);
  m.def("experiment_names", &experiment_names);
  m.def(
      "monodromy",
      [](const std::string& name, int n) { return EvolutionSystem(catalog_model(name).family, n).monodromy(); },
      py::arg("model"), py::arg("n") = 1024);
  m.def(
      "run_experiment",
      [](const std::string& experiment, const std::string& config, const std::filesystem::path& out_dir,
         std::optional<std::uint64_t> seed) {
        const RunResult r = run_experiment(experiment, config, RunOptions{out_dir, seed, false});
        return py::make_tuple(r.exit_code, r.message, r.failed);
      },
      py::arg("experiment"), py::arg("config"), py::arg("out_dir") = ".", py::arg("seed") = py::none());
}
