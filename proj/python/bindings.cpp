#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "degenwave/cli_io.hpp"
#include "degenwave/diagnostics.hpp"
#include "degenwave/error.hpp"
#include "degenwave/grid_state.hpp"
#include "degenwave/piecewise_fn.hpp"
#include "degenwave/solver.hpp"
#include "degenwave/structure_analysis.hpp"

namespace py = pybind11;
using namespace degenwave;

namespace {

Field make_field(const std::vector<double>& values) { return Field(Grid(values.size()), values); }

std::vector<double> to_list(const Field& f) { return {f.values().begin(), f.values().end()}; }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Periodic degenerate convection-diffusion solver and diagnostics";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<OutOfRange>(m, "OutOfRange", base.ptr());
  py::register_exception<CoverageError>(m, "CoverageError", base.ptr());
  py::register_exception<BandError>(m, "BandError", base.ptr());
  py::register_exception<MeanOutOfBand>(m, "MeanOutOfBand", base.ptr());
  py::register_exception<GridMismatch>(m, "GridMismatch", base.ptr());
  py::register_exception<CflViolation>(m, "CflViolation", base.ptr());
  py::register_exception<UnsupportedTestFn>(m, "UnsupportedTestFn", base.ptr());
  py::register_exception<RangeError>(m, "RangeError", base.ptr());
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());

  py::class_<PiecewiseFunction>(m, "PiecewiseFunction")
      .def(py::init<std::vector<double>, std::vector<std::vector<double>>, bool>(),
           py::arg("breakpoints"), py::arg("pieces"), py::arg("monotone") = false)
      .def_static("burgers", &PiecewiseFunction::burgers, py::arg("lo") = -1.0,
                  py::arg("hi") = 1.0)
      .def_static("linear", &PiecewiseFunction::linear, py::arg("slope"), py::arg("intercept"),
                  py::arg("lo") = -1.0, py::arg("hi") = 1.0)
      .def_static("constant", &PiecewiseFunction::constant, py::arg("value"),
                  py::arg("lo") = -1.0, py::arg("hi") = 1.0)
      .def_static("from_breakpoints", &PiecewiseFunction::from_breakpoints,
                  py::arg("breakpoints"), py::arg("higher_order"), py::arg("value_at_left_end"),
                  py::arg("monotone") = false)
      .def("eval", &PiecewiseFunction::eval)
      .def("__call__", &PiecewiseFunction::eval)
      .def("derivative", &PiecewiseFunction::derivative)
      .def("lipschitz_on", &PiecewiseFunction::lipschitz_on)
      .def_property_readonly("breakpoints", &PiecewiseFunction::breakpoints)
      .def_property_readonly("pieces", &PiecewiseFunction::pieces)
      .def_property_readonly("monotone", &PiecewiseFunction::monotone)
      .def("to_json", [](const PiecewiseFunction& f) { return to_json(f).dump(); });

  m.def("maximal_affine_interval",
        [](const PiecewiseFunction& f, double I, double lo, double hi, double tol) {
          const Interval r = maximal_affine_interval(f, I, lo, hi, tol);
          return py::make_tuple(r.a, r.b);
        },
        py::arg("f"), py::arg("I"), py::arg("lo"), py::arg("hi"), py::arg("tol") = kDefaultTol);
  m.def("maximal_constant_interval",
        [](const PiecewiseFunction& f, double I, double lo, double hi, double tol) {
          const Interval r = maximal_constant_interval(f, I, lo, hi, tol);
          return py::make_tuple(r.a, r.b);
        },
        py::arg("f"), py::arg("I"), py::arg("lo"), py::arg("hi"), py::arg("tol") = kDefaultTol);

  py::class_<StructureReport>(m, "StructureReport")
      .def_readonly("I", &StructureReport::I)
      .def_readonly("M", &StructureReport::M)
      .def_readonly("a", &StructureReport::a)
      .def_readonly("b", &StructureReport::b)
      .def_readonly("a_prime", &StructureReport::a2)
      .def_readonly("b_prime", &StructureReport::b2)
      .def_readonly("c", &StructureReport::c)
      .def_readonly("degenerate_speed", &StructureReport::degenerate_speed)
      .def("__repr__", [](const StructureReport& r) { return to_json(r).dump(); });

  m.def("analyze",
        [](const PiecewiseFunction& phi, const PiecewiseFunction& g,
           const std::vector<double>& u0, double tol, std::optional<double> bound) {
          return analyze(phi, g, make_field(u0), tol, bound);
        },
        py::arg("phi"), py::arg("g"), py::arg("u0"), py::arg("tol") = kDefaultTol,
        py::arg("bound") = py::none());

  m.def("l1_distance", [](const std::vector<double>& u, const std::vector<double>& v) {
    return l1_distance(make_field(u), make_field(v));
  });
  m.def("positive_part_distance", [](const std::vector<double>& u, const std::vector<double>& v) {
    return positive_part_distance(make_field(u), make_field(v));
  });
  m.def("mean", [](const std::vector<double>& u) { return mean(make_field(u)); });
  m.def("shift", [](const std::vector<double>& u, std::int64_t k) {
    return to_list(shift(make_field(u), k));
  });
  m.def("best_shift", [](const std::vector<double>& u, const std::vector<double>& v) {
    const ShiftMatch s = best_shift(make_field(u), make_field(v));
    return py::make_tuple(s.cells, s.distance);
  });
  m.def("cutoff", [](const std::vector<double>& u, double a, double b) {
    return to_list(cutoff(make_field(u), a, b));
  });
  m.def("band_project_mean",
        [](const std::vector<double>& u, const std::vector<double>& v, double a, double b) {
          return to_list(band_project_mean(make_field(u), make_field(v), a, b));
        });

  m.def("eo_flux", &eo_flux, py::arg("phi"), py::arg("uL"), py::arg("uR"));
  m.def("step",
        [](const PiecewiseFunction& phi, const PiecewiseFunction& g,
           const std::vector<double>& u, double dt) {
          return to_list(step(phi, g, make_field(u), dt));
        },
        py::arg("phi"), py::arg("g"), py::arg("u"), py::arg("dt"));

  py::class_<SchemeParams>(m, "SchemeParams")
      .def(py::init([](double t_end, std::vector<double> snapshot_times, double cfl_safety,
                       std::optional<double> dt) {
             SchemeParams p;
             p.t_end = t_end;
             p.snapshot_times = std::move(snapshot_times);
             p.cfl_safety = cfl_safety;
             p.dt_override = dt;
             return p;
           }),
           py::arg("t_end"), py::arg("snapshot_times") = std::vector<double>{},
           py::arg("cfl_safety") = 0.5, py::arg("dt") = py::none())
      .def_readwrite("t_end", &SchemeParams::t_end)
      .def_readwrite("snapshot_times", &SchemeParams::snapshot_times)
      .def_readwrite("cfl_safety", &SchemeParams::cfl_safety);

  py::class_<RunResult>(m, "RunResult")
      .def_property_readonly("times",
                             [](const RunResult& r) {
                               std::vector<double> t;
                               for (const auto& s : r.snapshots) t.push_back(s.time);
                               return t;
                             })
      .def_property_readonly("snapshots",
                             [](const RunResult& r) {
                               std::vector<std::vector<double>> out;
                               for (const auto& s : r.snapshots) out.push_back(to_list(s.field));
                               return out;
                             })
      .def_property_readonly("final", [](const RunResult& r) { return to_list(r.final()); })
      .def_readonly("structure", &RunResult::structure)
      .def_readonly("step_count", &RunResult::step_count)
      .def_readonly("dt", &RunResult::dt);

  m.def("run",
        [](const PiecewiseFunction& phi, const PiecewiseFunction& g,
           const std::vector<double>& u0, const SchemeParams& params, double tol,
           std::optional<double> bound) {
          py::gil_scoped_release release;
          return run(phi, g, make_field(u0), params, tol, bound);
        },
        py::arg("phi"), py::arg("g"), py::arg("u0"), py::arg("params"),
        py::arg("tol") = kDefaultTol, py::arg("bound") = py::none());

  py::class_<CheckReport>(m, "CheckReport")
      .def_readonly("name", &CheckReport::name)
      .def_readonly("passed", &CheckReport::passed)
      .def_readonly("observed", &CheckReport::observed)
      .def_readonly("threshold", &CheckReport::threshold)
      .def_readonly("error", &CheckReport::error)
      .def_property_readonly("series", [](const CheckReport& r) {
        std::vector<std::pair<double, double>> s;
        for (const auto& tv : r.series) s.emplace_back(tv.time, tv.value);
        return s;
      });

  py::class_<ProfileEstimate>(m, "ProfileEstimate")
      .def_property_readonly("v", [](const ProfileEstimate& p) { return to_list(p.v); })
      .def_readonly("c_used", &ProfileEstimate::c_used)
      .def_readonly("converged", &ProfileEstimate::converged)
      .def_readonly("threshold", &ProfileEstimate::threshold)
      .def_property_readonly("residual_history", [](const ProfileEstimate& p) {
        std::vector<std::pair<double, double>> s;
        for (const auto& tv : p.residual_history) s.emplace_back(tv.time, tv.value);
        return s;
      });

  m.def("conservation_monitor", &conservation_monitor);
  m.def("decay_metric", &decay_metric, py::arg("run"), py::arg("threshold") = py::none());
  m.def("cutoff_convergence", &cutoff_convergence, py::arg("run"), py::arg("a2"), py::arg("b2"),
        py::arg("threshold") = py::none());
  m.def("contraction_monitor", &contraction_monitor);
  m.def("extract_profile", &extract_profile, py::arg("run"), py::arg("structure"),
        py::arg("t_lo"), py::arg("threshold") = py::none());
  m.def("profile_operator_T",
        [](const PiecewiseFunction& phi, const PiecewiseFunction& g,
           const std::vector<double>& u0, const SchemeParams& params) {
          py::gil_scoped_release release;
          return profile_operator_T(phi, g, make_field(u0), params);
        });
  m.def("t_nonexpansive_check",
        [](const PiecewiseFunction& phi, const PiecewiseFunction& g,
           const std::vector<double>& u01, const std::vector<double>& u02,
           const SchemeParams& params) {
          py::gil_scoped_release release;
          return t_nonexpansive_check(phi, g, make_field(u01), make_field(u02), params);
        });

  m.def("parse_config", [](const std::string& text) {
    std::vector<std::string> out;
    for (const auto& c : parse_config(text)) out.push_back(serialize_config(c).dump());
    return out;
  }, "Validates a config document; returns each scenario in canonical JSON.");
  m.def("run_suite",
        [](const std::string& text, const std::string& out_dir, unsigned threads) {
          const auto configs = parse_config(text);
          SuiteSummary s;
          {
            py::gil_scoped_release release;
            s = run_suite(configs, out_dir, threads);
          }
          return summary_json(s).dump();
        },
        py::arg("config_text"), py::arg("out_dir"), py::arg("threads") = 0,
        "Runs every scenario and returns summary.json as a string.");
}
