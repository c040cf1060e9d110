// Python bindings for the splitting-scheme solver: model construction, the
// transport/diffusion building blocks, and the end-to-end schemes.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fbsde/config.hpp"
#include "fbsde/diffusion.hpp"
#include "fbsde/models.hpp"
#include "fbsde/parallel.hpp"
#include "fbsde/splitting.hpp"
#include "fbsde/transport.hpp"

namespace py = pybind11;
using namespace fbsde;

namespace {

EGrid make_grid(int count, double e_min, double e_max) { return EGrid(count, e_min, e_max); }

SchemeResult solve_alt(const ModelSpec& model, const EGrid& grid, int time_steps, int particles,
                       double memory_budget_mb) {
    return run_alt_scheme(model, AltConfig{time_steps, particles, memory_budget_mb}, grid);
}

SchemeResult solve_nn(const ModelSpec& model, const EGrid& grid, int time_steps, int sub_steps,
                      const std::string& transport, int paths, std::uint64_t seed,
                      std::uint64_t nn_seed, int max_iters) {
    NnConfig cfg;
    cfg.time_steps = time_steps;
    cfg.sub_steps = sub_steps;
    cfg.transport = transport_from_name(transport);
    cfg.paths = paths;
    cfg.seed = seed;
    cfg.train.seed = nn_seed;
    cfg.train.max_iters = max_iters;
    return run_nn_scheme(model, grid, cfg);
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Operator-splitting solver for the decoupling field of singular "
              "forward-backward systems";

    py::class_<ModelSpec>(m, "Model")
        .def_readonly("dim", &ModelSpec::dim)
        .def_readonly("horizon", &ModelSpec::horizon)
        .def_property_readonly("initial_point",
                               [](const ModelSpec& s) { return s.initial_point; })
        .def_property_readonly("has_state_map", &ModelSpec::has_brownian_map)
        .def("mu", [](const ModelSpec& s, const Vec& p, double y) { return s.emission_rate(p, y); },
             py::arg("p"), py::arg("y"))
        .def("phi", [](const ModelSpec& s, const Vec& p, double e) { return s.terminal(p, e); },
             py::arg("p"), py::arg("e"))
        .def("flux", [](const ModelSpec& s, const Vec& p, double y) { return flux(s, p, y); },
             py::arg("p"), py::arg("y"))
        .def("state_map",
             [](const ModelSpec& s, double t, const Vec& w) {
                 if (!s.has_brownian_map()) {
                     throw std::invalid_argument("model has no closed-form state map");
                 }
                 return s.brownian_map(t, w);
             },
             py::arg("t"), py::arg("w"))
        .def("reduce_to_1d", [](const ModelSpec& s) { return reduce_to_1d(s); });

    m.def("linear_model", &make_linear_model, py::arg("dim"), py::arg("sigma") = 1.0,
          py::arg("cap") = 0.0, py::arg("horizon") = 1.0);
    m.def("bm_positive_model", &make_bm_positive_model, py::arg("dim"), py::arg("sigma") = 1.0,
          py::arg("horizon") = 1.0);
    m.def("multiplicative_model", &make_multiplicative_model, py::arg("dim"),
          py::arg("gbm_drift") = 0.0, py::arg("sigma") = 1.0, py::arg("theta") = 1.0,
          py::arg("horizon") = 1.0);

    m.def("validate_class",
          [](const ModelSpec& model, const Vec& lo, const Vec& hi, int samples,
             std::uint64_t seed) {
              const ValidationReport rep = validate_class(model, PBounds{lo, hi}, samples, seed);
              py::dict out;
              out["coercivity_lower"] = rep.coercivity_lower;
              out["coercivity_upper"] = rep.coercivity_upper;
              out["mu_lipschitz_p"] = rep.mu_lipschitz_p;
              out["phi_lipschitz_p"] = rep.phi_lipschitz_p;
              out["mu_min"] = rep.mu_min;
              out["mu_max"] = rep.mu_max;
              out["mu_strictly_decreasing"] = rep.mu_strictly_decreasing;
              out["phi_monotone"] = rep.phi_monotone;
              out["phi_in_range"] = rep.phi_in_range;
              out["passed"] = rep.passed();
              return out;
          },
          py::arg("model"), py::arg("lo"), py::arg("hi"), py::arg("samples") = 2000,
          py::arg("seed") = 0x5eed);

    py::class_<EGrid>(m, "EGrid")
        .def(py::init(&make_grid), py::arg("count"), py::arg("e_min"), py::arg("e_max"))
        .def_readonly("count", &EGrid::count)
        .def_readonly("e_min", &EGrid::e_min)
        .def_readonly("e_max", &EGrid::e_max)
        .def("spacing", &EGrid::spacing)
        .def("nodes", &EGrid::nodes);

    m.def("default_egrid", &default_egrid, py::arg("model"), py::arg("count"));
    m.def("discretize_terminal", &discretize_terminal, py::arg("model"), py::arg("p"),
          py::arg("grid"));
    m.def("cfl_certificate",
          [](const ModelSpec& model, double bound, bool positive, const EGrid& grid,
             int sub_steps, double horizon) {
              return cfl_certificate(model, PBox{bound, positive}, grid,
                                     SubGrid(sub_steps, horizon));
          },
          py::arg("model"), py::arg("bound"), py::arg("positive"), py::arg("grid"),
          py::arg("sub_steps"), py::arg("horizon"));
    m.def("project_state",
          [](const Vec& p, double bound, bool positive) {
              return project_p(p, PBox{bound, positive});
          },
          py::arg("p"), py::arg("bound"), py::arg("positive") = false);

    m.def("lax_friedrichs",
          [](const ModelSpec& model, const Vec& p, const GridFunction& theta, const EGrid& grid,
             int sub_steps, double horizon) {
              return lax_friedrichs(model, p, theta, grid, SubGrid(sub_steps, horizon));
          },
          py::arg("model"), py::arg("p"), py::arg("theta"), py::arg("grid"),
          py::arg("sub_steps"), py::arg("horizon"));
    m.def("upwind",
          [](const ModelSpec& model, const Vec& p, const GridFunction& theta, const EGrid& grid,
             int sub_steps, double horizon) {
              return upwind(model, p, theta, grid, SubGrid(sub_steps, horizon));
          },
          py::arg("model"), py::arg("p"), py::arg("theta"), py::arg("grid"),
          py::arg("sub_steps"), py::arg("horizon"));
    m.def("spd_velocities", &spd_velocities, py::arg("model"), py::arg("p"),
          py::arg("particle_count"));
    m.def("spd_transport",
          [](const ModelSpec& model, const Vec& p, const Vec& positions, double h) {
              return spd_transport(model, p, ParticleCDF{positions}, h).positions;
          },
          py::arg("model"), py::arg("p"), py::arg("positions"), py::arg("h"));
    m.def("cdf_eval",
          [](const Vec& positions, double e) { return cdf_eval(ParticleCDF{positions}, e); },
          py::arg("positions"), py::arg("e"));

    m.def("euler_step", &euler_step, py::arg("model"), py::arg("p"), py::arg("dt"),
          py::arg("dw"));
    m.def("cubature_increments",
          [](int dim, double h) {
              std::vector<std::pair<Vec, double>> out;
              for (const auto& pt : cubature_increments(dim, h)) {
                  out.emplace_back(pt.point, pt.probability);
              }
              return out;
          },
          py::arg("dim"), py::arg("h"));
    m.def("merge_particles",
          [](const std::vector<Vec>& clouds) {
              std::vector<ParticleCDF> owned;
              owned.reserve(clouds.size());
              for (const Vec& c : clouds) owned.push_back(ParticleCDF{c});
              std::vector<const ParticleCDF*> ptrs;
              for (const auto& c : owned) ptrs.push_back(&c);
              return merge_particles(ptrs).positions;
          },
          py::arg("clouds"));

    py::class_<PathEnsemble>(m, "PathEnsemble")
        .def_readonly("paths", &PathEnsemble::paths)
        .def_readonly("steps", &PathEnsemble::steps)
        .def_readonly("dim", &PathEnsemble::dim)
        .def("state",
             [](const PathEnsemble& e, int path, int n) {
                 const auto s = e.state(path, n);
                 return Vec(s.begin(), s.end());
             },
             py::arg("path"), py::arg("n"))
        .def("increment",
             [](const PathEnsemble& e, int path, int n) {
                 const auto s = e.increment(path, n);
                 return Vec(s.begin(), s.end());
             },
             py::arg("path"), py::arg("n"));

    m.def("sample_paths",
          [](const ModelSpec& model, int steps, std::uint64_t seed, int count) {
              const EulerSampler sampler{&model, TimeGrid(steps, model.horizon), seed,
                                         model.initial_point};
              return sample_paths(sampler, count);
          },
          py::arg("model"), py::arg("steps"), py::arg("seed"), py::arg("count"));

    py::class_<SchemeResult>(m, "SchemeResult")
        .def_readonly("values", &SchemeResult::values)
        .def_readonly("scheme", &SchemeResult::scheme)
        .def_readonly("provenance", &SchemeResult::provenance)
        .def_readonly("seed", &SchemeResult::seed)
        .def_readonly("time_steps", &SchemeResult::time_steps)
        .def_readonly("runtime_seconds", &SchemeResult::runtime_seconds)
        .def_readonly("monotonicity_defect", &SchemeResult::monotonicity_defect)
        .def_property_readonly("grid", [](const SchemeResult& r) { return r.grid; });

    m.def("run_alt_scheme", &solve_alt, py::arg("model"), py::arg("grid"),
          py::arg("time_steps"), py::arg("particles"), py::arg("memory_budget_mb") = 4096.0);
    m.def("run_nn_scheme", &solve_nn, py::arg("model"), py::arg("grid"), py::arg("time_steps"),
          py::arg("sub_steps") = 20, py::arg("transport") = "lf", py::arg("paths") = 5500,
          py::arg("seed") = 1, py::arg("nn_seed") = 2718, py::arg("max_iters") = 3000);
    m.def("run_proxy", &run_proxy, py::arg("model"), py::arg("grid"), py::arg("time_steps") = 64,
          py::arg("particles") = 3500, py::arg("memory_budget_mb") = 4096.0);

    m.def("l1_error",
          py::overload_cast<const SchemeResult&, const SchemeResult&>(&l1_error), py::arg("a"),
          py::arg("b"));
    m.def("linf_error",
          py::overload_cast<const SchemeResult&, const SchemeResult&>(&linf_error), py::arg("a"),
          py::arg("b"));
    m.def("fit_loglog_slope",
          [](const std::vector<std::pair<int, double>>& points) {
              std::vector<RatePoint> pts;
              for (const auto& [n, err] : points) pts.push_back(RatePoint{n, err});
              return fit_loglog_slope(pts);
          },
          py::arg("points"));

    m.def("set_max_threads", &set_max_threads, py::arg("count"));
}
