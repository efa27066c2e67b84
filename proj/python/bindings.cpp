#include "ciricdp/bellman_ops.hpp"
#include "ciricdp/contraction_lab.hpp"
#include "ciricdp/dp_model.hpp"
#include "ciricdp/errors.hpp"
#include "ciricdp/lambda_pir.hpp"
#include "ciricdp/oracle_solvers.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <vector>

namespace py = pybind11;

namespace ciricdp {

namespace {

using Values = std::vector<double>;

Values to_list(const ValueFunction& v)
{
    return Values(v.values().begin(), v.values().end());
}

ExponentConvention convention_from(const std::string& name)
{
    if (name == "classical_l_plus_1") {
        return ExponentConvention::classical_l_plus_1;
    }
    if (name == "paper_l") {
        return ExponentConvention::paper_l;
    }
    throw DomainError("unknown convention \"" + name + "\"");
}

LambdaOperatorConfig lambda_config(double lambda, double truncation_tol, std::size_t max_terms,
                                   const std::string& convention)
{
    LambdaOperatorConfig cfg{lambda, truncation_tol, max_terms, convention_from(convention)};
    cfg.validate();
    return cfg;
}

py::dict report_dict(const ContractionReport& r)
{
    py::dict d;
    d["class"] = std::string(to_string(r.cls));
    d["modulus"] = r.modulus;
    d["samples"] = r.samples;
    d["skipped"] = r.skipped;
    d["max_ratio"] = r.max_ratio;
    d["worst_pair"] = py::make_tuple(r.worst_pair.first, r.worst_pair.second);
    d["violations"] = r.violations;
    return d;
}

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Bellman operators, lambda-operators, randomized lambda-policy iteration and oracles";
    m.attr("__version__") = "0.1.0";

    static py::exception<Error> base(m, "Error", PyExc_ValueError);
    py::register_exception<DimensionError>(m, "DimensionError", base.ptr());
    py::register_exception<AdmissibilityError>(m, "AdmissibilityError", base.ptr());
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<SamplingError>(m, "SamplingError", base.ptr());
    py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
    py::register_exception<CapExceededError>(m, "CapExceededError", base.ptr());
    py::register_exception<InternalError>(m, "InternalError", base.ptr());

    py::class_<FiniteMdp>(m, "FiniteMdp")
        .def_static("from_json", [](const std::string& text) { return parse_model(text); }, py::arg("text"))
        .def_static("load", [](const std::string& path) { return load_model(path); }, py::arg("path"))
        .def_static("random", &random_mdp, py::arg("n_states"), py::arg("n_controls"), py::arg("discount"),
                    py::arg("seed"))
        .def("to_json", &model_to_json, py::arg("indent") = 2)
        .def_property_readonly("n_states", &FiniteMdp::n_states)
        .def_property_readonly("discount", &FiniteMdp::discount)
        .def_property_readonly("contraction_modulus", &FiniteMdp::contraction_modulus)
        .def_property_readonly("weights",
                               [](const FiniteMdp& mdp) {
                                   return Values(mdp.weights().values().begin(), mdp.weights().values().end());
                               })
        .def_property_readonly("controls",
                               [](const FiniteMdp& mdp) {
                                   std::vector<std::vector<Control>> out;
                                   for (std::size_t x = 0; x < mdp.n_states(); ++x) {
                                       auto list = mdp.controls().at(x);
                                       out.emplace_back(list.begin(), list.end());
                                   }
                                   return out;
                               })
        .def("evaluate",
             [](const FiniteMdp& mdp, std::size_t x, Control u, Values v) {
                 return mdp.evaluate(x, u, ValueFunction(std::move(v)));
             },
             py::arg("x"), py::arg("u"), py::arg("v"));

    m.def("weighted_norm", [](Values v, Values nu) {
        return weighted_norm(ValueFunction(std::move(v)), WeightFunction(std::move(nu)));
    });
    m.def("weighted_distance", [](Values v, Values w, Values nu) {
        return weighted_distance(ValueFunction(std::move(v)), ValueFunction(std::move(w)),
                                 WeightFunction(std::move(nu)));
    });

    m.def("apply_policy_operator",
          [](const FiniteMdp& mdp, std::vector<Control> mu, Values v) {
              return to_list(apply_policy_operator(mdp, Policy{std::move(mu)}, ValueFunction(std::move(v))));
          },
          py::arg("mdp"), py::arg("mu"), py::arg("v"));
    m.def("apply_optimality_operator",
          [](const FiniteMdp& mdp, Values v) {
              auto r = apply_optimality_operator(mdp, ValueFunction(std::move(v)));
              return py::make_tuple(to_list(r.value), r.policy.choice);
          },
          py::arg("mdp"), py::arg("v"));
    m.def("apply_power",
          [](const FiniteMdp& mdp, std::vector<Control> mu, Values v, std::size_t l) {
              return to_list(apply_power(mdp, Policy{std::move(mu)}, ValueFunction(std::move(v)), l));
          },
          py::arg("mdp"), py::arg("mu"), py::arg("v"), py::arg("l"));
    m.def("apply_lambda_operator",
          [](const FiniteMdp& mdp, std::vector<Control> mu, Values v, double lambda, double truncation_tol,
             std::size_t max_terms, const std::string& convention) {
              auto r = apply_lambda_operator(mdp, Policy{std::move(mu)}, ValueFunction(std::move(v)),
                                             lambda_config(lambda, truncation_tol, max_terms, convention));
              py::dict d;
              d["value"] = to_list(r.value);
              d["terms"] = r.terms;
              d["tail_bound"] = r.tail_bound;
              d["hit_term_cap"] = r.hit_term_cap;
              return d;
          },
          py::arg("mdp"), py::arg("mu"), py::arg("v"), py::arg("lam"), py::arg("truncation_tol") = 1e-12,
          py::arg("max_terms") = 100000, py::arg("convention") = "classical_l_plus_1");

    m.def("gamma_bound_constant", &gamma_bound_constant, py::arg("sigma"));
    m.def("rho_modulus", &rho_modulus, py::arg("lam"), py::arg("k"));
    m.def("certified_error_bound",
          [](const FiniteMdp& mdp, Values v, double sigma, std::optional<std::vector<Control>> mu) {
              BoundTarget target = OptimalTarget{};
              if (mu) {
                  target = PolicyTarget{Policy{std::move(*mu)}};
              }
              return certified_error_bound(mdp, ValueFunction(std::move(v)), target, sigma);
          },
          py::arg("mdp"), py::arg("v"), py::arg("sigma"), py::arg("mu") = py::none());

    m.def("exact_policy_value",
          [](const FiniteMdp& mdp, std::vector<Control> mu) {
              return to_list(exact_policy_value(mdp, Policy{std::move(mu)}));
          },
          py::arg("mdp"), py::arg("mu"));
    m.def("value_iteration",
          [](const FiniteMdp& mdp, std::optional<Values> v0, double tol, std::size_t max_iters) {
              ValueFunction start = v0 ? ValueFunction(std::move(*v0)) : ValueFunction::zeros(mdp.n_states());
              auto r = value_iteration(mdp, start, tol, max_iters);
              py::dict d;
              d["value"] = to_list(r.value);
              d["iterations"] = r.iterations;
              d["converged"] = r.converged;
              return d;
          },
          py::arg("mdp"), py::arg("v0") = py::none(), py::arg("tol") = 1e-10, py::arg("max_iters") = 1000000);
    m.def("enumerate_policies",
          [](const FiniteMdp& mdp, std::uint64_t cap) {
              auto r = enumerate_policies(mdp, cap);
              return py::make_tuple(to_list(r.value), r.policy.choice);
          },
          py::arg("mdp"), py::arg("cap") = kDefaultEnumerationCap);
    m.def("lambda_operator_oracle",
          [](const FiniteMdp& mdp, std::vector<Control> mu, Values v, double lambda, const std::string& convention) {
              return to_list(lambda_operator_oracle(mdp, Policy{std::move(mu)}, ValueFunction(std::move(v)), lambda,
                                                    convention_from(convention)));
          },
          py::arg("mdp"), py::arg("mu"), py::arg("v"), py::arg("lam"),
          py::arg("convention") = "classical_l_plus_1");

    m.def("run_pir",
          [](const FiniteMdp& mdp, Values v0, double lambda, double p, double stop_tol, std::size_t max_iterations,
             std::uint64_t seed, bool enforce_initial_condition, double truncation_tol, const std::string& convention) {
              PirConfig cfg;
              cfg.lambda = lambda_config(lambda, truncation_tol, 100000, convention);
              cfg.schedule = ConstantSchedule{p};
              cfg.stop_tol = stop_tol;
              cfg.max_iterations = max_iterations;
              cfg.seed = seed;
              cfg.enforce_initial_condition = enforce_initial_condition;
              const PirResult r = [&] {
                  py::gil_scoped_release release;
                  return run_pir(mdp, ValueFunction(std::move(v0)), cfg);
              }();
              py::list residuals;
              py::list branches;
              for (const auto& rec : r.trace.records) {
                  residuals.append(rec.residual);
                  branches.append(std::string(to_string(rec.branch)));
              }
              py::dict d;
              d["value"] = to_list(r.value);
              d["converged"] = r.trace.converged;
              d["iterations"] = r.trace.iterations;
              d["initial_residual"] = r.trace.initial_residual;
              d["residuals"] = residuals;
              d["branches"] = branches;
              d["csv"] = trace_to_csv(r.trace);
              return d;
          },
          py::arg("mdp"), py::arg("v0"), py::arg("lam") = 0.5, py::arg("p") = 0.5, py::arg("stop_tol") = 1e-8,
          py::arg("max_iterations") = 10000, py::arg("seed") = 0, py::arg("enforce_initial_condition") = true,
          py::arg("truncation_tol") = 1e-12, py::arg("convention") = "classical_l_plus_1");

    m.def("example1_map", [](double x) { return example1_map()(x); }, py::arg("x"));
    m.def("check_example1",
          [](const std::string& cls, double modulus, std::size_t samples, std::uint64_t seed) {
              ScalarSampler sampler;
              sampler.random_pairs = samples;
              sampler.seed = seed;
              return report_dict(check_contraction(example1_map(), parse_contraction_class(cls), modulus, sampler));
          },
          py::arg("cls"), py::arg("modulus"), py::arg("samples") = 100000, py::arg("seed") = 0);
    m.def("iterate_example1",
          [](double x0, double tol, std::size_t max_iters) {
              auto r = iterate_to_fixed_point(example1_map(), x0, tol, max_iters);
              py::dict d;
              d["x_star"] = r.x_star;
              d["iterations"] = r.iterations;
              d["trajectory"] = r.trajectory;
              d["converged"] = r.converged;
              return d;
          },
          py::arg("x0"), py::arg("tol") = 1e-12, py::arg("max_iters") = 200);
}

} // namespace ciricdp
