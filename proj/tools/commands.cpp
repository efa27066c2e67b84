#include "commands.hpp"

#include "ciricdp/contraction_lab.hpp"
#include "ciricdp/dp_model.hpp"
#include "ciricdp/errors.hpp"
#include "ciricdp/lambda_pir.hpp"
#include "ciricdp/oracle_solvers.hpp"
#include "ciricdp/rng.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

namespace ciricdp::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json to_json(const ValueFunction& v)
{
    return std::vector<double>(v.values().begin(), v.values().end());
}

json to_json(const Policy& mu)
{
    return mu.choice;
}

void emit(const json& doc, const std::optional<fs::path>& path, std::ostream& out)
{
    const std::string text = doc.dump(2) + "\n";
    if (path) {
        std::ofstream file(*path, std::ios::binary);
        if (!file) {
            throw ParseError("cannot write " + path->string());
        }
        file << text;
    } else {
        out << text;
    }
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw ParseError("cannot write " + path.string());
    }
    file << text;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string_view convention_name(ExponentConvention c)
{
    return c == ExponentConvention::paper_l ? "paper_l" : "classical_l_plus_1";
}

ValueFunction random_value(CounterRng& rng, const ValueFunction& center, double radius, const WeightFunction& nu)
{
    std::vector<double> v(center.size());
    for (std::size_t x = 0; x < v.size(); ++x) {
        v[x] = center[x] + rng.uniform(-radius, radius) * nu[x];
    }
    return ValueFunction(std::move(v));
}

Policy random_policy(CounterRng& rng, const ControlSpace& controls)
{
    Policy mu{std::vector<Control>(controls.n_states())};
    for (std::size_t x = 0; x < mu.size(); ++x) {
        const auto list = controls.at(x);
        mu.choice[x] = list[static_cast<std::size_t>(rng.uniform() * static_cast<double>(list.size()))];
    }
    return mu;
}

// Without --model the certify suites run on gen --states 20 --controls 4 --discount 0.9 --seed 1.
FiniteMdp certify_model(const std::optional<fs::path>& path)
{
    return path ? load_model(*path) : random_mdp(20, 4, 0.9, 1);
}

ValueFunction oracle_v_star(const FiniteMdp& mdp, double tol)
{
    auto vi = value_iteration(mdp, ValueFunction::zeros(mdp.n_states()), tol, 1'000'000);
    if (!vi.converged) {
        throw InternalError("value iteration oracle did not converge");
    }
    return std::move(vi.value);
}

json contraction_entry(const std::string& op_name, const ContractionReport& r)
{
    json doc = json::parse(report_to_json(r));
    doc["operator"] = op_name;
    if (r.first_violation) {
        doc["first_violation_index"] = *r.first_violation;
    }
    return doc;
}

template <class Fn>
int guarded(std::ostream& err, Fn&& fn)
{
    try {
        return fn();
    } catch (const PreconditionError& e) {
        err << "error: " << e.what() << "\n";
        return kPrecondition;
    } catch (const CapExceededError& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
    } catch (const InternalError&) {
        throw;
    } catch (const Error& e) {
        // parse, validation, domain, dimension and admissibility errors
        err << "error: " << e.what() << "\n";
        return kInputError;
    }
}

// --- certify targets ------------------------------------------------------

bool certify_mdp_ciric(const CertifyOptions& opts, json& report)
{
    const FiniteMdp mdp = certify_model(opts.model);
    const double k = mdp.contraction_modulus();
    const VectorSampler sampler{opts.samples ? opts.samples : 10000, opts.seed, -10.0, 10.0};
    CounterRng rng(opts.seed ^ 0xC1A1Cull);

    std::vector<std::pair<std::string, Operator>> ops;
    ops.emplace_back("F", optimality_operator(mdp));
    const std::size_t n_policies = std::max<std::size_t>(1, opts.policies);
    for (std::size_t i = 0; i < n_policies; ++i) {
        ops.emplace_back("F_mu[" + std::to_string(i) + "]", policy_operator(mdp, random_policy(rng, mdp.controls())));
    }
    bool pass = true;
    json checks = json::array();
    for (const auto& [name, op] : ops) {
        const auto r = check_contraction(op, mdp.weights(), ContractionClass::ciric_halfsum, k, sampler);
        pass = pass && r.passed();
        checks.push_back(contraction_entry(name, r));
    }
    report["modulus"] = k;
    report["checks"] = std::move(checks);
    return pass;
}

bool certify_example1(const CertifyOptions& opts, json& report)
{
    const ScalarMap map = example1_map();
    ScalarSampler sampler;
    sampler.random_pairs = opts.samples ? opts.samples : 100000;
    sampler.seed = opts.seed;

    const auto quasi = check_contraction(map, ContractionClass::ciric_quasi, 0.25, sampler);
    const auto halfsum = check_contraction(map, ContractionClass::ciric_halfsum, 0.25, sampler);
    const auto banach = check_contraction(map, ContractionClass::banach, 0.999, sampler);

    std::size_t starts_converged = 0;
    std::size_t worst_iterations = 0;
    double worst_abs = 0.0;
    constexpr std::size_t kStarts = 64;
    for (std::size_t i = 0; i < kStarts; ++i) {
        const double x0 = 2.0 * static_cast<double>(i) / static_cast<double>(kStarts - 1);
        const auto run = iterate_to_fixed_point(map, x0, 1e-12, 200);
        if (run.converged && std::abs(run.x_star) <= 1e-12) {
            ++starts_converged;
        }
        worst_iterations = std::max(worst_iterations, run.iterations);
        worst_abs = std::max(worst_abs, std::abs(run.x_star));
    }

    const bool quasi_ok = quasi.passed();
    const bool banach_refuted = banach.violations > 0;
    const bool iteration_ok = starts_converged == kStarts;
    report["ciric_quasi"] = contraction_entry("T", quasi);
    report["ciric_quasi"]["pass"] = quasi_ok;
    report["banach"] = contraction_entry("T", banach);
    report["banach"]["expected_failure"] = true;
    report["banach"]["refuted"] = banach_refuted;
    report["ciric_halfsum"] = contraction_entry("T", halfsum);
    report["ciric_halfsum"]["gated"] = false;
    report["fixed_point_iteration"] = {{"starts", kStarts},
                                       {"converged", starts_converged},
                                       {"max_iterations", worst_iterations},
                                       {"max_abs_x_star", worst_abs}};
    return quasi_ok && banach_refuted && iteration_ok;
}

bool certify_lambda_op(const CertifyOptions& opts, json& report)
{
    const FiniteMdp mdp = certify_model(opts.model);
    constexpr double kTolerance = 1e-9;
    LambdaOperatorConfig cfg;
    cfg.lambda = opts.lambda;
    cfg.truncation_tol = 1e-12;
    cfg.validate();

    CounterRng rng(opts.seed);
    const std::size_t samples = opts.samples ? opts.samples : 100;
    double max_dev = 0.0;
    double max_fixed = 0.0;
    json worst = nullptr;
    const ValueFunction zero = ValueFunction::zeros(mdp.n_states());
    for (std::size_t i = 0; i < samples; ++i) {
        const Policy mu = random_policy(rng, mdp.controls());
        const ValueFunction v = random_value(rng, zero, 10.0, mdp.weights());
        const auto truncated = apply_lambda_operator(mdp, mu, v, cfg);
        const auto exact = lambda_operator_oracle(mdp, mu, v, cfg.lambda, cfg.convention);
        const double dev = weighted_distance(truncated.value, exact, mdp.weights());
        if (dev > max_dev) {
            max_dev = dev;
            worst = {{"sample", i}, {"policy", to_json(mu)}, {"v", to_json(v)}, {"deviation", dev}};
        }
        const ValueFunction v_mu = exact_policy_value(mdp, mu);
        const auto fixed = apply_lambda_operator(mdp, mu, v_mu, cfg);
        max_fixed = std::max(max_fixed, weighted_distance(fixed.value, v_mu, mdp.weights()));
    }
    report["lambda"] = cfg.lambda;
    report["samples"] = samples;
    report["max_deviation_vs_oracle"] = max_dev;
    report["max_fixed_point_deviation"] = max_fixed;
    report["tolerance"] = kTolerance;
    report["rho"] = rho_modulus(cfg.lambda, mdp.contraction_modulus());
    if (max_dev > kTolerance || max_fixed > kTolerance) {
        report["counterexample"] = worst;
        return false;
    }
    return true;
}

bool certify_bounds(const CertifyOptions& opts, json& report)
{
    const FiniteMdp mdp = certify_model(opts.model);
    constexpr double kOracleTol = 1e-10;
    const double sigma = mdp.contraction_modulus();
    const auto& nu = mdp.weights();
    const ValueFunction v_star = oracle_v_star(mdp, kOracleTol);
    CounterRng rng(opts.seed);
    const std::size_t samples = opts.samples ? opts.samples : 1000;

    std::size_t optimal_violations = 0;
    double tightest = 0.0;  // max of true error / bound
    json counterexample = nullptr;
    for (std::size_t i = 0; i < samples; ++i) {
        const ValueFunction v = random_value(rng, v_star, 10.0, nu);
        const double bound = certified_error_bound(mdp, v, OptimalTarget{}, sigma);
        const double err = weighted_distance(v_star, v, nu);
        if (bound > 0.0) {
            tightest = std::max(tightest, err / bound);
        }
        if (err > bound + kOracleTol) {
            ++optimal_violations;
            if (counterexample.is_null()) {
                counterexample = {{"which", "optimal"}, {"v", to_json(v)}, {"error", err}, {"bound", bound}};
            }
        }
    }

    std::size_t policy_violations = 0;
    const std::size_t n_policies = std::max<std::size_t>(1, opts.policies);
    const std::size_t per_policy = std::max<std::size_t>(1, samples / 10);
    for (std::size_t p = 0; p < n_policies; ++p) {
        const Policy mu = random_policy(rng, mdp.controls());
        const ValueFunction v_mu = exact_policy_value(mdp, mu);
        for (std::size_t i = 0; i < per_policy; ++i) {
            const ValueFunction v = random_value(rng, v_mu, 10.0, nu);
            const double bound = certified_error_bound(mdp, v, PolicyTarget{mu}, sigma);
            const double err = weighted_distance(v_mu, v, nu);
            if (err > bound + kOracleTol) {
                ++policy_violations;
                if (counterexample.is_null()) {
                    counterexample = {{"which", "policy"}, {"policy", to_json(mu)}, {"v", to_json(v)},
                                      {"error", err}, {"bound", bound}};
                }
            }
        }
    }
    report["sigma"] = sigma;
    report["gamma"] = gamma_bound_constant(sigma);
    report["optimal_samples"] = samples;
    report["optimal_violations"] = optimal_violations;
    report["policy_samples"] = n_policies * per_policy;
    report["policy_violations"] = policy_violations;
    report["max_error_to_bound_ratio"] = tightest;
    if (!counterexample.is_null()) {
        report["counterexample"] = counterexample;
    }
    return optimal_violations == 0 && policy_violations == 0;
}

} // namespace

constexpr std::uint64_t kMaxSeeds = 1'000'000;

std::vector<std::uint64_t> parse_seed_list(std::string_view text)
{
    auto parse_u64 = [](std::string_view s) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
            throw ParseError("invalid seed \"" + std::string(s) + "\"");
        }
        return v;
    };
    std::vector<std::uint64_t> seeds;
    while (!text.empty()) {
        const auto comma = text.find(',');
        const std::string_view item = text.substr(0, comma);
        text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
        if (const auto dots = item.find(".."); dots != std::string_view::npos) {
            const auto a = parse_u64(item.substr(0, dots));
            const auto b = parse_u64(item.substr(dots + 2));
            if (b < a) {
                throw ParseError("empty seed range \"" + std::string(item) + "\"");
            }
            if (b - a >= kMaxSeeds) {
                throw ParseError("seed range \"" + std::string(item) + "\" is too long");
            }
            for (auto s = a;; ++s) {
                seeds.push_back(s);
                if (s == b) {
                    break;
                }
            }
        } else {
            seeds.push_back(parse_u64(item));
        }
    }
    if (seeds.empty()) {
        throw ParseError("seed list is empty");
    }
    return seeds;
}

ExponentConvention parse_convention(std::string_view name)
{
    if (name == "paper_l") {
        return ExponentConvention::paper_l;
    }
    if (name == "classical_l_plus_1") {
        return ExponentConvention::classical_l_plus_1;
    }
    throw DomainError("unknown convention \"" + std::string(name) + "\"");
}

int cmd_solve(const SolveOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&]() -> int {
        const auto start = std::chrono::steady_clock::now();
        const FiniteMdp mdp = load_model(opts.model);
        json report = {{"schema_version", kSchemaVersion}, {"method", opts.method}};
        std::optional<ValueFunction> v;
        Policy policy;
        bool converged = true;
        std::size_t iterations = 0;

        if (opts.method == "vi") {
            auto vi = value_iteration(mdp, ValueFunction::zeros(mdp.n_states()), opts.tol, opts.max_iters);
            converged = vi.converged;
            iterations = vi.iterations;
            v = std::move(vi.value);
            policy = apply_optimality_operator(mdp, *v).policy;
            report["tol"] = opts.tol;
        } else if (opts.method == "pi_exact") {
            auto pi = policy_iteration(mdp, opts.max_iters);
            converged = pi.converged;
            iterations = pi.iterations;
            v = std::move(pi.value);
            policy = std::move(pi.policy);
        } else if (opts.method == "enumerate") {
            auto en = enumerate_policies(mdp, opts.cap);
            iterations = static_cast<std::size_t>(en.policies);
            v = std::move(en.value);
            policy = std::move(en.policy);
            report["policies"] = en.policies;
        } else {
            err << "error: unknown method \"" << opts.method << "\" (expected vi, pi_exact or enumerate)\n";
            return kInputError;
        }

        report["v_star"] = to_json(*v);
        report["policy"] = to_json(policy);
        report["residual"] = weighted_distance(apply_optimality_operator(mdp, *v).value, *v, mdp.weights());
        report["iterations"] = iterations;
        report["converged"] = converged;
        report["wall_time"] = seconds_since(start);
        emit(report, opts.out, out);
        if (!converged) {
            err << "error: " << opts.method << " did not converge within " << opts.max_iters << " iterations\n";
            return kNonConvergence;
        }
        return kSuccess;
    });
}

int cmd_pir(const PirOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&]() -> int {
        const FiniteMdp mdp = load_model(opts.model);
        PirConfig cfg;
        cfg.lambda.lambda = opts.lambda;
        cfg.lambda.truncation_tol = opts.truncation_tol;
        cfg.lambda.max_terms = opts.max_terms;
        cfg.lambda.convention = opts.convention;
        if (opts.p_beta) {
            cfg.schedule = GeometricSchedule{opts.p, *opts.p_beta, opts.p_min};
        } else {
            cfg.schedule = ConstantSchedule{opts.p};
        }
        cfg.stop_tol = opts.tol;
        cfg.max_iterations = opts.max_iters;
        cfg.enforce_initial_condition = opts.enforce;
        cfg.validate();

        const ValueFunction v_star = oracle_v_star(mdp, opts.oracle_tol);
        const ValueFunction v0 = shift_by_weight(v_star, opts.v0_shift, mdp.weights());
        if (opts.enforce) {
            const auto failing = states_not_lt(apply_optimality_operator(mdp, v0).value, v0);
            if (!failing.empty()) {
                err << "error: precondition F V_0 < V_0 fails at states:";
                for (auto x : failing) {
                    err << ' ' << x;
                }
                err << " (use a positive --v0-shift or --no-enforce)\n";
                return kPrecondition;
            }
        }

        const SandwichOracle oracle{v_star};
        std::vector<PirResult> runs;
        const RunBatchSummary summary = run_batch(mdp, v0, cfg, opts.seeds, oracle, opts.threads, &runs);

        fs::create_directories(opts.out_dir);
        for (const PirResult& run : runs) {
            const auto seed = std::to_string(run.trace.seed);
            write_file(opts.out_dir / ("trace_seed_" + seed + ".csv"), trace_to_csv(run.trace, opts.record_wall_time));
            json meta = {
                {"schema_version", kSchemaVersion},
                {"seed", run.trace.seed},
                {"rng", std::string(CounterRng::kName)},
                {"converged", run.trace.converged},
                {"iterations", run.trace.iterations},
                {"initial_residual", run.trace.initial_residual},
                {"final_residual",
                 run.trace.records.empty() ? run.trace.initial_residual : run.trace.records.back().residual},
                {"final_error_vs_oracle", weighted_distance(run.value, v_star, mdp.weights())},
                {"final_value", to_json(run.value)},
            };
            write_file(opts.out_dir / ("run_seed_" + seed + ".json"), meta.dump(2) + "\n");
        }

        json failures = json::array();
        for (const auto& f : summary.failures) {
            failures.push_back({{"seed", f.seed}, {"message", f.message}});
        }
        json doc = {
            {"schema_version", kSchemaVersion},
            {"config",
             {{"model", opts.model.string()},
              {"lambda", opts.lambda},
              {"convention", std::string(convention_name(opts.convention))},
              {"p", opts.p},
              {"p_schedule", opts.p_beta ? "geometric" : "constant"},
              {"tol", opts.tol},
              {"max_iters", opts.max_iters},
              {"v0_shift", opts.v0_shift},
              {"enforce_initial_condition", opts.enforce},
              {"truncation_tol", opts.truncation_tol},
              {"oracle_tol", opts.oracle_tol},
              {"rng", std::string(CounterRng::kName)}}},
            {"seeds_run", summary.seeds_run},
            {"converged", summary.converged},
            {"max_iterations", summary.max_iterations},
            {"max_final_error", summary.max_final_error.value_or(0.0)},
            {"sandwich_violations", summary.sandwich_violations},
            {"failures", std::move(failures)},
        };
        if (opts.p_beta) {
            doc["config"]["p_beta"] = *opts.p_beta;
            doc["config"]["p_min"] = opts.p_min;
        }
        write_file(opts.out_dir / "summary.json", doc.dump(2) + "\n");
        out << doc.dump(2) << "\n";

        for (const auto& f : summary.failures) {
            err << "error: seed " << f.seed << ": " << f.message << "\n";
        }
        if (!summary.failures.empty()) {
            return summary.failures.front().message.find("F V_0 < V_0") != std::string::npos ? kPrecondition
                                                                                              : kInputError;
        }
        return summary.converged == summary.seeds_run ? kSuccess : kNonConvergence;
    });
}

int cmd_certify(const CertifyOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&]() -> int {
        json report = {{"schema_version", kSchemaVersion}, {"target", opts.target}, {"seed", opts.seed}};
        bool pass = false;
        if (opts.target == "mdp-ciric") {
            pass = certify_mdp_ciric(opts, report);
        } else if (opts.target == "example1") {
            pass = certify_example1(opts, report);
        } else if (opts.target == "lambda-op") {
            pass = certify_lambda_op(opts, report);
        } else if (opts.target == "bounds") {
            pass = certify_bounds(opts, report);
        } else {
            err << "error: unknown certify target \"" << opts.target
                << "\" (expected mdp-ciric, example1, lambda-op or bounds)\n";
            return kInputError;
        }
        report["pass"] = pass;
        emit(report, opts.out, out);
        if (!pass) {
            err << "certification failed for " << opts.target << "; counterexample in report\n";
            return kCertificationFailure;
        }
        return kSuccess;
    });
}

int cmd_gen(const GenOptions& opts, std::ostream& out, std::ostream& err)
{
    return guarded(err, [&]() -> int {
        const FiniteMdp mdp = random_mdp(opts.states, opts.controls, opts.discount, opts.seed);
        const std::string text = model_to_json(mdp);
        if (opts.out) {
            write_file(*opts.out, text);
        } else {
            out << text;
        }
        return kSuccess;
    });
}

} // namespace ciricdp::cli
