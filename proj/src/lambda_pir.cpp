#include "ciricdp/lambda_pir.hpp"

#include "ciricdp/errors.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <sstream>
#include <thread>
#include <tuple>
#include <type_traits>

namespace ciricdp {

void validate_schedule(const ProbabilitySchedule& schedule)
{
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ConstantSchedule>) {
                if (!(s.p > 0.0 && s.p < 1.0)) {
                    throw DomainError("constant p must lie in (0, 1), got " + std::to_string(s.p));
                }
            } else {
                if (!(s.p_min > 0.0 && s.p_min < 1.0)) {
                    throw DomainError("p_min must lie in (0, 1)");
                }
                if (!(s.p0 > 0.0) || !(s.beta > 0.0) || !std::isfinite(s.p0) || !std::isfinite(s.beta)) {
                    throw DomainError("p0 and beta must be positive and finite");
                }
            }
        },
        schedule);
}

double schedule_probability(const ProbabilitySchedule& schedule, std::size_t k)
{
    return std::visit(
        [k](const auto& s) -> double {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, ConstantSchedule>) {
                return s.p;
            } else {
                const double raw = s.p0 * std::pow(s.beta, static_cast<double>(k));
                return std::clamp(raw, s.p_min, std::nextafter(1.0, 0.0));
            }
        },
        schedule);
}

void PirConfig::validate() const
{
    lambda.validate();
    validate_schedule(schedule);
    if (!(stop_tol > 0.0)) {
        throw DomainError("stop_tol must be positive");
    }
    if (max_iterations == 0) {
        throw DomainError("max_iterations must be at least 1");
    }
    if (sigma && !(*sigma > 0.0 && *sigma < 1.0)) {
        throw DomainError("sigma must lie in (0, 1)");
    }
}

std::string_view to_string(Branch b)
{
    return b == Branch::policy_step ? "policy_step" : "lambda_step";
}

namespace {

PirStep step_from_greedy(const DpModel& model, const ValueFunction& v_k, GreedyResult greedy, const PirConfig& cfg,
                         std::size_t k, CounterRng& rng)
{
    PirStep step{greedy.value, std::move(greedy.policy), std::move(greedy.value)};
    step.draw = rng.uniform();
    if (step.draw < schedule_probability(cfg.schedule, k)) {
        step.branch = Branch::policy_step;
    } else {
        step.branch = Branch::lambda_step;
        LambdaResult lr = apply_lambda_operator(model, step.mu, v_k, cfg.lambda);
        step.next = std::move(lr.value);
        step.lambda_terms = lr.terms;
        step.lambda_hit_term_cap = lr.hit_term_cap;
    }
    return step;
}

bool within_upper(const ValueFunction& v, const ValueFunction& upper, double slack, const WeightFunction& nu)
{
    for (std::size_t x = 0; x < v.size(); ++x) {
        if (!(v[x] <= upper[x] + slack * nu[x])) {
            return false;
        }
    }
    return true;
}

std::string format_states(const std::vector<std::size_t>& states)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < states.size(); ++i) {
        out << (i ? ", " : "") << states[i];
    }
    return out.str();
}

} // namespace

PirStep pir_step(const DpModel& model, const ValueFunction& v_k, const PirConfig& cfg, std::size_t k,
                 CounterRng& rng)
{
    cfg.validate();
    return step_from_greedy(model, v_k, apply_optimality_operator(model, v_k), cfg, k, rng);
}

PirResult run_pir(const DpModel& model, const ValueFunction& v0, const PirConfig& cfg,
                  const std::optional<SandwichOracle>& oracle)
{
    cfg.validate();
    if (v0.size() != model.n_states()) {
        throw DimensionError("initial value function size does not match the model");
    }
    if (oracle && oracle->v_star.size() != model.n_states()) {
        throw DimensionError("oracle V* size does not match the model");
    }
    const auto& nu = model.weights();
    const double gamma = gamma_bound_constant(cfg.sigma.value_or(model.contraction_modulus()));
    const auto start = std::chrono::steady_clock::now();

    GreedyResult greedy = apply_optimality_operator(model, v0);
    if (cfg.enforce_initial_condition) {
        const auto failing = states_not_lt(greedy.value, v0);
        if (!failing.empty()) {
            throw PreconditionError("F V_0 < V_0 fails at states: " + format_states(failing));
        }
    }

    PirTrace trace;
    trace.seed = cfg.seed;
    trace.gamma = gamma;
    trace.initial_residual = weighted_distance(greedy.value, v0, nu);
    ValueFunction v = v0;
    ValueFunction upper = v0;  // F^k V_0
    CounterRng rng(cfg.seed);

    if (trace.initial_residual <= cfg.stop_tol) {
        trace.converged = true;
    }
    for (std::size_t k = 1; !trace.converged && k <= cfg.max_iterations; ++k) {
        PirStep step = step_from_greedy(model, v, std::move(greedy), cfg, k - 1, rng);
        greedy = apply_optimality_operator(model, step.next);

        PirRecord rec;
        rec.k = k;
        rec.branch = step.branch;
        rec.mu = std::move(step.mu);
        rec.residual = weighted_distance(greedy.value, step.next, nu);
        rec.certified_bound = gamma * rec.residual;
        rec.monotone_decrease = within_upper(step.next, v, cfg.lambda.truncation_tol, nu);
        if (oracle) {
            upper = apply_optimality_operator(model, upper).value;
            const bool lower_ok = within_upper(oracle->v_star, step.next, oracle->lower_slack, nu);
            const bool upper_ok =
                within_upper(step.next, upper, static_cast<double>(k) * oracle->upper_slack_per_step, nu);
            rec.sandwich_ok = lower_ok && upper_ok;
        }
        rec.wall_time_ns = static_cast<std::uint64_t>(
            std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count());

        v = std::move(step.next);
        trace.iterations = k;
        trace.converged = rec.residual <= cfg.stop_tol;
        trace.records.push_back(std::move(rec));
    }
    trace.final_value = v;
    return {std::move(v), std::move(trace)};
}

RunBatchSummary RunBatchSummary::merge(const RunBatchSummary& other) const
{
    RunBatchSummary out = *this;
    out.seeds_run += other.seeds_run;
    out.converged += other.converged;
    out.max_iterations = std::max(out.max_iterations, other.max_iterations);
    if (other.max_final_error) {
        out.max_final_error = std::max(out.max_final_error.value_or(0.0), *other.max_final_error);
    }
    out.sandwich_violations += other.sandwich_violations;
    out.failures.insert(out.failures.end(), other.failures.begin(), other.failures.end());
    std::sort(out.failures.begin(), out.failures.end(), [](const SeedFailure& a, const SeedFailure& b) {
        return std::tie(a.seed, a.message) < std::tie(b.seed, b.message);
    });
    return out;
}

void RunBatchSummary::add_run(const PirResult& run, const std::optional<SandwichOracle>& oracle,
                              const WeightFunction& nu)
{
    ++seeds_run;
    if (run.trace.converged) {
        ++converged;
        max_iterations = std::max(max_iterations, run.trace.iterations);
    }
    if (oracle) {
        const double err = weighted_distance(run.value, oracle->v_star, nu);
        max_final_error = std::max(max_final_error.value_or(0.0), err);
    }
    for (const auto& rec : run.trace.records) {
        if (rec.sandwich_ok == false) {
            ++sandwich_violations;
        }
    }
}

RunBatchSummary run_batch(const DpModel& model, const ValueFunction& v0, const PirConfig& cfg,
                          const std::vector<std::uint64_t>& seeds, const std::optional<SandwichOracle>& oracle,
                          unsigned workers, std::vector<PirResult>* runs)
{
    if (seeds.empty()) {
        throw DomainError("run_batch needs at least one seed");
    }
    cfg.validate();
    std::vector<std::optional<PirResult>> results(seeds.size());
    std::vector<std::string> errors(seeds.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < seeds.size(); i = next++) {
            PirConfig run_cfg = cfg;
            run_cfg.seed = seeds[i];
            try {
                results[i] = run_pir(model, v0, run_cfg, oracle);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    if (workers == 0) {
        workers = std::max(1u, std::thread::hardware_concurrency());
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, seeds.size()));
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 1; w < workers; ++w) {
            pool.emplace_back(work);
        }
        work();
    }

    RunBatchSummary summary;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        if (results[i]) {
            summary.add_run(*results[i], oracle, model.weights());
        } else {
            ++summary.seeds_run;
            summary.failures.push_back({seeds[i], errors[i]});
        }
    }
    if (runs) {
        runs->clear();
        for (auto& r : results) {
            if (r) {
                runs->push_back(std::move(*r));
            }
        }
    }
    return summary;
}

std::string trace_to_csv(const PirTrace& trace, bool include_wall_time)
{
    std::string out = "k,branch,residual,certified_bound,wall_time_ns\n";
    char buf[160];
    std::snprintf(buf, sizeof buf, "0,none,%.17g,%.17g,0\n", trace.initial_residual,
                  trace.gamma * trace.initial_residual);
    out += buf;
    for (const auto& rec : trace.records) {
        std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g,%llu\n", rec.k, std::string(to_string(rec.branch)).c_str(),
                      rec.residual, rec.certified_bound,
                      static_cast<unsigned long long>(include_wall_time ? rec.wall_time_ns : 0));
        out += buf;
    }
    return out;
}

} // namespace ciricdp
