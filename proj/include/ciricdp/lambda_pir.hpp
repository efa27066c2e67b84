#pragma once

#include "ciricdp/bellman_ops.hpp"
#include "ciricdp/dp_model.hpp"
#include "ciricdp/rng.hpp"
#include "ciricdp/value_space.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ciricdp {

/// p_k = p for every k.
struct ConstantSchedule {
    double p = 0.5;
};

/// p_k = p0 * beta^k clipped to [p_min, 1).
struct GeometricSchedule {
    double p0 = 0.9;
    double beta = 0.95;
    double p_min = 0.05;
};

using ProbabilitySchedule = std::variant<ConstantSchedule, GeometricSchedule>;

/// Throws DomainError unless every p_k lies in (0, 1).
void validate_schedule(const ProbabilitySchedule& schedule);

/// Probability of the policy branch at iteration k.
double schedule_probability(const ProbabilitySchedule& schedule, std::size_t k);

struct PirConfig {
    LambdaOperatorConfig lambda;
    ProbabilitySchedule schedule = ConstantSchedule{0.5};
    double stop_tol = 1e-8;
    std::size_t max_iterations = 10000;
    std::uint64_t seed = 0;
    /// Contraction modulus behind the certified bounds; the model modulus when empty.
    std::optional<double> sigma;
    bool enforce_initial_condition = true;

    void validate() const;
};

enum class Branch { policy_step, lambda_step };

std::string_view to_string(Branch b);

struct PirStep {
    ValueFunction next;
    Policy mu;           // greedy policy at v_k: F_mu v_k = F v_k
    ValueFunction greedy_value;   // F v_k
    Branch branch = Branch::policy_step;
    double draw = 0.0;   // the uniform that selected the branch
    std::size_t lambda_terms = 0;
    bool lambda_hit_term_cap = false;
};

/// One iteration: greedy policy, one Bernoulli(p_k) draw, then F_mu v_k
/// (probability p_k) or F_mu^lambda v_k. Advances rng by exactly one draw.
PirStep pir_step(const DpModel& model, const ValueFunction& v_k, const PirConfig& cfg, std::size_t k,
                 CounterRng& rng);

/// Reference solution for the sandwich check V* - lower_slack nu <= V_k <= F^k V_0 + k upper_slack nu.
struct SandwichOracle {
    ValueFunction v_star;
    double lower_slack = 1e-9;
    double upper_slack_per_step = 1e-10;
};

/// Iteration k produced V_k from V_{k-1}.
struct PirRecord {
    std::size_t k = 0;
    Branch branch = Branch::policy_step;
    Policy mu;                    // greedy policy at V_{k-1}
    double residual = 0.0;        // ||F V_k - V_k||
    double certified_bound = 0.0; // gamma(sigma) * residual
    bool monotone_decrease = true;          // V_k <= V_{k-1} + truncation_tol nu
    std::optional<bool> sandwich_ok;        // set when an oracle is supplied
    std::uint64_t wall_time_ns = 0;         // elapsed since the run started
};

struct PirTrace {
    double initial_residual = 0.0;  // ||F V_0 - V_0||
    double gamma = 0.0;             // certified_bound / residual
    std::vector<PirRecord> records;
    bool converged = false;
    std::size_t iterations = 0;
    std::uint64_t seed = 0;
    std::optional<ValueFunction> final_value;
};

struct PirResult {
    ValueFunction value;
    PirTrace trace;
};

/// Runs pir_step until ||F V_k - V_k|| <= stop_tol or max_iterations.
/// Throws PreconditionError (naming the failing states) when enforcement is on and
/// F V_0 < V_0 fails. Nonconvergence is reported through trace.converged.
[[nodiscard]] PirResult run_pir(const DpModel& model, const ValueFunction& v0, const PirConfig& cfg,
                                const std::optional<SandwichOracle>& oracle = std::nullopt);

struct SeedFailure {
    std::uint64_t seed = 0;
    std::string message;
};

struct RunBatchSummary {
    std::size_t seeds_run = 0;
    std::size_t converged = 0;
    std::size_t max_iterations = 0;          // over converged runs
    std::optional<double> max_final_error;   // vs oracle V*, over all completed runs
    std::size_t sandwich_violations = 0;     // records with sandwich_ok == false
    std::vector<SeedFailure> failures;

    /// Commutative, associative merge of disjoint batches.
    RunBatchSummary merge(const RunBatchSummary& other) const;
    void add_run(const PirResult& run, const std::optional<SandwichOracle>& oracle, const WeightFunction& nu);
};

/// Independent runs differing only in seed, evaluated on up to `workers`
/// threads (0 = hardware concurrency). Per-run errors become failure entries.
RunBatchSummary run_batch(const DpModel& model, const ValueFunction& v0, const PirConfig& cfg,
                          const std::vector<std::uint64_t>& seeds,
                          const std::optional<SandwichOracle>& oracle = std::nullopt, unsigned workers = 0,
                          std::vector<PirResult>* runs = nullptr);

/// CSV with header k,branch,residual,certified_bound,wall_time_ns.
std::string trace_to_csv(const PirTrace& trace, bool include_wall_time = false);

} // namespace ciricdp
