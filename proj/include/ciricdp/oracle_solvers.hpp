#pragma once

#include "ciricdp/bellman_ops.hpp"
#include "ciricdp/dp_model.hpp"
#include "ciricdp/value_space.hpp"

#include <cstdint>

namespace ciricdp {

/// V_mu from the dense linear system (I - alpha P_mu) V = g_mu.
/// Throws InternalError if the residual ||F_mu V - V|| exceeds 1e-10.
ValueFunction exact_policy_value(const FiniteMdp& mdp, const Policy& mu);

struct ValueIterationResult {
    ValueFunction value;
    std::size_t iterations = 0;
    double last_step = 0.0;   // ||V_{k+1} - V_k||
    bool converged = false;
};

/// V_{k+1} = F V_k until ||V_{k+1} - V_k|| <= tol (1 - alpha) / alpha, which
/// guarantees ||V_{k+1} - V*|| <= tol. alpha is the model's contraction modulus.
[[nodiscard]] ValueIterationResult value_iteration(const DpModel& model, const ValueFunction& v0, double tol,
                                                   std::size_t max_iters);

struct PolicyIterationResult {
    ValueFunction value;
    Policy policy;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Howard policy iteration with exact evaluation; stops when the greedy policy repeats.
[[nodiscard]] PolicyIterationResult policy_iteration(const FiniteMdp& mdp, std::size_t max_iters = 1000);

inline constexpr std::uint64_t kDefaultEnumerationCap = 1'000'000;

struct EnumerationResult {
    ValueFunction value;      // pointwise min over all deterministic policies
    Policy policy;            // a policy attaining the min at every state
    std::uint64_t policies = 0;
};

/// Exhaustive evaluation of every deterministic policy.
/// Throws CapExceededError if the policy count exceeds `cap`.
EnumerationResult enumerate_policies(const FiniteMdp& mdp, std::uint64_t cap = kDefaultEnumerationCap);

/// Exact lambda-operator for the affine F_mu V = g + A V, A = alpha P_mu.
/// The classical series W = (1 - lambda) sum lambda^l F_mu^{l+1} v solves
/// W = (1 - lambda) F_mu v + lambda F_mu W, i.e. (I - lambda A) W = g + (1 - lambda) A v.
/// The paper_l series is (1 - lambda) v + lambda W.
ValueFunction lambda_operator_oracle(const FiniteMdp& mdp, const Policy& mu, const ValueFunction& v, double lambda,
                                     ExponentConvention convention = ExponentConvention::classical_l_plus_1);

} // namespace ciricdp
