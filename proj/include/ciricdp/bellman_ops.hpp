#pragma once

#include "ciricdp/dp_model.hpp"
#include "ciricdp/value_space.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <variant>

namespace ciricdp {

/// Which powers of F_mu the lambda-series weights multiply.
///   paper_l:            (1 - lambda) sum_{l>=0} lambda^l F_mu^l V      (l = 0 term is V itself)
///   classical_l_plus_1: (1 - lambda) sum_{l>=0} lambda^l F_mu^{l+1} V  (lambda = 0 gives F_mu V)
enum class ExponentConvention { paper_l, classical_l_plus_1 };

struct LambdaOperatorConfig {
    double lambda = 0.5;
    double truncation_tol = 1e-12;
    std::size_t max_terms = 100000;
    ExponentConvention convention = ExponentConvention::classical_l_plus_1;

    /// Throws DomainError on lambda outside [0, 1), nonpositive tolerance or zero max_terms.
    void validate() const;
};

/// F_mu V(x) = H(x, mu(x), V).
ValueFunction apply_policy_operator(const DpModel& model, const Policy& mu, const ValueFunction& v);

struct GreedyResult {
    ValueFunction value;  // FV
    Policy policy;        // argmin, lowest control id on ties
};

/// FV(x) = min_u H(x, u, V) and the policy attaining it.
GreedyResult apply_optimality_operator(const DpModel& model, const ValueFunction& v);

/// F_mu applied l times; l = 0 returns v.
ValueFunction apply_power(const DpModel& model, const Policy& mu, const ValueFunction& v, std::size_t l);

struct LambdaResult {
    ValueFunction value;
    std::size_t terms = 0;          // series indices 0..terms-1 were evaluated
    double tail_bound = 0.0;        // bound on the distance to the untruncated series
    bool hit_term_cap = false;      // truncation warning: max_terms reached before truncation_tol
};

/// Truncated lambda-operator F_mu^lambda v.
///
/// Terms T_l = F_mu^{e(l)} v are accumulated with weights (1 - lambda) lambda^l
/// until lambda^{L+1} * ||T_L - T_{L-1}|| / (1 - lambda k) <= truncation_tol,
/// where k is the model's contraction modulus. The remaining mass lambda^{L+1}
/// is assigned to T_L, so the weights sum to one and the stated bound is the
/// distance to the full series for a k-contraction.
LambdaResult apply_lambda_operator(const DpModel& model, const Policy& mu, const ValueFunction& v,
                                   const LambdaOperatorConfig& cfg);

/// Self-map on B(X) used by the contraction checks.
using Operator = std::function<ValueFunction(const ValueFunction&)>;

Operator policy_operator(const DpModel& model, Policy mu);
Operator optimality_operator(const DpModel& model);
Operator lambda_operator(const DpModel& model, Policy mu, LambdaOperatorConfig cfg);

/// The quantities of the Ciric inequality for a pair (V, V') under an operator T.
struct CiricComparison {
    double lhs = 0.0;              // d(TV, TV')
    double d_v_vp = 0.0;           // d(V, V')
    double d_v_tv = 0.0;           // d(V, TV)
    double d_vp_tvp = 0.0;         // d(V', TV')
    double d_v_tvp = 0.0;          // d(V, TV')
    double d_vp_tv = 0.0;          // d(V', TV)
    double half_sum = 0.0;         // (d(V, TV') + d(V', TV)) / 2

    /// max(d_v_vp, d_v_tv, d_vp_tvp, half_sum)
    double max_candidate() const noexcept;

    /// lhs / max_candidate(); empty when every candidate is zero.
    std::optional<double> ratio() const noexcept;
};

CiricComparison ciric_comparison(const Operator& op, const WeightFunction& nu, const ValueFunction& v,
                                 const ValueFunction& v_prime);

/// gamma(sigma) = max((2 - sigma) / (2 - 2 sigma), 1 / (1 - sigma)), sigma in (0, 1).
double gamma_bound_constant(double sigma);

/// rho = sum_{l>=1} (1 - lambda) lambda^l k^l = (1 - lambda) lambda k / (1 - lambda k).
double rho_modulus(double lambda, double k);

/// Banach modulus of the truncation-free lambda-operator when F_mu has modulus k:
/// classical k (1 - lambda) / (1 - lambda k); paper_l (1 - lambda) / (1 - lambda k).
double lambda_operator_modulus(double lambda, double k, ExponentConvention convention);

struct OptimalTarget {};
struct PolicyTarget {
    Policy mu;
};
using BoundTarget = std::variant<OptimalTarget, PolicyTarget>;

/// gamma(sigma) * ||T V - V|| with T = F (optimal) or F_mu (policy): an
/// a-posteriori bound on ||V* - V|| or ||V_mu - V||.
double certified_error_bound(const DpModel& model, const ValueFunction& v, const BoundTarget& which, double sigma);

/// Policy that, at each state, takes the control with the largest H(x, u, v)
/// among those within slack * nu(x) of the minimum (lowest id on ties).
/// With v = V*, slack = epsilon / gamma(sigma) gives ||V_mu - V*|| <= epsilon.
Policy near_greedy_policy(const DpModel& model, const ValueFunction& v, double slack);

/// near_greedy_policy(model, v_star, epsilon / gamma(sigma)).
Policy epsilon_optimal_policy(const DpModel& model, const ValueFunction& v_star, double epsilon, double sigma);

} // namespace ciricdp
